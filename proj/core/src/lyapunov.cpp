#include <algorithm>
#include <cmath>
#include <limits>

#include "hhlab/diagnostics.hpp"
#include "hhlab/error.hpp"
#include "hhlab/parallel.hpp"
#include "hhlab/random.hpp"

namespace hhlab::diagnostics {
namespace {

double section_potential(const SystemParams& p, double y) { return potential(p, 0.0, y); }

// Edge of the connected well {V(0, y) <= E} containing y = 0, searched towards `dir`.
double well_edge(const SystemParams& p, double energy, int dir, double limit) {
  const double step = 1e-3;
  double inside = 0.0;
  for (double y = step; y <= limit; y += step) {
    if (section_potential(p, dir * y) > energy) {
      double a = inside;
      double b = y;
      for (int i = 0; i < 80; ++i) {
        const double m = 0.5 * (a + b);
        if (section_potential(p, dir * m) > energy) b = m;
        else a = m;
      }
      return dir * a;
    }
    inside = y;
  }
  return dir * limit;
}

CellStatus run_cell(const SystemParams& p, double energy, double y, double py, double t_total,
                    double dt, const LyapunovOptions& options, double& lambda) {
  lambda = std::numeric_limits<double>::quiet_NaN();
  State start;
  try {
    start = lift_section_point(p, energy, y, py, +1);
  } catch (const Error&) {
    return CellStatus::OffShell;
  }
  try {
    lambda = largest_lyapunov(p, start, t_total, dt, options).lambda;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Unbounded) return CellStatus::Escaped;
    if (e.kind() == ErrorKind::NonFinite) return CellStatus::NonFinite;
    throw;
  }
  return CellStatus::Ok;
}

}  // namespace

std::string_view to_string(CellStatus s) noexcept {
  switch (s) {
    case CellStatus::Ok: return "ok";
    case CellStatus::OffShell: return "off_shell";
    case CellStatus::Escaped: return "escaped";
    case CellStatus::NonFinite: return "non_finite";
  }
  return "unknown";
}

LyapunovResult largest_lyapunov(const SystemParams& p, const State& start, double t_total,
                                double dt, const LyapunovOptions& options) {
  p.validate();
  if (!(dt > 0.0) || !(t_total > 0.0) || !(options.renorm_interval > 0.0) ||
      options.integration.substeps < 1)
    throw Error(ErrorKind::InvalidArgument, "lyapunov: need dt > 0, t_total > 0, interval > 0");
  const double norm0 = options.initial_direction.norm();
  if (!(norm0 > 0.0) || !std::isfinite(norm0))
    throw Error(ErrorKind::InvalidArgument, "lyapunov: initial direction must be nonzero");

  const std::size_t steps = sample_count(t_total, dt) - 1;
  const std::size_t per_block =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(options.renorm_interval / dt)));
  const int sub = options.integration.substeps;
  const double h = dt / sub;
  const double radius = options.integration.escape_radius;

  Vec4 z = to_vec(start);
  Vec4 v = options.initial_direction / norm0;
  double log_sum = 0.0;
  LyapunovResult result;
  result.history.reserve(steps / per_block + 1);

  for (std::size_t k = 1; k <= steps; ++k) {
    for (int s = 0; s < sub; ++s) rk4_tangent_step(p, z, v, h);
    if (!z.allFinite() || !v.allFinite())
      throw Error(ErrorKind::NonFinite, "lyapunov: state became non-finite");
    if (std::abs(z[0]) > radius || std::abs(z[1]) > radius)
      throw Error(ErrorKind::Unbounded, "lyapunov: orbit left the escape radius");
    if (k % per_block == 0 || k == steps) {
      const double n = v.norm();
      if (!(n > 0.0)) throw Error(ErrorKind::NonFinite, "lyapunov: tangent vector collapsed");
      log_sum += std::log(n);
      v /= n;
      const double t = static_cast<double>(k) * dt;
      result.history.push_back({t, log_sum / t});
    }
  }
  result.t_total = static_cast<double>(steps) * dt;
  result.lambda = result.history.empty() ? 0.0 : result.history.back().lambda;
  return result;
}

double GridSpec::y_at(std::size_t i) const {
  return y_min + (static_cast<double>(i) + 0.5) * (y_max - y_min) / static_cast<double>(ny);
}

double GridSpec::py_at(std::size_t j) const {
  return py_min + (static_cast<double>(j) + 0.5) * (py_max - py_min) / static_cast<double>(npy);
}

GridSpec section_bounds(const SystemParams& p, double energy, std::size_t ny, std::size_t npy) {
  p.validate();
  if (!(energy > 0.0)) throw Error(ErrorKind::OffShell, "section is empty for E <= 0");
  const double limit = IntegrationOptions{}.escape_radius;
  GridSpec g;
  g.ny = ny;
  g.npy = npy;
  g.y_min = well_edge(p, energy, -1, limit);
  g.y_max = well_edge(p, energy, +1, limit);
  double vmin = 0.0;
  for (int k = 0; k <= 2000; ++k) {
    const double y = g.y_min + (g.y_max - g.y_min) * k / 2000.0;
    vmin = std::min(vmin, section_potential(p, y));
  }
  const double pmax = std::sqrt(2.0 * p.mass * (energy - vmin));
  g.py_min = -pmax;
  g.py_max = pmax;
  return g;
}

State lift_section_point(const SystemParams& p, double energy, double y, double py, int sign) {
  State s;
  s.y = y;
  s.py = py;
  s.px = solve_momentum_on_shell(p, energy, 0.0, y, py, sign);
  return s;
}

LyapunovMap lyapunov_map(const SystemParams& p, double energy, const GridSpec& grid,
                         double t_total, double dt, const LyapunovOptions& options,
                         std::size_t workers) {
  if (grid.ny == 0 || grid.npy == 0)
    throw Error(ErrorKind::InvalidArgument, "lyapunov map: grid must be non-empty");
  LyapunovMap map;
  map.params = p;
  map.energy = energy;
  map.grid = grid;
  map.t_total = t_total;
  map.values.assign(grid.cells(), std::numeric_limits<double>::quiet_NaN());
  map.status.assign(grid.cells(), CellStatus::Ok);
  parallel_for(grid.cells(), workers, [&](std::size_t c) {
    const std::size_t i = c / grid.npy;
    const std::size_t j = c % grid.npy;
    map.status[c] =
        run_cell(p, energy, grid.y_at(i), grid.py_at(j), t_total, dt, options, map.values[c]);
  });
  return map;
}

std::vector<std::pair<double, double>> random_section_points(const SystemParams& p,
                                                             double energy, const GridSpec& box,
                                                             std::size_t count,
                                                             std::uint64_t seed) {
  const CounterRng rng(seed, 1);
  std::vector<std::pair<double, double>> out;
  out.reserve(count);
  const std::uint64_t max_draws = 10000 * (static_cast<std::uint64_t>(count) + 1);
  for (std::uint64_t k = 0; out.size() < count; ++k) {
    if (k >= max_draws)
      throw Error(ErrorKind::OffShell, "no on-shell section points found inside the box");
    const double y = rng.uniform(2 * k, box.y_min, box.y_max);
    const double py = rng.uniform(2 * k + 1, box.py_min, box.py_max);
    if (2.0 * p.mass * (energy - section_potential(p, y)) - py * py > 0.0) out.emplace_back(y, py);
  }
  return out;
}

std::vector<ScatterPoint> lyapunov_scatter(const SystemParams& p, double energy,
                                           std::span<const std::pair<double, double>> points,
                                           double t_total, double dt,
                                           const LyapunovOptions& options, std::size_t workers) {
  std::vector<ScatterPoint> out(points.size());
  parallel_for(points.size(), workers, [&](std::size_t k) {
    ScatterPoint& sp = out[k];
    sp.y = points[k].first;
    sp.py = points[k].second;
    sp.status = run_cell(p, energy, sp.y, sp.py, t_total, dt, options, sp.lambda);
  });
  return out;
}

}  // namespace hhlab::diagnostics
