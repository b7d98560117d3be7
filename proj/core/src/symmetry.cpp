#include "hhlab/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "hhlab/error.hpp"
#include "hhlab/parallel.hpp"
#include "hhlab/text.hpp"

namespace hhlab::symmetry {
namespace {

diagnostics::SectionOptions section_options(const SymmetryOptions& options) {
  diagnostics::SectionOptions s;
  s.integration = options.integration;
  return s;
}

// Maps a point `steps` times; nullopt (with a message) if any step fails.
std::optional<std::pair<double, double>> map_point(const SystemParams& p, double energy,
                                                   std::pair<double, double> pt, int steps,
                                                   const SymmetryOptions& options,
                                                   std::string& message) {
  try {
    for (int k = 0; k < steps; ++k) pt = return_map(p, energy, pt.first, pt.second, options);
    return pt;
  } catch (const Error& e) {
    message = std::string(to_string(e.kind())) + ": " + e.what();
    return std::nullopt;
  }
}

std::pair<double, double> gamma0_point(const Involution& inv, double s) {
  return inv.kind == InvolutionKind::MomentumTime ? std::pair{s, 0.0} : std::pair{0.0, s};
}

double distance(std::pair<double, double> a, std::pair<double, double> b) {
  return std::hypot(a.first - b.first, a.second - b.second);
}

}  // namespace

State Involution::apply(const State& s) const {
  if (kind == InvolutionKind::MomentumTime) return {-s.t, s.x, s.y, -s.px, -s.py};
  return {-s.t, -s.x, -s.y, s.px, s.py};
}

std::pair<double, double> Involution::apply_section(double y, double py) const {
  if (kind == InvolutionKind::MomentumTime) return {y, -py};
  return {-y, py};
}

double Involution::predicate(double y, double py) const {
  return kind == InvolutionKind::MomentumTime ? py : y;
}

bool Involution::on_fixed_line(double y, double py, double tol) const {
  return std::abs(predicate(y, py)) <= tol;
}

Involution involution_for(const SystemParams& p) {
  p.validate();
  return {p.order % 2 == 0 ? InvolutionKind::CoordinateTime : InvolutionKind::MomentumTime};
}

std::pair<double, double> return_map(const SystemParams& p, double energy, double y, double py,
                                     const SymmetryOptions& options) {
  const State start = diagnostics::lift_section_point(p, energy, y, py, +1);
  const auto c =
      diagnostics::next_crossing(p, start, options.return_time_max, options.dt, section_options(options));
  if (!c) throw Error(ErrorKind::NoReturn, "no return to the section within the time limit");
  return {c->state.y, c->state.py};
}

SymmetryLine gamma0(const SystemParams& p, double energy, const SymmetryOptions& options) {
  const Involution inv = involution_for(p);
  SymmetryLine line;
  line.index = 0;
  if (energy < 0.0) throw Error(ErrorKind::EmptyLine, "no on-shell points below E = 0");
  if (energy == 0.0) {
    line.points.emplace_back(0.0, 0.0);
    line.parameter.push_back(0.0);
    return line;
  }
  if (options.samples == 0) throw Error(ErrorKind::InvalidArgument, "gamma0: samples must be >= 1");
  double lo = 0.0;
  double hi = 0.0;
  if (inv.kind == InvolutionKind::MomentumTime) {
    const auto g = diagnostics::section_bounds(p, energy, 1, 1);
    lo = g.y_min;
    hi = g.y_max;
  } else {
    const double pmax = std::sqrt(2.0 * p.mass * energy);  // V(0, 0) = 0
    lo = -pmax;
    hi = pmax;
  }
  const double n = static_cast<double>(options.samples);
  for (std::size_t k = 0; k < options.samples; ++k) {
    const double s = lo + (static_cast<double>(k) + 0.5) * (hi - lo) / n;
    const auto pt = gamma0_point(inv, s);
    if (2.0 * p.mass * (energy - potential(p, 0.0, pt.first)) - pt.second * pt.second <= 0.0) continue;
    line.points.push_back(pt);
    line.parameter.push_back(s);
  }
  if (line.points.empty()) throw Error(ErrorKind::EmptyLine, "fixed line has no on-shell points");
  return line;
}

SymmetryLine advance_line(const SystemParams& p, double energy, const SymmetryLine& line,
                          int steps, const SymmetryOptions& options) {
  if (steps < 1) throw Error(ErrorKind::InvalidArgument, "advance_line: steps must be >= 1");
  const std::size_t n = line.points.size();
  std::vector<std::optional<std::pair<double, double>>> mapped(n);
  std::vector<std::string> messages(n);
  parallel_for(n, options.workers, [&](std::size_t k) {
    mapped[k] = map_point(p, energy, line.points[k], steps, options, messages[k]);
  });
  SymmetryLine out;
  out.index = line.index + 2 * steps;
  out.log = line.log;
  for (std::size_t k = 0; k < n; ++k) {
    if (mapped[k]) {
      out.points.push_back(*mapped[k]);
      out.parameter.push_back(k < line.parameter.size() ? line.parameter[k] : static_cast<double>(k));
    } else {
      out.log.push_back("dropped point " + std::to_string(k) + " (y=" +
                        format_double(line.points[k].first) + ", py=" +
                        format_double(line.points[k].second) + "): " + messages[k]);
    }
  }
  return out;
}

std::vector<PeriodicIc> periodic_ics(const SystemParams& p, double energy,
                                     const SymmetryOptions& options) {
  const Involution inv = involution_for(p);
  const SymmetryLine g0 = gamma0(p, energy, options);
  const std::size_t n = g0.points.size();
  std::vector<std::optional<double>> value(n);
  parallel_for(n, options.workers, [&](std::size_t k) {
    std::string msg;
    const auto m = map_point(p, energy, g0.points[k], 1, options, msg);
    if (m) value[k] = inv.predicate(m->first, m->second);
  });

  auto predicate_at = [&](double s) -> std::optional<double> {
    std::string msg;
    const auto m = map_point(p, energy, gamma0_point(inv, s), 1, options, msg);
    if (!m) return std::nullopt;
    return inv.predicate(m->first, m->second);
  };

  std::vector<double> roots;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (!value[k] || !value[k + 1]) continue;
    double fa = *value[k];
    const double fb = *value[k + 1];
    if (fa == 0.0) {
      roots.push_back(g0.parameter[k]);
      continue;
    }
    if ((fa < 0.0) == (fb < 0.0) || fb == 0.0) continue;
    double a = g0.parameter[k];
    double b = g0.parameter[k + 1];
    bool ok = true;
    while (b - a > options.root_tolerance) {
      const double m = 0.5 * (a + b);
      const auto fm = predicate_at(m);
      if (!fm) {
        ok = false;
        break;
      }
      if ((*fm < 0.0) == (fa < 0.0)) {
        a = m;
        fa = *fm;
      } else {
        b = m;
      }
    }
    if (!ok) continue;
    const double s = 0.5 * (a + b);
    const auto fs = predicate_at(s);
    if (fs && std::abs(*fs) <= options.root_residual_max) roots.push_back(s);
  }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-8; }),
              roots.end());
  if (roots.empty()) throw Error(ErrorKind::NoIntersections, "Gamma_0 and Gamma_2 do not intersect");

  std::vector<PeriodicIc> out;
  for (double s : roots) {
    const auto pt = gamma0_point(inv, s);
    PeriodicIc ic;
    ic.y = pt.first;
    ic.py = pt.second;
    ic.px_lifted = solve_momentum_on_shell(p, energy, 0.0, ic.y, ic.py, +1);
    ic.energy = energy;
    ic.period_divisor = 2;
    std::string msg;
    const auto back = map_point(p, energy, pt, 2, options, msg);
    ic.closure_error = back ? distance(*back, pt) : std::numeric_limits<double>::infinity();
    out.push_back(ic);
  }
  return out;
}

Closure verify_periodic(const SystemParams& p, const State& ic, double max_period, double dt,
                        const IntegrationOptions& integration) {
  const Vec4 z0 = to_vec(ic);
  auto dist = [&](const Vec4& z) { return (z - z0).norm(); };
  constexpr double close_tol = 1e-3;

  // Samples k-2, k-1, k; a local minimum sits at k-1.
  std::optional<State> bracket_start;
  double best = std::numeric_limits<double>::infinity();
  State s2 = ic;
  State s1 = ic;
  double d2 = 0.0;
  double d1 = 0.0;
  std::size_t count = 0;
  propagate(p, ic, max_period, dt, integration, [&](const State& s) {
    const double d = dist(to_vec(s));
    if (count >= 2 && d1 < d2 && d1 <= d) {
      best = std::min(best, d1);
      if (d1 < close_tol) {
        bracket_start = s2;
        return false;
      }
    }
    s2 = s1;
    d2 = d1;
    s1 = s;
    d1 = d;
    ++count;
    return true;
  });
  if (!bracket_start)
    throw Error(ErrorKind::NotClosed, "orbit does not close within " + format_double(max_period) +
                                          " (closest approach " + format_double(best) + ")");

  // Golden-section search for the minimum distance over [t_{k-2}, t_k].
  const Vec4 zs = to_vec(*bracket_start);
  const int sub = std::max(1, integration.substeps);
  auto state_at = [&](double tau) {
    const int n = std::max(1, static_cast<int>(std::ceil(tau / (dt / sub))));
    Vec4 z = zs;
    for (int k = 0; k < n; ++k) z = rk4_step(p, z, tau / n);
    return z;
  };
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = 0.0;
  double b = 2.0 * dt;
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = dist(state_at(c));
  double fd = dist(state_at(d));
  while (b - a > 1e-12) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = dist(state_at(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = dist(state_at(d));
    }
  }
  const double tau = 0.5 * (a + b);
  return {bracket_start->t + tau - ic.t, dist(state_at(tau))};
}

std::string symmetry_line_csv(const SymmetryLine& line) {
  std::string out = "index,y,py\n";
  for (const auto& [y, py] : line.points)
    out += std::to_string(line.index) + "," + format_double(y) + "," + format_double(py) + "\n";
  return out;
}

nlohmann::json periodic_ics_json(const std::vector<PeriodicIc>& ics) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& ic : ics)
    arr.push_back({{"y", ic.y},
                   {"py", ic.py},
                   {"px_lifted", ic.px_lifted},
                   {"energy", ic.energy},
                   {"period_divisor", ic.period_divisor},
                   {"closure_error", ic.closure_error}});
  return arr;
}

}  // namespace hhlab::symmetry
