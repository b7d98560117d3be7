#include <cmath>
#include <limits>

#include "hhlab/diagnostics.hpp"
#include "hhlab/error.hpp"
#include "hhlab/parallel.hpp"

namespace hhlab::diagnostics {
namespace {

Vec4 advance(const SystemParams& p, const Vec4& z, double tau, int substeps) {
  Vec4 out = z;
  const double h = tau / substeps;
  for (int s = 0; s < substeps; ++s) out = rk4_step(p, out, h);
  return out;
}

// Root of the cubic Hermite interpolant of x on [0, 1] (x0 < 0 <= x1 after orientation).
double hermite_guess(double x0, double x1, double v0, double v1) {
  auto h = [&](double s) {
    const double s2 = s * s;
    const double s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * x0 + (s3 - 2 * s2 + s) * v0 + (-2 * s3 + 3 * s2) * x1 +
           (s3 - s2) * v1;
  };
  double a = 0.0;
  double b = 1.0;
  for (int i = 0; i < 60; ++i) {
    const double m = 0.5 * (a + b);
    if (h(m) < 0.0) a = m;
    else b = m;
  }
  return 0.5 * (a + b);
}

SectionPoint to_section_point(const SystemParams& p, const Crossing& c, double energy,
                              int orientation) {
  const State& s = c.state;
  const double radicand = 2.0 * p.mass * (energy - potential(p, 0.0, s.y)) - s.py * s.py;
  const double px = radicand > 0.0 ? orientation * std::sqrt(radicand) : s.px;
  return {s.y, s.py, s.t, px};
}

bool acceptable(const Crossing& c, const SectionOptions& options) {
  return c.residual < options.x_tolerance && options.orientation * c.state.px > 0.0;
}

}  // namespace

std::string_view to_string(OrbitStatus s) noexcept {
  switch (s) {
    case OrbitStatus::Ok: return "ok";
    case OrbitStatus::NoCrossings: return "no_crossings";
    case OrbitStatus::Unbounded: return "unbounded";
    case OrbitStatus::NonFinite: return "non_finite";
  }
  return "unknown";
}

bool brackets_crossing(const State& before, const State& after, int orientation) {
  return orientation > 0 ? (before.x < 0.0 && after.x >= 0.0)
                         : (before.x > 0.0 && after.x <= 0.0);
}

Crossing refine_crossing(const SystemParams& p, const State& before, const State& after,
                         double dt, int substeps) {
  const int sign = after.x >= before.x ? 1 : -1;
  const Vec4 z0 = to_vec(before);
  // g(tau) = sign * x(tau) is negative at 0 and non-negative at dt.
  auto g = [&](double tau) { return sign * advance(p, z0, tau, substeps)[0]; };

  double a = 0.0;
  double b = dt;
  double ga = sign * before.x;
  double gb = sign * after.x;
  if (gb == 0.0) return {after, 0.0};

  double tau = dt * hermite_guess(ga, gb, sign * before.px / p.mass * dt,
                                  sign * after.px / p.mass * dt);
  double best_tau = tau;
  double best_g = std::numeric_limits<double>::infinity();
  int side = 0;
  for (int iter = 0; iter < 200; ++iter) {
    if (!(tau > a && tau < b)) tau = 0.5 * (a + b);
    const double gt = g(tau);
    if (std::abs(gt) < std::abs(best_g)) {
      best_g = gt;
      best_tau = tau;
    }
    if (std::abs(gt) <= 1e-14 || (b - a) <= 1e-13 * std::max(1.0, dt)) break;
    if (gt < 0.0) {
      a = tau;
      ga = gt;
      if (side == -1) gb *= 0.5;  // Illinois modification
      side = -1;
    } else {
      b = tau;
      gb = gt;
      if (side == +1) ga *= 0.5;
      side = +1;
    }
    tau = a - ga * (b - a) / (gb - ga);
    if (iter % 4 == 3) tau = 0.5 * (a + b);
  }
  const Vec4 z = advance(p, z0, best_tau, substeps);
  return {from_vec(before.t + best_tau, z), std::abs(z[0])};
}

std::optional<Crossing> next_crossing(const SystemParams& p, const State& start, double t_max,
                                      double dt, const SectionOptions& options) {
  std::optional<Crossing> found;
  State prev = start;
  bool first = true;
  propagate(p, start, t_max, dt, options.integration, [&](const State& s) {
    if (first) {
      first = false;
      return true;
    }
    if (brackets_crossing(prev, s, options.orientation)) {
      Crossing c = refine_crossing(p, prev, s, dt, options.integration.substeps);
      if (acceptable(c, options)) {
        found = c;
        return false;
      }
    }
    prev = s;
    return true;
  });
  return found;
}

std::vector<SectionPoint> section_crossings(const SystemParams& p, const State& start,
                                            double t_max, double dt,
                                            const SectionOptions& options) {
  const double energy = total_energy(p, start);
  std::vector<SectionPoint> points;
  State prev = start;
  bool first = true;
  propagate(p, start, t_max, dt, options.integration, [&](const State& s) {
    if (!first && brackets_crossing(prev, s, options.orientation)) {
      const Crossing c = refine_crossing(p, prev, s, dt, options.integration.substeps);
      if (acceptable(c, options)) points.push_back(to_section_point(p, c, energy, options.orientation));
    }
    first = false;
    prev = s;
    return true;
  });
  return points;
}

SectionSet poincare_section(const SystemParams& p, std::span<const State> initial_states,
                            double t_max, double dt, const SectionOptions& options) {
  SectionSet set;
  set.params = p;
  set.orbits.resize(initial_states.size());
  if (!initial_states.empty()) set.energy = total_energy(p, initial_states.front());
  parallel_for(initial_states.size(), options.workers, [&](std::size_t i) {
    OrbitSection& orbit = set.orbits[i];
    orbit.orbit_id = i;
    orbit.initial = initial_states[i];
    orbit.energy = total_energy(p, initial_states[i]);
    try {
      orbit.points = section_crossings(p, initial_states[i], t_max, dt, options);
      if (orbit.points.empty()) {
        orbit.status = OrbitStatus::NoCrossings;
        orbit.message = "orbit never crossed x = 0 in the chosen direction";
      }
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Unbounded) orbit.status = OrbitStatus::Unbounded;
      else if (e.kind() == ErrorKind::NonFinite) orbit.status = OrbitStatus::NonFinite;
      else throw;
      orbit.message = e.what();
    }
  });
  return set;
}

}  // namespace hhlab::diagnostics
