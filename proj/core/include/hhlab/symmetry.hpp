#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hhlab/diagnostics.hpp"

namespace hhlab::symmetry {

// Reversing symmetries of the flow, I0 o I0 = identity.
//   MomentumTime:   (x, y, px, py, t) -> (x, y, -px, -py, -t), fixed line {py = 0}
//   CoordinateTime: (x, y, px, py, t) -> (-x, -y, px, py, -t), fixed line {y = 0}
// The coordinate-time map is a symmetry only for even N.
enum class InvolutionKind { MomentumTime, CoordinateTime };

struct Involution {
  InvolutionKind kind = InvolutionKind::MomentumTime;

  State apply(const State& s) const;
  // Action on section coordinates.
  std::pair<double, double> apply_section(double y, double py) const;
  // Signed distance-like value that vanishes on the fixed line (py or y).
  double predicate(double y, double py) const;
  bool on_fixed_line(double y, double py, double tol = 0.0) const;
};

// Odd N: momentum-time. Even N: coordinate-time.
Involution involution_for(const SystemParams& p);

struct SymmetryLine {
  int index = 0;
  std::vector<std::pair<double, double>> points;  // (y, py), ordered along the line
  // Parameter of each point along the generating line (y or py on Gamma_0).
  std::vector<double> parameter;
  // One entry per dropped point.
  std::vector<std::string> log;
};

struct SymmetryOptions {
  std::size_t samples = 2000;
  double dt = 1e-3;
  double return_time_max = 60.0;  // longest allowed time between section crossings
  double root_tolerance = 1e-10;
  // Roots whose mapped predicate is not this small are bracketing artefacts.
  double root_residual_max = 1e-6;
  IntegrationOptions integration;
  std::size_t workers = 1;
};

// Poincare return map on x = 0, px > 0. Throws Error(NoReturn), Error(OffShell) or
// integrator errors.
std::pair<double, double> return_map(const SystemParams& p, double energy, double y, double py,
                                     const SymmetryOptions& options = {});

// Gamma_0 sampled at cell centres of its on-shell extent. E = 0 gives the single point
// (0, 0); Throws Error(EmptyLine) if nothing is on shell.
SymmetryLine gamma0(const SystemParams& p, double energy, const SymmetryOptions& options = {});

// Gamma_{index + 2 steps}: every point mapped `steps` times by T. Failing points are
// dropped and logged.
SymmetryLine advance_line(const SystemParams& p, double energy, const SymmetryLine& line,
                          int steps, const SymmetryOptions& options = {});

struct PeriodicIc {
  double y = 0.0;
  double py = 0.0;
  double px_lifted = 0.0;
  double energy = 0.0;
  int period_divisor = 2;
  double closure_error = 0.0;  // section distance between the IC and T^2 of it
};

// Gamma_0 ∩ Gamma_2. Throws Error(NoIntersections) if none are found.
std::vector<PeriodicIc> periodic_ics(const SystemParams& p, double energy,
                                     const SymmetryOptions& options = {});

struct Closure {
  double period = 0.0;
  double error = 0.0;  // full phase-space distance at the period
};

// First local minimum of |z(t) - z(0)| below 1e-3 with t <= max_period, refined by
// golden-section search. Throws Error(NotClosed).
Closure verify_periodic(const SystemParams& p, const State& ic, double max_period,
                        double dt = 1e-3, const IntegrationOptions& integration = {});

std::string symmetry_line_csv(const SymmetryLine& line);
nlohmann::json periodic_ics_json(const std::vector<PeriodicIc>& ics);

}  // namespace hhlab::symmetry
