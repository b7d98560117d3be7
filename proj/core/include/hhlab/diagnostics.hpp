#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hhlab/integrator.hpp"

namespace hhlab::diagnostics {

// ---------------------------------------------------------------------------
// Oriented Poincare sections on x = 0, plotted in (y, py).
// ---------------------------------------------------------------------------

struct SectionPoint {
  double y = 0.0;
  double py = 0.0;
  double t = 0.0;
  double px = 0.0;  // reconstructed on the energy shell, sign fixed by the orientation
};

struct SectionOptions {
  // +1 accepts crossings with px > 0 (x increasing), -1 the opposite direction.
  int orientation = +1;
  // Accepted crossings satisfy |x| < x_tolerance after refinement.
  double x_tolerance = 1e-10;
  IntegrationOptions integration;
  std::size_t workers = 1;
};

enum class OrbitStatus { Ok, NoCrossings, Unbounded, NonFinite };
std::string_view to_string(OrbitStatus s) noexcept;

struct OrbitSection {
  std::size_t orbit_id = 0;
  State initial;
  double energy = 0.0;
  OrbitStatus status = OrbitStatus::Ok;
  std::string message;
  std::vector<SectionPoint> points;
};

struct SectionSet {
  SystemParams params;
  double energy = 0.0;
  std::vector<OrbitSection> orbits;
};

// Full state at a refined crossing of x = 0.
struct Crossing {
  State state;
  double residual = 0.0;  // |x| after refinement
};

// Refines a bracketed crossing between consecutive samples `before` and `after`
// (dt apart) by re-integrating from `before`: Hermite guess, then safeguarded
// bisection/secant in time.
Crossing refine_crossing(const SystemParams& p, const State& before, const State& after,
                         double dt, int substeps);

// Whether consecutive samples bracket an x = 0 crossing in the given direction.
bool brackets_crossing(const State& before, const State& after, int orientation);

// First oriented crossing strictly after `start`, or nullopt if none before t_max.
// Throws Error(Unbounded/NonFinite) from the integrator.
std::optional<Crossing> next_crossing(const SystemParams& p, const State& start, double t_max,
                                      double dt, const SectionOptions& options = {});

// Every oriented crossing of one orbit up to t_max. Throws on integration errors.
std::vector<SectionPoint> section_crossings(const SystemParams& p, const State& start,
                                            double t_max, double dt,
                                            const SectionOptions& options = {});

// Per-orbit failures are recorded in OrbitSection::status instead of thrown.
SectionSet poincare_section(const SystemParams& p, std::span<const State> initial_states,
                            double t_max, double dt, const SectionOptions& options = {});

// ---------------------------------------------------------------------------
// Largest Lyapunov exponent (tangent-vector renormalization along Phi' = J Phi).
// ---------------------------------------------------------------------------

struct LyapunovOptions {
  double renorm_interval = 1.0;
  Vec4 initial_direction = Vec4::Constant(0.5);
  IntegrationOptions integration;
};

struct LyapunovSample {
  double t = 0.0;
  double lambda = 0.0;
};

struct LyapunovResult {
  double lambda = 0.0;
  std::vector<LyapunovSample> history;  // running estimate after each renormalization
  double t_total = 0.0;
};

LyapunovResult largest_lyapunov(const SystemParams& p, const State& start, double t_total,
                                double dt, const LyapunovOptions& options = {});

// ---------------------------------------------------------------------------
// Energy-slice Lyapunov maps over the (y, py) section plane.
// ---------------------------------------------------------------------------

// Cell-centred grid: y_i = y_min + (i + 1/2)(y_max - y_min)/ny, likewise for py.
struct GridSpec {
  double y_min = -1.0;
  double y_max = 1.0;
  double py_min = -1.0;
  double py_max = 1.0;
  std::size_t ny = 50;
  std::size_t npy = 50;

  std::size_t cells() const { return ny * npy; }
  double y_at(std::size_t i) const;
  double py_at(std::size_t j) const;
};

enum class CellStatus { Ok, OffShell, Escaped, NonFinite };
std::string_view to_string(CellStatus s) noexcept;

struct LyapunovMap {
  SystemParams params;
  double energy = 0.0;
  GridSpec grid;
  double t_total = 0.0;
  // Index i * npy + j for (y_i, py_j). Off-shell or failed cells hold NaN.
  std::vector<double> values;
  std::vector<CellStatus> status;

  std::size_t index(std::size_t i, std::size_t j) const { return i * grid.npy + j; }
};

// Smallest box containing the accessible part of the x = 0 section at this energy.
GridSpec section_bounds(const SystemParams& p, double energy, std::size_t ny, std::size_t npy);

// Section initial condition (x = 0, px lifted with the given sign). Throws OffShell.
State lift_section_point(const SystemParams& p, double energy, double y, double py,
                         int sign = +1);

LyapunovMap lyapunov_map(const SystemParams& p, double energy, const GridSpec& grid,
                         double t_total, double dt, const LyapunovOptions& options = {},
                         std::size_t workers = 1);

struct ScatterPoint {
  double y = 0.0;
  double py = 0.0;
  double lambda = 0.0;
  CellStatus status = CellStatus::Ok;
};

// `count` on-shell section points drawn uniformly (rejection sampling inside `box`)
// from a counter-based stream of `seed`.
std::vector<std::pair<double, double>> random_section_points(const SystemParams& p,
                                                             double energy, const GridSpec& box,
                                                             std::size_t count,
                                                             std::uint64_t seed);

std::vector<ScatterPoint> lyapunov_scatter(const SystemParams& p, double energy,
                                           std::span<const std::pair<double, double>> points,
                                           double t_total, double dt,
                                           const LyapunovOptions& options = {},
                                           std::size_t workers = 1);

// ---------------------------------------------------------------------------
// Spectral classification of y(t).
// ---------------------------------------------------------------------------

enum class SpectrumClass { Periodic, QuasiPeriodic, Broadband };
std::string_view to_string(SpectrumClass c) noexcept;

struct SpectrumOptions {
  // Peaks count when their power exceeds this fraction of the strongest peak.
  double relative_threshold = 1e-3;
  // More significant peaks than this, or more than `max_occupancy` of all bins above
  // threshold, reads as a continuum.
  std::size_t max_peaks = 60;
  double max_occupancy = 0.2;
  // Harmonic test tolerance, in frequency bins.
  double harmonic_tolerance_bins = 1.5;
};

struct SpectrumReport {
  SpectrumClass classification = SpectrumClass::Periodic;
  std::size_t samples = 0;               // power-of-two prefix actually analysed
  double fundamental = 0.0;              // cycles per unit time (periodic only)
  std::vector<double> peak_frequencies;  // cycles per unit time, strongest first
  double occupancy = 0.0;                // fraction of bins above threshold
};

// Throws Error(TooShort) below 1024 samples.
SpectrumReport classify_spectrum(const Trajectory& trajectory, const SpectrumOptions& options = {});
SpectrumReport classify_series(std::span<const double> series, double dt,
                               const SpectrumOptions& options = {});

}  // namespace hhlab::diagnostics
