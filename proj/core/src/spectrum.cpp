#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <fftw3.h>

#include "hhlab/diagnostics.hpp"
#include "hhlab/error.hpp"

namespace hhlab::diagnostics {
namespace {

struct Peak {
  double bin = 0.0;  // interpolated bin position
  double power = 0.0;
};

std::vector<double> power_spectrum(std::span<const double> series) {
  const std::size_t n = series.size();
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(n);

  // 4-term Blackman-Harris window.
  constexpr double a0 = 0.35875, a1 = 0.48829, a2 = 0.14128, a3 = 0.01168;
  const double w = 2.0 * std::numbers::pi / static_cast<double>(n - 1);
  std::vector<double> in(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double x = w * static_cast<double>(k);
    const double win = a0 - a1 * std::cos(x) + a2 * std::cos(2 * x) - a3 * std::cos(3 * x);
    in[k] = (series[k] - mean) * win;
  }
  const std::size_t bins = n / 2 + 1;
  fftw_complex* out = fftw_alloc_complex(bins);
  fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(), out, FFTW_ESTIMATE);
  fftw_execute(plan);
  std::vector<double> power(bins);
  for (std::size_t k = 0; k < bins; ++k) power[k] = out[k][0] * out[k][0] + out[k][1] * out[k][1];
  fftw_destroy_plan(plan);
  fftw_free(out);
  return power;
}

// Refits f0 to the harmonic numbers assigned so far (lowest peaks first), then checks
// every peak. Returns the refined fundamental in bins, or 0 if some peak is off-comb.
double harmonic_fit(std::vector<Peak> peaks, double f0, double tol) {
  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.bin < b.bin; });
  double shf = 0.0;
  double shh = 0.0;
  for (const Peak& pk : peaks) {
    const double h = std::round(pk.bin / f0);
    if (h < 1.0 || std::abs(pk.bin - h * f0) > tol) return 0.0;
    shf += h * pk.bin;
    shh += h * h;
    f0 = shf / shh;
  }
  return f0;
}

}  // namespace

std::string_view to_string(SpectrumClass c) noexcept {
  switch (c) {
    case SpectrumClass::Periodic: return "periodic";
    case SpectrumClass::QuasiPeriodic: return "quasi_periodic";
    case SpectrumClass::Broadband: return "broadband";
  }
  return "unknown";
}

SpectrumReport classify_series(std::span<const double> series, double dt,
                               const SpectrumOptions& options) {
  if (series.size() < 1024)
    throw Error(ErrorKind::TooShort, "spectrum needs at least 1024 samples");
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "spectrum: dt must be positive");
  std::size_t n = 1024;
  while (2 * n <= series.size()) n *= 2;
  const auto power = power_spectrum(series.first(n));

  SpectrumReport report;
  report.samples = n;
  const double pmax = *std::max_element(power.begin() + 1, power.end());
  if (!(pmax > 0.0)) {
    report.classification = SpectrumClass::Periodic;
    return report;
  }
  const double threshold = options.relative_threshold * pmax;

  std::vector<Peak> peaks;
  std::size_t above = 0;
  std::size_t band = 1;  // highest bin above threshold
  for (std::size_t k = 1; k < power.size(); ++k) {
    if (power[k] > threshold) {
      ++above;
      band = k;
    }
    if (k + 1 < power.size() && power[k] > threshold && power[k] >= power[k - 1] &&
        power[k] > power[k + 1]) {
      // Parabolic interpolation of log power around the local maximum.
      const double l = std::log(std::max(power[k - 1], 1e-300));
      const double c = std::log(power[k]);
      const double r = std::log(std::max(power[k + 1], 1e-300));
      const double denom = l - 2 * c + r;
      const double shift = denom != 0.0 ? 0.5 * (l - r) / denom : 0.0;
      peaks.push_back({static_cast<double>(k) + std::clamp(shift, -0.5, 0.5), power[k]});
    }
  }
  report.occupancy = static_cast<double>(above) / static_cast<double>(band);
  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.power > b.power; });
  const double df = 1.0 / (static_cast<double>(n) * dt);
  for (const Peak& pk : peaks) report.peak_frequencies.push_back(pk.bin * df);

  if (peaks.size() > options.max_peaks || report.occupancy > options.max_occupancy) {
    report.classification = SpectrumClass::Broadband;
    return report;
  }
  double lowest = peaks.front().bin;
  for (const Peak& pk : peaks) lowest = std::min(lowest, pk.bin);
  // The fundamental may be missing from y(t) (e.g. only even harmonics survive).
  for (int d = 1; d <= 2; ++d) {
    if (lowest / d < 2.0) break;
    const double f0 = harmonic_fit(peaks, lowest / d, options.harmonic_tolerance_bins);
    if (f0 > 0.0) {
      report.classification = SpectrumClass::Periodic;
      report.fundamental = f0 * df;
      return report;
    }
  }
  report.classification = SpectrumClass::QuasiPeriodic;
  return report;
}

SpectrumReport classify_spectrum(const Trajectory& trajectory, const SpectrumOptions& options) {
  std::vector<double> y(trajectory.size());
  for (std::size_t k = 0; k < y.size(); ++k) y[k] = trajectory[k].y;
  return classify_series(y, trajectory.dt, options);
}

}  // namespace hhlab::diagnostics
