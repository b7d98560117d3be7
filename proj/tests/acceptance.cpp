// Acceptance suite: one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "app.hpp"
#include "hhlab/catalog.hpp"
#include "hhlab/diagnostics.hpp"
#include "hhlab/error.hpp"
#include "hhlab/integrator.hpp"
#include "hhlab/parallel.hpp"
#include "hhlab/random.hpp"
#include "hhlab/sindy.hpp"
#include "hhlab/symmetry.hpp"
#include "hhlab/text.hpp"

using namespace hhlab;
namespace fs = std::filesystem;

namespace {

std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

SystemParams params(int n) {
  SystemParams p;
  p.order = n;
  return p;
}

SystemParams params_of(const CatalogEntry& e) { return params(e.order); }

// The regression cannot separate x^3, x^2 y, x y^2, y^3 on this orbit (it lies on a line
// through the origin), so coefficient-level criteria exclude it.
constexpr const char* kDegenerate = "n4-periodic-0.25";

struct Outcome {
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------------------

Outcome critical_energies() {
  const double e3 = critical_energy(params(3));
  const double e4 = critical_energy(params(4));
  return {e3 == 1.0 / 6.0 && e4 == 0.25, fmt("E_c(3) = %.17g, E_c(4) = %.17g", e3, e4)};
}

Outcome gradients() {
  const CounterRng rng(2024);
  double hand = 0.0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    const double x = rng.uniform(2 * k, -1.5, 1.5);
    const double y = rng.uniform(2 * k + 1, -1.5, 1.5);
    const auto [a, b] = grad_potential(params(3), x, y);
    hand = std::max({hand, std::abs(a - (x + 2 * x * y)), std::abs(b - (y + x * x - y * y))});
    const auto [c, d] = grad_potential(params(4), x, y);
    hand = std::max({hand, std::abs(c - (x + 3 * x * x * y - y * y * y)),
                     std::abs(d - (y + x * x * x - 3 * x * y * y))});
    const auto [e, f] = grad_potential(params(5), x, y);
    hand = std::max({hand, std::abs(e - (x + 4 * x * x * x * y - 4 * x * y * y * y)),
                     std::abs(f - (y + x * x * x * x - 6 * x * x * y * y + y * y * y * y))});
  }
  double fd = 0.0;
  const double h = 1e-5;
  for (int n = 1; n <= 6; ++n) {
    const SystemParams p = params(n);
    for (std::uint64_t k = 0; k < 100; ++k) {
      const double x = rng.uniform(1000 + 2 * k, -0.8, 0.8);
      const double y = rng.uniform(1001 + 2 * k, -0.8, 0.8);
      const auto [gx, gy] = grad_potential(p, x, y);
      fd = std::max(fd, std::abs(gx - (potential(p, x + h, y) - potential(p, x - h, y)) / (2 * h)));
      fd = std::max(fd, std::abs(gy - (potential(p, x, y + h) - potential(p, x, y - h)) / (2 * h)));
    }
  }
  return {hand < 1e-12 && fd < 1e-6,
          fmt("max |grad - hand-coded| = %.2e (< 1e-12), max |grad - FD| = %.2e (< 1e-6)", hand, fd)};
}

double round_trip(const SystemParams& p, const State& s0, double t, bool coordinates) {
  auto flip = [&](const State& s) {
    return coordinates ? State{0, -s.x, -s.y, s.px, s.py} : State{0, s.x, s.y, -s.px, -s.py};
  };
  const State a = integrate(p, s0, t, 1e-3).states.back();
  const State b = flip(integrate(p, flip(a), t, 1e-3).states.back());
  return std::max({std::abs(b.x - s0.x), std::abs(b.y - s0.y), std::abs(b.px - s0.px),
                   std::abs(b.py - s0.py)});
}

Outcome conservation() {
  const auto& ics = list_paper_ics();
  std::vector<double> drift(ics.size()), flip(ics.size()), coord(ics.size(), 0.0);
  std::vector<std::string> failure(ics.size());
  parallel_for(ics.size(), default_workers(), [&](std::size_t i) {
    const SystemParams p = params_of(ics[i]);
    const double e0 = total_energy(p, ics[i].state);
    double worst = 0.0;
    try {
      propagate(p, ics[i].state, 7000.0, 1e-3, {}, [&](const State& s) {
        worst = std::max(worst, std::abs(total_energy(p, s) - e0));
        return true;
      });
      drift[i] = worst / std::max(std::abs(e0), 1e-12);
      flip[i] = round_trip(p, ics[i].state, 100.0, false);
      if (ics[i].order == 4) coord[i] = round_trip(p, ics[i].state, 100.0, true);
    } catch (const Error& e) {
      failure[i] = ics[i].key + ": " + e.what();
      drift[i] = INFINITY;
    }
  });
  const double d = *std::max_element(drift.begin(), drift.end());
  const double f = *std::max_element(flip.begin(), flip.end());
  const double c = *std::max_element(coord.begin(), coord.end());
  std::string err;
  for (const auto& s : failure)
    if (!s.empty()) err += " [" + s + "]";
  return {d < 1e-6 && f < 1e-6 && c < 1e-6,
          fmt("9 ICs: max relative energy drift %.2e over t=7000 (< 1e-6), momentum-flip round trip "
              "%.2e, N=4 coordinate-flip round trip %.2e (< 1e-6)",
              d, f, c) + err};
}

Outcome integrable_baseline() {
  // Invariants are taken about the potential minimum (0, -1/(m w^2)).
  const SystemParams p = params(1);
  const std::vector<State> starts = {{0, 0.3, -0.8, 0.2, 0.5}, {0, -0.5, -1.4, 0.6, -0.1},
                                     {0, 0.1, 0.4, -0.7, 0.3}};
  double inv = 0.0;
  double lambda = 0.0;
  for (const State& s0 : starts) {
    auto lz = [](const State& s) { return s.x * s.py - (s.y + 1.0) * s.px; };
    auto sxy = [](const State& s) { return s.px * s.py + s.x * (s.y + 1.0); };
    const double l0 = lz(s0);
    const double q0 = sxy(s0);
    propagate(p, s0, 1000.0, 1e-3, {}, [&](const State& s) {
      inv = std::max(inv, std::abs(lz(s) - l0) / std::max(std::abs(l0), 1e-12));
      inv = std::max(inv, std::abs(sxy(s) - q0) / std::max(std::abs(q0), 1e-12));
      return true;
    });
    lambda = std::max(lambda, diagnostics::largest_lyapunov(p, s0, 1000.0, 1e-3).lambda);
  }
  return {inv < 1e-6 && lambda < 5e-3,
          fmt("N=1: max relative drift of L_z, S_xy %.2e (< 1e-6), max lambda %.2e (< 5e-3)", inv, lambda)};
}

Outcome lyapunov_discrimination() {
  const SystemParams p = params(3);
  double lp = 0.0;
  double lc = 0.0;
  parallel_for(2, default_workers(), [&](std::size_t i) {
    const auto& e = find_paper_ic(i == 0 ? "n3-periodic-0.25" : "n3-chaotic-0.99");
    (i == 0 ? lp : lc) = diagnostics::largest_lyapunov(p, e.state, 7000.0, 1e-3).lambda;
  });
  return {lp < 1e-2 && lc > 0.01 && lc > 3 * lp,
          fmt("lambda(periodic, E_c/4) = %.4g (< 1e-2), lambda(chaotic, 0.99 E_c) = %.4g (> 0.01 and > 3x)",
              lp, lc)};
}

// Largest 4-connected component of cells satisfying `pick`.
std::vector<std::size_t> components(const diagnostics::LyapunovMap& map,
                                    const std::function<bool(double)>& pick) {
  const std::size_t ny = map.grid.ny;
  const std::size_t npy = map.grid.npy;
  std::vector<char> seen(ny * npy, 0);
  auto ok = [&](std::size_t c) {
    return map.status[c] == diagnostics::CellStatus::Ok && pick(map.values[c]);
  };
  std::vector<std::size_t> sizes;
  for (std::size_t start = 0; start < ny * npy; ++start) {
    if (seen[start] || !ok(start)) continue;
    std::size_t size = 0;
    std::vector<std::size_t> stack = {start};
    seen[start] = 1;
    while (!stack.empty()) {
      const std::size_t c = stack.back();
      stack.pop_back();
      ++size;
      const std::size_t i = c / npy;
      const std::size_t j = c % npy;
      std::vector<std::size_t> next;
      if (i > 0) next.push_back(c - npy);
      if (i + 1 < ny) next.push_back(c + npy);
      if (j > 0) next.push_back(c - 1);
      if (j + 1 < npy) next.push_back(c + 1);
      for (std::size_t q : next)
        if (!seen[q] && ok(q)) {
          seen[q] = 1;
          stack.push_back(q);
        }
    }
    sizes.push_back(size);
  }
  std::sort(sizes.rbegin(), sizes.rend());
  return sizes;
}

Outcome lyapunov_maps() {
  // Thresholds frozen from a calibration run of both maps (t = 1000, dt = 0.01): every
  // on-shell cell at E_c/4 stays below 0.0065; at 0.99 E_c the median is 0.126.
  constexpr double kLow = 0.02;
  constexpr double kHigh = 0.05;
  const SystemParams p = params(3);
  auto run_map = [&](double fraction) {
    const double e = fraction * critical_energy(p);
    return diagnostics::lyapunov_map(p, e, diagnostics::section_bounds(p, e, 50, 50), 1000.0, 1e-2, {},
                                     default_workers());
  };
  const auto low = run_map(0.25);
  std::size_t on = 0;
  std::size_t calm = 0;
  for (std::size_t c = 0; c < low.values.size(); ++c)
    if (low.status[c] == diagnostics::CellStatus::Ok) {
      ++on;
      calm += low.values[c] < kLow;
    }
  const double calm_fraction = on ? static_cast<double>(calm) / on : 0.0;

  const auto high = run_map(0.99);
  std::size_t on_high = 0;
  for (auto s : high.status) on_high += s == diagnostics::CellStatus::Ok;
  const auto chaotic = components(high, [](double v) { return v > kHigh; });
  const auto islands = components(high, [](double v) { return v < kLow; });
  const double sea = chaotic.empty() ? 0.0 : static_cast<double>(chaotic.front()) / on_high;
  const std::size_t big_islands =
      std::count_if(islands.begin(), islands.end(), [](std::size_t s) { return s >= 4; });
  return {calm_fraction >= 0.95 && sea >= 0.5 && big_islands >= 1,
          fmt("E_c/4: %.1f%% of %zu cells with lambda < %.2g (>= 95%%); 0.99 E_c: connected lambda > %.2g "
              "region covers %.1f%% (>= 50%%), %zu low-lambda islands of >= 4 cells (>= 1)",
              100 * calm_fraction, on, kLow, kHigh, 100 * sea, big_islands)};
}

Outcome symmetric_orbits() {
  struct Target {
    int n;
    double y;
    double py;
  };
  const std::vector<Target> targets = {{3, -0.21341508, 0.0}, {4, 0.0, 0.13523834}};
  bool pass = true;
  std::string detail;
  for (const auto& t : targets) {
    const SystemParams p = params(t.n);
    const double e = critical_energy(p) / 4;
    symmetry::SymmetryOptions o;
    o.workers = default_workers();
    const auto ics = symmetry::periodic_ics(p, e, o);
    double best = INFINITY;
    const symmetry::PeriodicIc* hit = nullptr;
    for (const auto& ic : ics) {
      const double d = std::hypot(ic.y - t.y, ic.py - t.py);
      if (d < best) {
        best = d;
        hit = &ic;
      }
    }
    double closure = INFINITY;
    double period = 0.0;
    if (hit) {
      try {
        const auto c = symmetry::verify_periodic(p, {0, 0.0, hit->y, hit->px_lifted, hit->py}, 40.0);
        closure = c.error;
        period = c.period;
      } catch (const Error&) {
      }
    }
    pass = pass && best < 1e-3 && closure < 1e-4;
    detail += fmt("N=%d: %zu orbits, nearest (%.8f, %.8f) at distance %.2e (< 1e-3), closes at T=%.4f "
                  "with error %.2e (< 1e-4); ",
                  t.n, ics.size(), hit ? hit->y : NAN, hit ? hit->py : NAN, best, period, closure);
  }
  detail.resize(detail.size() - 2);
  return {pass, detail};
}

// Exact right-hand sides regressed on the library evaluated along the orbit.
sindy::SparseModel exact_derivative_fit(const SystemParams& p, const State& ic) {
  const auto exact = sindy::exact_model(p, p.order);
  const std::size_t m = exact.library.size();
  sindy::RegressionAccumulator acc(m, 4);
  std::vector<double> row(m);
  propagate(p, ic, 150.0, 1e-3, {}, [&](const State& s) {
    const Vec4 z = to_vec(s);
    const Vec4 f = rhs(p, z);
    exact.library.evaluate(z, row.data());
    acc.add_row(row.data(), f.data());
    return true;
  });
  sindy::SparseModel model;
  model.library = exact.library;
  model.xi = sindy::stlsq(acc.finish()).xi;
  model.threshold = sindy::StlsqOptions{}.threshold;
  return model;
}

Outcome exact_derivative_oracle() {
  const auto& ics = list_paper_ics();
  std::vector<double> err(ics.size());
  std::vector<bool> clean(ics.size());
  parallel_for(ics.size(), default_workers(), [&](std::size_t i) {
    const SystemParams p = params_of(ics[i]);
    const auto fit = exact_derivative_fit(p, ics[i].state);
    const auto exact = sindy::exact_model(p, p.order);
    const auto diff = sindy::model_diff(fit, exact);
    clean[i] = diff.clean();
    err[i] = (fit.xi - exact.xi).cwiseAbs().maxCoeff();
  });
  bool pass = true;
  double worst = 0.0;
  std::string excluded;
  for (std::size_t i = 0; i < ics.size(); ++i) {
    if (ics[i].key == kDegenerate) {
      excluded = fmt("excluded %s (orbit on a line; measured error %.3g, support %s)", kDegenerate, err[i],
                     clean[i] ? "exact" : "spurious");
      continue;
    }
    pass = pass && clean[i] && err[i] < 1e-8;
    worst = std::max(worst, err[i]);
  }
  return {pass, fmt("8 ICs: max |C_fit - C_exact| = %.2e (< 1e-8), exact support; ", worst) + excluded};
}

Outcome convergence() {
  const std::vector<double> dts = {1e-4, 3e-4, 1e-3, 3e-3, 1e-2};
  const auto& ics = list_paper_ics();
  std::vector<std::vector<double>> dc(ics.size(), std::vector<double>(dts.size()));
  std::vector<bool> clean(ics.size());
  parallel_for(ics.size() * dts.size(), default_workers(), [&](std::size_t job) {
    const std::size_t i = job / dts.size();
    const std::size_t k = job % dts.size();
    if (ics[i].key == kDegenerate) return;
    const SystemParams p = params_of(ics[i]);
    const auto model = sindy::reconstruct_from_ic(p, ics[i].state, dts[k], p.order);
    const auto diff = sindy::model_diff(model, sindy::exact_model(p, p.order));
    dc[i][k] = diff.max_abs_delta_c();
    if (k == 0) clean[i] = diff.clean();
  });
  bool pass = true;
  double worst = 0.0;
  std::string lines;
  for (std::size_t i = 0; i < ics.size(); ++i) {
    if (ics[i].key == kDegenerate) continue;
    bool monotone = true;
    for (std::size_t k = 1; k < dts.size(); ++k) monotone = monotone && dc[i][k] >= 0.9 * dc[i][k - 1];
    pass = pass && clean[i] && dc[i][0] < 1e-2 && monotone;
    worst = std::max(worst, dc[i][0]);
    if (!clean[i] || !monotone) lines += " [" + ics[i].key + (clean[i] ? " not monotone]" : " spurious]");
  }
  return {pass, fmt("8 ICs at dt=1e-4: exact support, max |dC| = %.2e (< 1e-2); dC monotone over dt in "
                    "{1e-4..1e-2} within 10%%; excluded %s (extra terms persist at every dt)",
                    worst, kDegenerate) + lines};
}

Outcome critical_steps() {
  struct Case {
    const char* key;
    double reference;
  };
  const std::vector<Case> cases = {
      {"n3-periodic-0.75", 0.01925}, {"n3-quasi-0.75", 0.02726}, {"n3-chaotic-0.75", 0.13303}};
  sindy::DtcOptions o;
  o.workers = default_workers();
  std::vector<double> dtc;
  bool bands = true;
  std::string detail;
  for (const auto& c : cases) {
    const auto& e = find_paper_ic(c.key);
    double v = NAN;
    try {
      v = sindy::find_dtc(params_of(e), e.state, o).dt_c;
    } catch (const Error&) {
    }
    dtc.push_back(v);
    const bool within = std::abs(v - c.reference) <= 0.5 * c.reference;
    bands = bands && within;
    detail += fmt("%s %.5f (reference %.5f, %+.0f%%), ", c.key, v, c.reference, 100 * (v - c.reference) / c.reference);
  }
  const bool ordered = dtc[0] < dtc[1] && dtc[1] < dtc[2];
  const auto& n4 = find_paper_ic("n4-periodic-0.25");
  bool zero = false;
  try {
    zero = sindy::find_dtc(params_of(n4), n4.state, o).zero;
  } catch (const Error&) {
  }
  detail += fmt("ordered %s, within +-50%% %s; N=4 periodic zero sentinel %s", ordered ? "yes" : "no",
                bands ? "yes" : "no", zero ? "yes" : "no");
  return {ordered && bands && zero, detail};
}

Outcome relation() {
  const auto& e = find_paper_ic(kDegenerate);
  const SystemParams p = params_of(e);
  const auto model = sindy::reconstruct_from_ic(p, e.state, 2e-5, 4);
  const auto exact = sindy::exact_model(p, 4);
  const auto diff = sindy::model_diff(model, exact);
  const auto tr = integrate(p, e.state, 150.0, 1e-3);
  double extra = 0.0;
  for (const Vec4& v : sindy::extra_term_series(model, exact, tr)) extra = std::max(extra, v.cwiseAbs().maxCoeff());
  double slope = NAN;
  double fitted = NAN;
  try {
    const auto rel = sindy::periodic_relation(diff, tr);
    slope = rel.slope;
    fitted = rel.fitted_slope;
  } catch (const Error&) {
  }
  return {diff.count(sindy::TermFlag::Extra) > 0 && extra < 1e-6 && std::abs(slope - 0.41) <= 0.02,
          fmt("%zu extra terms, max |S_extra| along the orbit %.2e (< 1e-6), slope %.5f (0.41 +- 0.02), "
              "trajectory fit %.5f",
              diff.count(sindy::TermFlag::Extra), extra, slope, fitted)};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "hhlab_acceptance_determinism";
  fs::remove_all(root);
  std::vector<app::ExperimentConfig> configs;
  {
    app::ExperimentConfig c;
    c.task = "poincare";
    c.params.order = 4;
    c.energy_frac = 0.99;
    c.grid = "70-random";
    c.seed = 7;
    c.t_end = 1000.0;
    c.dt = 1e-2;
    configs.push_back(c);
    c.task = "lyapmap";
    c.params.order = 3;
    c.grid = "30-random";
    c.t_end = 200.0;
    configs.push_back(c);
    c = {};
    c.task = "dtc-scan";
    c.ic_keys = {"n3-quasi-0.75"};
    configs.push_back(c);
    c = {};
    c.task = "simulate";
    c.ic_keys = {"paper"};
    c.t_end = 100.0;
    c.dt = 1e-2;
    configs.push_back(c);
  }
  std::size_t compared = 0;
  std::string mismatch;
  for (std::size_t k = 0; k < configs.size(); ++k) {
    std::vector<fs::path> dirs;
    for (std::size_t workers : {std::size_t{1}, default_workers() + 1}) {
      auto c = configs[k];
      c.workers = workers;
      c.out = root / (std::to_string(k) + "_" + std::to_string(workers));
      std::ostringstream out;
      std::ostringstream err;
      if (app::run(c, out, err) != app::kExitOk) mismatch += " [" + c.task + " failed: " + err.str() + "]";
      dirs.push_back(c.out);
    }
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      const auto name = entry.path().filename();
      if (name == "manifest.json") continue;
      ++compared;
      if (!fs::exists(dirs[1] / name) || read_text_file(entry.path()) != read_text_file(dirs[1] / name))
        mismatch += " [" + configs[k].task + "/" + name.string() + "]";
    }
  }
  fs::remove_all(root);
  return {mismatch.empty() && compared > 0,
          fmt("%zu data files from 4 tasks byte-identical across reruns with different worker counts",
              compared) + mismatch};
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, critical_energies},     {2, gradients},           {3, conservation},
      {4, integrable_baseline},   {5, lyapunov_discrimination}, {6, lyapunov_maps},
      {7, symmetric_orbits},      {8, exact_derivative_oracle}, {9, convergence},
      {10, critical_steps},       {11, relation},           {12, determinism},
  };
  int failed = 0;
  for (const auto& [id, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %2d: %s  %s (%.1f s)\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
