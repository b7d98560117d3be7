#include <benchmark/benchmark.h>

#include "hhlab/diagnostics.hpp"
#include "hhlab/integrator.hpp"
#include "hhlab/random.hpp"
#include "hhlab/sindy.hpp"

using namespace hhlab;

namespace {

SystemParams params(int n) {
  SystemParams p;
  p.order = n;
  return p;
}

const State kChaotic{0, 0, 0.1, 0.520545, 0.23};

void BM_Rk4Step(benchmark::State& state) {
  const SystemParams p = params(static_cast<int>(state.range(0)));
  Vec4 z = to_vec(kChaotic);
  for (auto _ : state) {
    z = rk4_step(p, z, 1e-3);
    benchmark::DoNotOptimize(z);
  }
}
BENCHMARK(BM_Rk4Step)->Arg(3)->Arg(4)->Arg(6);

void BM_Propagate(benchmark::State& state) {
  const SystemParams p = params(3);
  for (auto _ : state) {
    double sum = 0.0;
    propagate(p, kChaotic, 100.0, 1e-3, {}, [&](const State& s) {
      sum += s.y;
      return true;
    });
    benchmark::DoNotOptimize(sum);
  }
  state.SetItemsProcessed(state.iterations() * 100000);
}
BENCHMARK(BM_Propagate)->Unit(benchmark::kMillisecond);

void BM_Lyapunov(benchmark::State& state) {
  const SystemParams p = params(3);
  for (auto _ : state)
    benchmark::DoNotOptimize(diagnostics::largest_lyapunov(p, kChaotic, 100.0, 1e-2).lambda);
}
BENCHMARK(BM_Lyapunov)->Unit(benchmark::kMillisecond);

void BM_Section(benchmark::State& state) {
  const SystemParams p = params(3);
  for (auto _ : state)
    benchmark::DoNotOptimize(diagnostics::section_crossings(p, kChaotic, 200.0, 1e-2).size());
}
BENCHMARK(BM_Section)->Unit(benchmark::kMillisecond);

void BM_LibraryEvaluate(benchmark::State& state) {
  const auto lib = sindy::build_library(static_cast<int>(state.range(0)));
  std::vector<double> row(lib.size());
  const Vec4 z = to_vec(kChaotic);
  for (auto _ : state) {
    lib.evaluate(z, row.data());
    benchmark::DoNotOptimize(row.data());
  }
}
BENCHMARK(BM_LibraryEvaluate)->Arg(3)->Arg(4);

void BM_Accumulate(benchmark::State& state) {
  const auto lib = sindy::build_library(4);
  const CounterRng rng(1);
  std::vector<double> row(lib.size());
  std::vector<double> target(4);
  for (auto _ : state) {
    sindy::RegressionAccumulator acc(lib.size(), 4);
    for (std::uint64_t k = 0; k < 20000; ++k) {
      const Vec4 z(rng.uniform(4 * k), rng.uniform(4 * k + 1), rng.uniform(4 * k + 2), rng.uniform(4 * k + 3));
      lib.evaluate(z, row.data());
      for (int c = 0; c < 4; ++c) target[c] = z[c];
      acc.add_row(row.data(), target.data());
    }
    benchmark::DoNotOptimize(acc.finish().r.data());
  }
  state.SetItemsProcessed(state.iterations() * 20000);
}
BENCHMARK(BM_Accumulate)->Unit(benchmark::kMillisecond);

void BM_Stlsq(benchmark::State& state) {
  const SystemParams p = params(3);
  const auto tr = integrate(p, kChaotic, 150.0, 1e-2);
  const auto data = sindy::estimate_derivatives(tr);
  const auto lib = sindy::build_library(3);
  const Eigen::MatrixXd theta = sindy::evaluate_library(lib, data.states);
  Eigen::MatrixXd b(static_cast<Eigen::Index>(data.derivatives.size()), 4);
  for (std::size_t k = 0; k < data.derivatives.size(); ++k) b.row(static_cast<Eigen::Index>(k)) = data.derivatives[k].transpose();
  const auto reduced = sindy::reduce(theta, b);
  for (auto _ : state) benchmark::DoNotOptimize(sindy::stlsq(reduced).xi.data());
}
BENCHMARK(BM_Stlsq)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
