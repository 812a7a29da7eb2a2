// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <omp.h>

#include "vibra/ensembles.hpp"
#include "vibra/farm.hpp"
#include "vibra/freeprob.hpp"
#include "vibra/histogram.hpp"
#include "vibra/linalg.hpp"

using namespace vibra;

namespace {

struct HistAcc {
  SpectralHistogram h{0.0, 6.0, 256, Axis::OmegaSq};
  void merge(const HistAcc& o) { h.merge(o.h); }
};

void sample_spectrum(HistAcc& acc, std::uint64_t i, Eigen::Index n) {
  RngStream s = derive_stream(7, i);
  const EnsembleSpec spec{n, 1.0, 1.0, 1.0, Field::Complex, 7};
  acc.h.add(solve_omega_sq(build_wishart_pencil<Complex>(spec, s)));
}

void BM_FarmSerial(benchmark::State& st) {
  const auto n = st.range(0);
  for (auto _ : st) {
    auto acc = farm_serial<HistAcc>(32, [] { return HistAcc{}; }, [&](HistAcc& a, std::uint64_t i) { sample_spectrum(a, i, n); });
    benchmark::DoNotOptimize(acc.h.n_events());
  }
}

void BM_FarmParallel(benchmark::State& st) {
  const auto n = st.range(0);
  const int workers = omp_get_max_threads();
  for (auto _ : st) {
    auto acc = farm<HistAcc>(32, workers, [] { return HistAcc{}; }, [&](HistAcc& a, std::uint64_t i) { sample_spectrum(a, i, n); });
    benchmark::DoNotOptimize(acc.h.n_events());
  }
  st.counters["workers"] = workers;
}

std::vector<double> density_grid(double mu, std::size_t points) {
  const double x1 = support_endpoint(mu);
  std::vector<double> xs(points);
  for (std::size_t i = 0; i < points; ++i) xs[i] = x1 * (static_cast<double>(i) + 0.5) / static_cast<double>(points);
  return xs;
}

void BM_DensityGridSerial(benchmark::State& st) {
  const auto xs = density_grid(0.5, static_cast<std::size_t>(st.range(0)));
  std::vector<double> out(xs.size());
  for (auto _ : st) {
    analytic_density_grid_serial(0.5, xs, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_DensityGridParallel(benchmark::State& st) {
  const auto xs = density_grid(0.5, static_cast<std::size_t>(st.range(0)));
  std::vector<double> out(xs.size());
  for (auto _ : st) {
    analytic_density_grid(0.5, xs, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_PendulumReference(benchmark::State& st) {
  RngStream s = derive_stream(3, 0);
  const auto pp = sample_disordered_pendulum(static_cast<std::size_t>(st.range(0)), 1.0, 1.0, s);
  for (auto _ : st) benchmark::DoNotOptimize(build_pendulum_reference(pp).stiffness.data());
}

void BM_PendulumFast(benchmark::State& st) {
  RngStream s = derive_stream(3, 0);
  const auto pp = sample_disordered_pendulum(static_cast<std::size_t>(st.range(0)), 1.0, 1.0, s);
  for (auto _ : st) benchmark::DoNotOptimize(build_pendulum(pp).stiffness.data());
}

}  // namespace

BENCHMARK(BM_FarmSerial)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FarmParallel)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DensityGridSerial)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_DensityGridParallel)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_PendulumReference)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_PendulumFast)->Arg(16)->Arg(32)->Arg(1024)->Unit(benchmark::kMicrosecond);

int main(int argc, char** argv) {
  linalg::ensure_working_blas(argv);
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
