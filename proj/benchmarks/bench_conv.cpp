#include <benchmark/benchmark.h>

#include <random>

#include "mpcci/conv.hpp"
#include "mpcci/domain.hpp"
#include "mpcci/kernel.hpp"
#include "mpcci/model.hpp"
#include "mpcci/solver.hpp"

namespace {

mpcci::ModelSpec table_spec() {
  mpcci::ModelSpec s;
  s.sigma_x = {0.3, 0.5};
  s.sigma_y = {0.3, 0.5};
  s.rho = {0.3, 0.5};
  return s;
}

// One circulant convolution (forward, multiply, inverse) in the full layout.
void BM_FftConvolveFull(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  const mpcci::ModelSpec spec = table_spec();
  const mpcci::GridSpec grid = mpcci::build_grid(spec, 1.2, N, N, 50);
  const mpcci::ConvLayout layout = mpcci::ConvLayout::full(N, N);
  mpcci::FftEngine engine(layout.rows(), layout.cols());
  const mpcci::KernelSpectrum k =
      mpcci::build_kernel({0.5, 0.5, 0.3}, grid, spec.r, layout, engine);
  const mpcci::QuadratureWeights w = mpcci::trapezoid_weights(N, N);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  mpcci::Matrix v(2 * N + 1, 2 * N + 1);
  for (double& x : v.storage()) x = u(rng);
  const mpcci::Matrix aug = mpcci::augment(v, w, layout);
  for (auto _ : state) benchmark::DoNotOptimize(mpcci::fft_convolve(k, aug, engine));
  state.SetComplexityN(N);
}
BENCHMARK(BM_FftConvolveFull)->RangeMultiplier(2)->Range(64, 512)->Unit(benchmark::kMillisecond);

// One timestep over the whole control set at a refinement level.
void BM_SolverStep(benchmark::State& state) {
  const int level = static_cast<int>(state.range(0));
  const mpcci::ModelSpec spec = table_spec();
  const mpcci::RefinementLevel lv = mpcci::RefinementLevel::at(level);
  const mpcci::GridSpec grid = mpcci::build_grid(spec, 1.2, lv.N, lv.J, lv.M);
  const mpcci::DiscreteControlSet controls = mpcci::build_control_set(spec, lv.Qx, lv.Qy);
  const mpcci::PayoffSpec payoff = mpcci::PayoffSpec::call_on_max(40.0);
  mpcci::Stepper stepper(spec, payoff, grid, controls, mpcci::trapezoid_weights(lv.N, lv.J));
  const mpcci::ValueSurface v0 = mpcci::apply_initial(payoff, grid);
  for (auto _ : state) benchmark::DoNotOptimize(stepper.step(v0));
  state.counters["controls"] = static_cast<double>(controls.size());
  state.counters["fft_rows"] = stepper.layout().rows();
}
BENCHMARK(BM_SolverStep)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
