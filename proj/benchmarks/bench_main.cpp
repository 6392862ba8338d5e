#include <benchmark/benchmark.h>

#include <random>

#include "gpebo/simulation.hpp"

using namespace gpebo;

namespace {

Matrix random_matrix(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = u(rng);
  return m;
}

void BM_DetAdjugate(benchmark::State& state) {
  const Matrix m = random_matrix(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(det_adjugate(m));
}
BENCHMARK(BM_DetAdjugate)->Arg(3)->Arg(5)->Arg(9);

void BM_EstimatorRhs(benchmark::State& state) {
  const Scenario sc = make_example_scenario();
  const Vector tg0 = sc.theta_g0_or_default();
  EstimatorState st = EstimatorState::initial(tg0, sc.theta0_or_default(), sc.gains.f0);
  st.F = st.F * 0.5;
  RegressorSample s;
  s.Omega_L = {0.1, -0.2, 0.3, 0.4, -0.5};
  s.Omega_N = {0.2, 0.1, -0.1, 0.05};
  s.Y = 0.7;
  const EstimatorGains g{sc.gains.alpha, sc.gains.gamma, sc.gains.f0};
  const Matrix q_sel = selection_matrix(sc.dims.q(), sc.dims.p());
  for (auto _ : state) benchmark::DoNotOptimize(estimator_rhs(st, s, g, tg0, q_sel, sc.dims));
}
BENCHMARK(BM_EstimatorRhs);

void BM_ClosedLoopRhs(benchmark::State& state) {
  const ClosedLoop loop(make_example_scenario());
  const CompositeState s0 = loop.initial_state();
  for (auto _ : state) benchmark::DoNotOptimize(loop(0.5, s0.values()));
}
BENCHMARK(BM_ClosedLoopRhs);

void BM_SimulateOneSecond(benchmark::State& state) {
  const Scenario sc = make_example_scenario();
  SimulationOptions opt;
  opt.t_final = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(sc, opt));
}
BENCHMARK(BM_SimulateOneSecond)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
