#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "ulmtrack/assign.hpp"
#include "ulmtrack/experiment.hpp"
#include "ulmtrack/kalman.hpp"
#include "ulmtrack/tracker.hpp"

namespace {

using namespace ulmtrack;

// Dense n x n matrix, as produced by one frame of a high-concentration cell.
void BM_SolveBipartite(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  CostMatrix m(n, n, 50.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(solve_bipartite(m));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolveBipartite)->RangeMultiplier(2)->Range(8, 128)->Complexity();

void BM_PairCost(benchmark::State& state) {
  const auto model = MotionModel::make(MotionKind::constant_acceleration, 0.04, 5e4, 10.0);
  KalmanState s = KalmanState::zero(MotionKind::constant_acceleration);
  s.P = initial_covariance(MotionKind::constant_acceleration, TrackerConfig{});
  const auto predicted = predict(s, model);
  const Vec2 z(12.0, -7.0);
  for (auto _ : state) benchmark::DoNotOptimize(pair_cost(predicted, model, z));
}
BENCHMARK(BM_PairCost);

void BM_PredictUpdate(benchmark::State& state) {
  const auto kind = state.range(0) ? MotionKind::constant_acceleration : MotionKind::constant_velocity;
  const auto model = MotionModel::make(kind, 0.04, 5e4, 10.0);
  KalmanState s = KalmanState::zero(kind);
  s.P = initial_covariance(kind, TrackerConfig{});
  for (auto _ : state) {
    s = update(predict(s, model), model, s.position() + Vec2(1.0, 0.5));
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_PredictUpdate)->Arg(1)->Arg(0);

// Full tracker over a 10 s simulated cell; the argument is bubbles in the field.
void BM_TrackCell(benchmark::State& state) {
  ExperimentConfig cfg;
  cfg.duration_s = 10.0;
  const auto conc = state.range(0) == 10 ? Concentration::low
                    : state.range(0) == 15 ? Concentration::mid
                                           : Concentration::high;
  const auto sim = simulate_cell({25.0, 75.0, conc, 1}, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(track(sim.seq, cfg.tracker, MotionMode::accel));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * sim.seq.size()));
}
BENCHMARK(BM_TrackCell)->Arg(10)->Arg(15)->Arg(25)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
