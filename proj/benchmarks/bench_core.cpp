#include <benchmark/benchmark.h>

#include <numeric>

#include "causalepp/forecast.hpp"
#include "causalepp/inference.hpp"
#include "causalepp/popstats.hpp"
#include "causalepp/synth.hpp"
#include "causalepp/training.hpp"

using namespace causalepp;

namespace {

const SynthResult& corpus() {
  static const SynthResult r = [] {
    SynthConfig c;
    c.num_users = 1000;
    c.num_items = 2000;
    c.interactions_per_step = 1000;
    return generate_synthetic(c, 3);
  }();
  return r;
}

const PopularityStats& stats() {
  static const PopularityStats s = compute_stats(corpus().split, {5, 0.2});
  return s;
}

}  // namespace

static void BM_ComputeStats(benchmark::State& state) {
  const auto& split = corpus().split;
  for (auto _ : state) benchmark::DoNotOptimize(compute_stats(split, {static_cast<int>(state.range(0)), 0.2}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(split.train.size()));
}
BENCHMARK(BM_ComputeStats)->Arg(1)->Arg(5)->Arg(30)->Unit(benchmark::kMillisecond);

static void BM_BuildIntervention(benchmark::State& state) {
  const auto& s = stats();
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_intervention(s.pop, s.personal, {10, 5, 10, SlopeEstimator::kRegression}));
  }
}
BENCHMARK(BM_BuildIntervention)->Unit(benchmark::kMillisecond);

static void BM_TrainEpoch(benchmark::State& state) {
  TrainConfig tc;
  tc.dim = 32;
  tc.epochs = 1;
  tc.batch_size = 2048;
  tc.backbone = state.range(0) == 0 ? BackboneKind::kMF : BackboneKind::kLightGCN;
  tc.mode = state.range(1) == 0 ? TrainMode::kCausalEPP : TrainMode::kPlainBackbone;
  for (auto _ : state) benchmark::DoNotOptimize(train(corpus().split, stats(), tc));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(corpus().split.train.size()));
}
BENCHMARK(BM_TrainEpoch)->ArgsProduct({{0, 1}, {0, 1}})->ArgNames({"lightgcn", "plain"})->Unit(benchmark::kMillisecond);

static void BM_ScoreAndTopK(benchmark::State& state) {
  const auto& split = corpus().split;
  const BipartiteGraph g(split.train, split.num_users, split.num_items);
  const auto params = init_params(split.num_users, split.num_items, 64, BackboneKind::kMF, 0, 1);
  const auto prop = propagate(params, g);
  const auto plan = build_intervention(stats().pop, stats().personal, {10, 5, 10, SlopeEstimator::kBackwardDifference});
  const Scorer scorer(params, prop, stats(), {TrainMode::kCausalEPP, 0.5, false}, &plan);
  UserId u = 0;
  for (auto _ : state) {
    const auto scores = scorer.score_all(u, {InterventionMode::kIntervened});
    benchmark::DoNotOptimize(top_k(scores, g.items_of(u), static_cast<int>(state.range(0)), u));
    u = (u + 1) % split.num_users;
  }
  state.SetItemsProcessed(state.iterations() * split.num_items);
}
BENCHMARK(BM_ScoreAndTopK)->Arg(20)->Arg(100);
BENCHMARK_MAIN();
