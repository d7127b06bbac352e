#include <map>

#include <benchmark/benchmark.h>

#include "ddmr/pipeline.hpp"

using namespace ddmr;

namespace {

const ReducedModel& trained(int n)
{
  static std::map<int, ReducedModel> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    RunConfig c;
    c.n = n;
    c.local_terms = 3;
    c.order = 5;
    c.snapshots = 40;
    c.training_samples = 200;
    it = cache.emplace(n, offline_train(c)).first;
  }
  return it->second;
}

} // namespace

static void BM_OnlineSolve(benchmark::State& state)
{
  const auto& model = trained(static_cast<int>(state.range(0)));
  Rng rng = stream_rng(2, RngStream::solve, 0);
  const auto y = draw_parameter(model, rng);
  for (auto _ : state) benchmark::DoNotOptimize(online_solve(model, y));
}
BENCHMARK(BM_OnlineSolve)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_SurrogateEvaluate(benchmark::State& state)
{
  const auto& model = trained(32);
  const Eigen::VectorXd t = Eigen::VectorXd::Constant(model.config.local_dim(), 0.3);
  for (auto _ : state) {
    const Eigen::VectorXd basis = legendre_eval(model.index_set, t);
    benchmark::DoNotOptimize(model.surrogates[0].evaluate(basis));
  }
}
BENCHMARK(BM_SurrogateEvaluate);

static void BM_Reconstruct(benchmark::State& state)
{
  const auto& model = trained(static_cast<int>(state.range(0)));
  Rng rng = stream_rng(2, RngStream::solve, 1);
  const auto r = online_solve(model, draw_parameter(model, rng));
  for (auto _ : state) benchmark::DoNotOptimize(reconstruct(model, r));
}
BENCHMARK(BM_Reconstruct)->Arg(32)->Arg(64);
BENCHMARK_MAIN();
