#include <benchmark/benchmark.h>

#include "ddmr/dd_exact.hpp"
#include "ddmr/pipeline.hpp"

using namespace ddmr;

namespace {

CellField sample_field(const ReducedModel& model)
{
  Rng rng = stream_rng(1, RngStream::solve, 0);
  return parameter_field(model, draw_parameter(model, rng));
}

RunConfig mesh_config(int n)
{
  RunConfig c;
  c.n = n;
  return c;
}

} // namespace

static void BM_AssembleDiffusion(benchmark::State& state)
{
  const auto model = build_model_skeleton(mesh_config(static_cast<int>(state.range(0))));
  const auto eta = sample_field(model);
  const PdeForm form = model.config.form();
  for (auto _ : state) benchmark::DoNotOptimize(assemble(model.mesh, form, eta));
}
BENCHMARK(BM_AssembleDiffusion)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_FullSolve(benchmark::State& state)
{
  const auto model = build_model_skeleton(mesh_config(static_cast<int>(state.range(0))));
  const auto sys = assemble(model.mesh, model.config.form(), sample_field(model));
  FullSolver solver(model.mesh);
  for (auto _ : state) benchmark::DoNotOptimize(solver.solve(sys));
}
BENCHMARK(BM_FullSolve)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_SubstructuredSolve(benchmark::State& state)
{
  const auto model = build_model_skeleton(mesh_config(static_cast<int>(state.range(0))));
  const auto eta = sample_field(model);
  const PdeForm form = model.config.form();
  for (auto _ : state) benchmark::DoNotOptimize(dd_solve(model.mesh, model.partition, form, eta));
}
BENCHMARK(BM_SubstructuredSolve)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_KLDecompose(benchmark::State& state)
{
  const Mesh mesh = build_mesh(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kl_decompose(mesh_cell_grid(mesh), 0.25, 100));
}
BENCHMARK(BM_KLDecompose)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
