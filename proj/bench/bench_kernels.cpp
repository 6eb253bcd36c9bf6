// Serial vs OpenMP timings for the batch kernels. The second argument of
// each *_Omp benchmark is the worker count.

#include <benchmark/benchmark.h>

#include "symtutor/kernels.hpp"

using namespace symtutor;
using namespace symtutor::kernels;

namespace {

void VerifySampled_Serial(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(verify_sampled_serial(TaskKind::Add, n, 0.5, 500, 1));
  state.SetItemsProcessed(state.iterations() * 500);
}

void VerifySampled_Omp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int workers = static_cast<int>(state.range(1));
  for (auto _ : state)
    benchmark::DoNotOptimize(verify_sampled_omp(TaskKind::Add, n, 0.5, 500, 1, true, workers));
  state.SetItemsProcessed(state.iterations() * 500);
}

DatasetConfig render_config() {
  DatasetConfig cfg;
  cfg.task = TaskKind::Add;
  cfg.format = {FormatFamily::ScratchpadFine, {MarkerMode::Random}};
  cfg.count = 2000;
  cfg.max_n = 40;
  cfg.alphas = {0.1, 0.9};
  return cfg;
}

void RenderDataset_Serial(benchmark::State& state) {
  auto cfg = render_config();
  for (auto _ : state) benchmark::DoNotOptimize(render_dataset_serial(cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(cfg.count));
}

void RenderDataset_Omp(benchmark::State& state) {
  auto cfg = render_config();
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(render_dataset_omp(cfg, workers));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(cfg.count));
}

struct ScoreInput {
  std::vector<RenderedExample> examples;
  std::vector<std::string> completions;
};

const ScoreInput& score_input() {
  static const ScoreInput input = [] {
    DatasetConfig cfg;
    cfg.count = 4000;
    cfg.max_n = 30;
    cfg.alphas = {0.9};
    ScoreInput in{render_dataset_serial(cfg), {}};
    for (const auto& ex : in.examples)
      in.completions.push_back(ex.target.size() > 2 ? ex.target.substr(2) : ex.target);
    return in;
  }();
  return input;
}

void Score_Serial(benchmark::State& state) {
  const auto& in = score_input();
  for (auto _ : state) benchmark::DoNotOptimize(score_serial(in.examples, in.completions, "bench"));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(in.examples.size()));
}

void Score_Omp(benchmark::State& state) {
  const auto& in = score_input();
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(score_omp(in.examples, in.completions, "bench", workers));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(in.examples.size()));
}

} // namespace

BENCHMARK(VerifySampled_Serial)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(VerifySampled_Omp)->ArgsProduct({{10, 100}, {1, 2, 4}})->Unit(benchmark::kMillisecond);
BENCHMARK(RenderDataset_Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(RenderDataset_Omp)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(Score_Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(Score_Omp)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
