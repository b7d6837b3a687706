// Serial references against the OpenMP kernels on the synthetic benchmark.
//
//   OMP_NUM_THREADS=4 ./build/bench/bench_kernels

#include <benchmark/benchmark.h>

#include <random>

#include "hetedge/pipeline.hpp"
#include "hetedge/serving.hpp"
#include "hetedge/synth.hpp"

namespace {

using namespace hetedge;

const MultiGraph& graph() {
  static const MultiGraph g = build_graph(generate_synthetic(SynthConfig{}));
  return g;
}

WalkConfig walk_config() {
  WalkConfig c = synthetic_benchmark_config().walk;
  c.seed = 1;
  return c;
}

const WalkCorpus& corpus() {
  static const WalkCorpus c = generate_corpus(split_by_type(graph(), "friend"), walk_config(), 1);
  return c;
}

const EmbeddingTable& table() {
  static const EmbeddingTable t = [] {
    EmbeddingTable e("friend", graph().num_nodes(), 128);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (auto& x : e.input) x = nd(rng);
    e.active.assign(e.num_nodes, 1);
    return e;
  }();
  return t;
}

void BM_WalksSerial(benchmark::State& state) {
  const auto g = split_by_type(graph(), "friend");
  for (auto _ : state) benchmark::DoNotOptimize(generate_corpus_serial(g, walk_config()));
}

void BM_WalksParallel(benchmark::State& state) {
  const auto g = split_by_type(graph(), "friend");
  for (auto _ : state) benchmark::DoNotOptimize(generate_corpus(g, walk_config(), 0));
}

void BM_SgnsSerial(benchmark::State& state) {
  const SgnsConfig cfg = synthetic_benchmark_config().sgns;
  for (auto _ : state) benchmark::DoNotOptimize(train_sgns(corpus(), cfg, 1));
}

void BM_SgnsParallel(benchmark::State& state) {
  const SgnsConfig cfg = synthetic_benchmark_config().sgns;
  for (auto _ : state) benchmark::DoNotOptimize(train_sgns(corpus(), cfg, 0));
}

void BM_NnQuerySerial(benchmark::State& state) {
  const NnIndex index(table());
  NodeId q = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(index.query_serial(q, 100));
    q = (q + 1) % static_cast<NodeId>(index.size());
  }
}

void BM_NnQueryParallel(benchmark::State& state) {
  const NnIndex index(table());
  NodeId q = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(index.query(q, 100, 0));
    q = (q + 1) % static_cast<NodeId>(index.size());
  }
}

}  // namespace

BENCHMARK(BM_WalksSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WalksParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SgnsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SgnsParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_NnQuerySerial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_NnQueryParallel)->Unit(benchmark::kMicrosecond)->UseRealTime();

BENCHMARK_MAIN();
