#include <benchmark/benchmark.h>

#include <map>
#include <vector>

#include "adsieve/centrality.hpp"
#include "adsieve/features.hpp"
#include "adsieve/filter.hpp"
#include "adsieve/forest.hpp"
#include "adsieve/graph.hpp"
#include "adsieve/synth.hpp"

namespace {

using namespace adsieve;

struct Fixture {
  Corpus corpus;
  FilterSet filters;
  std::vector<PageGraph> graphs;
  Dataset data;
};

const Fixture& Shared() {
  static const Fixture f = [] {
    Fixture out;
    CorpusSpec spec;
    spec.n_pages = 40;
    out.corpus = GenerateCorpus(spec);
    out.filters = ParseRules(out.corpus.filters);
    for (const auto& page : out.corpus.pages) {
      out.graphs.push_back(BuildGraph(page.log));
      auto labels = LabelGraph(out.graphs.back(), out.filters);
      Dataset d = FeaturizeGraph(out.graphs.back(), labels, page.id);
      if (out.data.rows.empty()) out.data = std::move(d);
      else out.data.Append(d);
    }
    return out;
  }();
  return f;
}

void BM_GeneratePage(benchmark::State& state) {
  CorpusSpec spec;
  int i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(GeneratePage(spec, i++ % 100));
}
BENCHMARK(BM_GeneratePage);

void BM_BuildGraph(benchmark::State& state) {
  const auto& f = Shared();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(BuildGraph(f.corpus.pages[i].log));
    i = (i + 1) % f.corpus.pages.size();
  }
}
BENCHMARK(BM_BuildGraph);

void BM_LabelGraph(benchmark::State& state) {
  const auto& f = Shared();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(LabelGraph(f.graphs[i], f.filters));
    i = (i + 1) % f.graphs.size();
  }
}
BENCHMARK(BM_LabelGraph);

void BM_Connectivity(benchmark::State& state) {
  const auto& f = Shared();
  std::vector<Digraph> digraphs;
  for (const auto& g : f.graphs) digraphs.push_back(Digraph::FromPage(g));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ComputeConnectivity(digraphs[i]));
    i = (i + 1) % digraphs.size();
  }
}
BENCHMARK(BM_Connectivity);

void BM_FeaturizeGraph(benchmark::State& state) {
  const auto& f = Shared();
  std::vector<std::map<NodeId, Label>> labels;
  for (const auto& g : f.graphs) labels.push_back(LabelGraph(g, f.filters));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(FeaturizeGraph(f.graphs[i], labels[i], "page"));
    i = (i + 1) % f.graphs.size();
  }
}
BENCHMARK(BM_FeaturizeGraph);

void BM_ForestTrain(benchmark::State& state) {
  const auto& f = Shared();
  ForestConfig config;
  config.workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ForestModel::Train(f.data, config, 7));
  state.counters["rows"] = static_cast<double>(f.data.rows.size());
}
BENCHMARK(BM_ForestTrain)->Arg(1)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_ForestPredict(benchmark::State& state) {
  const auto& f = Shared();
  const ForestModel model = ForestModel::Train(f.data, ForestConfig{}, 7);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.Predict(f.data.rows[i].values));
    i = (i + 1) % f.data.rows.size();
  }
}
BENCHMARK(BM_ForestPredict);

}  // namespace

BENCHMARK_MAIN();
