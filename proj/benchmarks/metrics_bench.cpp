#include <benchmark/benchmark.h>

#include "aitpr/dataset.hpp"
#include "aitpr/metrics.hpp"

namespace {

struct Corpus {
  std::vector<aitpr::Tokens> candidates;
  std::vector<aitpr::ReferenceSet> references;
};

Corpus make_corpus(std::size_t scenes) {
  aitpr::SynthConfig cfg;
  cfg.scenes = scenes;
  cfg.feature_dim = 8;
  const auto data = aitpr::synthesize_dataset(cfg);
  Corpus c;
  for (const auto& ex : data.examples) {
    aitpr::ReferenceSet refs;
    for (const auto& r : ex.references) refs.push_back(aitpr::split_tokens(aitpr::detokenize(r, data.vocab)));
    // Score the last reference against the rest so the metrics see partial overlap.
    c.candidates.push_back(refs.back());
    c.references.push_back(std::move(refs));
  }
  return c;
}

void BM_Bleu4(benchmark::State& state) {
  const auto c = make_corpus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(aitpr::bleu(c.candidates, c.references, 4));
}
BENCHMARK(BM_Bleu4)->Arg(100)->Arg(1000);

void BM_CiderD(benchmark::State& state) {
  const auto c = make_corpus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(aitpr::cider_d(c.candidates, c.references));
}
BENCHMARK(BM_CiderD)->Arg(100)->Arg(1000);

void BM_EvaluateCorpus(benchmark::State& state) {
  const auto c = make_corpus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(aitpr::evaluate_corpus(c.candidates, c.references).to_json());
}
BENCHMARK(BM_EvaluateCorpus)->Arg(100);

}  // namespace
