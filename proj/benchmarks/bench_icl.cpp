#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "docsimp/icl.hpp"

namespace {

docsimp::ExampleBank make_bank(int size) {
  static const char* words[] = {"river", "flooded", "town", "people", "left", "homes", "rain", "storm",
                                "rescue", "teams", "arrived", "quickly", "water", "rose", "overnight"};
  std::mt19937_64 rng(9);
  std::vector<docsimp::ExamplePair> entries;
  for (int i = 0; i < size; ++i) {
    std::string complex;
    for (int w = 0; w < 20; ++w) complex += (w ? " " : "") + std::string(words[rng() % std::size(words)]);
    entries.push_back({complex + ".", "Short.", std::nullopt, "bench", std::nullopt});
  }
  return docsimp::ExampleBank(docsimp::BankKind::paragraph_meaning, std::move(entries));
}

void BM_SelectByEmbedding(benchmark::State& state) {
  auto bank = make_bank(static_cast<int>(state.range(0)));
  docsimp::LocalNgramEmbedder embedder;
  if (state.range(1)) bank.build_index(embedder);
  const std::string query = "The storm flooded the town and rescue teams arrived.";
  for (auto _ : state) benchmark::DoNotOptimize(docsimp::select_by_embedding(query, bank, 2, embedder));
}
BENCHMARK(BM_SelectByEmbedding)->ArgsProduct({{16, 128, 1024}, {0, 1}});

void BM_StructureSimilarity(benchmark::State& state) {
  const std::string a = "Although it rained, we walked to the market because we needed bread.";
  const std::string b = "When the bell rang, the children, who were hungry, ran outside.";
  for (auto _ : state) benchmark::DoNotOptimize(docsimp::structure_similarity(a, b));
}
BENCHMARK(BM_StructureSimilarity);

}  // namespace

BENCHMARK_MAIN();
