#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "docsimp/metrics.hpp"
#include "docsimp/text.hpp"

namespace {

std::string random_text(std::mt19937_64& rng, int words) {
  static const char* vocab[] = {"the", "city", "council", "approved", "a", "new", "budget", "for",
                                "schools", "and", "parks", "after", "long", "debate", "on", "taxes"};
  std::string out;
  for (int i = 0; i < words; ++i) {
    out += (i ? " " : "") + std::string(vocab[rng() % std::size(vocab)]);
    if (i % 12 == 11) out += ".";
  }
  return out + ".";
}

void BM_Sari(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const int n = static_cast<int>(state.range(0));
  auto in = random_text(rng, n), out = random_text(rng, n * 2 / 3);
  std::vector<std::string> refs = {random_text(rng, n / 2), random_text(rng, n / 2)};
  for (auto _ : state) benchmark::DoNotOptimize(docsimp::sari(in, out, refs));
  state.SetComplexityN(n);
}
BENCHMARK(BM_Sari)->RangeMultiplier(4)->Range(16, 4096)->Complexity();

void BM_Fkgl(benchmark::State& state) {
  std::mt19937_64 rng(2);
  auto text = random_text(rng, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(docsimp::fkgl(text));
}
BENCHMARK(BM_Fkgl)->Range(64, 8192);

void BM_Tokenize(benchmark::State& state) {
  std::mt19937_64 rng(3);
  auto text = random_text(rng, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(docsimp::tokenize(text));
  state.SetBytesProcessed(static_cast<long>(state.iterations() * text.size()));
}
BENCHMARK(BM_Tokenize)->Range(64, 8192);

}  // namespace

BENCHMARK_MAIN();
