#include <benchmark/benchmark.h>

#include "docsimp/pipeline.hpp"
#include "fixtures.hpp"

namespace {

// Pipeline overhead with an in-process echo backend: prompt rendering,
// parsing, filtering and reassembly, no network.
void BM_ProgDs(benchmark::State& state) {
  std::vector<int> shape(static_cast<std::size_t>(state.range(0)), 3);
  auto doc = docsimp::testing::synthetic_document("bench", shape, 5);
  docsimp::PromptCatalog catalog;
  for (auto _ : state) {
    docsimp::LlmGateway gw(docsimp::testing::identity_backend());
    docsimp::PipelineDeps deps{gw, catalog};
    benchmark::DoNotOptimize(docsimp::simplify(doc, docsimp::PipelineConfig{}, deps));
  }
}
BENCHMARK(BM_ProgDs)->Arg(2)->Arg(8)->Arg(32);

void BM_Reassemble(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  docsimp::DiscoursePlan plan;
  plan.n_units = n;
  std::map<int, std::string> texts;
  for (int i = 1; i <= n; ++i) {
    plan.topics.push_back({"Topic " + std::to_string(i), {i}});
    texts[i] = "Paragraph text number " + std::to_string(i) + ".";
  }
  for (auto _ : state) benchmark::DoNotOptimize(docsimp::reassemble(plan, texts, true));
}
BENCHMARK(BM_Reassemble)->Range(8, 512);

}  // namespace

BENCHMARK_MAIN();
