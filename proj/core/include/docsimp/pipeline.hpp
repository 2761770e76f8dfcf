#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "docsimp/filter.hpp"
#include "docsimp/icl.hpp"
#include "docsimp/llm.hpp"
#include "docsimp/prompts.hpp"
#include "docsimp/text.hpp"

namespace docsimp {

enum class Method { progds, sumds, p1, p2, ic };

std::string_view to_string(Method method) noexcept;
std::optional<Method> method_from_string(std::string_view name);

struct PipelineConfig {
  Method method = Method::progds;
  int iterations = 1;  // progds only
  bool use_icl = false;
  int k_examples = 2;
  bool include_subheadings = true;
  int max_attempts = 5;
  int parallelism = 1;
  GenerationParams params;
  int lexical_min_tokens = 4;  // shorter sentences skip the lexical stage

  void validate() const;
};

/// Optional in-context material. Missing banks leave their example slots
/// empty.
struct IclResources {
  const ExampleBank* paragraph_bank = nullptr;  // topic stage, by embedding
  const ExampleBank* structure_bank = nullptr;  // topic stage, by structure
  const ExampleBank* lexical_bank = nullptr;
  const EmbeddingProvider* embedder = nullptr;
  std::optional<ExamplePair> document_example;  // required by Method::ic
};

struct PipelineDeps {
  LlmGateway& gateway;
  const PromptCatalog& prompts;
  IclResources icl = {};
  FilterConfig filter = FilterConfig::defaults();
};

struct StageTrace {
  std::string doc_id;
  int iteration = 1;
  std::string stage;
  std::string unit_ref;  // "document", "paragraph 3", "topic 2", "sentence 2.1"
  std::string prompt_digest;  // empty when the unit made no call
  AttemptLog attempt_log;
  std::string output_digest;
  std::optional<std::string> note;
};

nlohmann::json to_json(const StageTrace& trace);

struct SimplifiedDocument {
  std::string doc_id;
  std::string text;
  Document document;
  std::vector<DiscoursePlan> plan_history;
  std::vector<StageTrace> traces;
  CallLedger ledger;  // calls made for this document only

  /// True when any stage fell back after rejecting every attempt.
  bool degraded() const;
  std::vector<std::string> fallback_stages() const;
};

/// Topics in plan order, optionally each under a "## <subheading>" line,
/// members joined by blank lines. Throws Error(missing_unit_text) when a
/// member has no text.
std::string reassemble(const DiscoursePlan& plan, const std::map<int, std::string>& unit_texts,
                       bool include_subheadings);

/// Paragraph texts of a document with "## " subheading lines removed.
std::vector<std::string> source_paragraphs(const Document& doc);

// The runners assume no other run shares the gateway concurrently; the
// per-document ledger is the difference of two gateway snapshots.
SimplifiedDocument run_progds(const Document& doc, const PipelineConfig& cfg, PipelineDeps& deps);
SimplifiedDocument run_sumds(const Document& doc, const PipelineConfig& cfg, PipelineDeps& deps);
SimplifiedDocument run_direct(const Document& doc, const PipelineConfig& cfg, PipelineDeps& deps);

/// Dispatches on cfg.method.
SimplifiedDocument simplify(const Document& doc, const PipelineConfig& cfg, PipelineDeps& deps);

/// Runs fn(0..n-1) on up to `parallelism` threads. The first exception is
/// rethrown after all workers finish.
void parallel_for(std::size_t n, int parallelism, const std::function<void(std::size_t)>& fn);

CallLedger ledger_delta(const CallLedger& after, const CallLedger& before);

}  // namespace docsimp
