#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "docsimp/filter.hpp"
#include "docsimp/llm.hpp"
#include "docsimp/prompts.hpp"
#include "docsimp/text.hpp"

namespace docsimp {

struct SariComponents {
  double add_f1 = 0.0;
  double keep_f1 = 0.0;
  double del_precision = 0.0;
};

struct SariBreakdown {
  std::array<SariComponents, 4> per_n{};  // index 0 holds unigrams
  double aggregate = 0.0;                 // 0..100
};

/// Lowercased tokens as used by the n-gram metrics.
std::vector<std::string> metric_tokens(std::string_view text);

/// Multi-reference SARI with fractional reference counts. A component whose
/// candidate and target sets are both empty scores 1; if only one of them
/// is empty its precision or recall is 0. Throws Error(empty_references).
SariBreakdown sari(std::string_view input, std::string_view output,
                   std::span<const std::string> references);

/// Mean of single-reference SARI over the references.
SariBreakdown sari_mean_single(std::string_view input, std::string_view output,
                               std::span<const std::string> references);

/// Length-penalised SARI: add and keep scores are scaled by token-count and
/// sentence-count ratios between output and the mean reference.
double d_sari(std::string_view input, std::string_view output,
              std::span<const std::string> references);

/// Flesch-Kincaid grade level, unclamped. Throws Error(invalid_argument)
/// when the text has no sentence or no word.
double fkgl(std::string_view text);

// --- judge ----------------------------------------------------------------

enum class Winner { document_1, document_2 };

struct JudgeVerdict {
  Winner winner = Winner::document_1;
  std::string reasoning;
  std::string raw;
};

/// Reads the verdict from the final nonempty line, which must end in
/// "Document 1" or "Document 2", alone or after "The better-simplified
/// document:".
Outcome<JudgeVerdict> parse_judge_verdict(std::string_view raw);

struct JudgeResult {
  std::optional<JudgeVerdict> verdict;  // nullopt: judge failure
  AttemptLog log;
};

/// Baseline is Document 1, candidate Document 2.
JudgeResult gpt_judge(std::string_view baseline_output, std::string_view candidate_output,
                      LlmGateway& gateway, const PromptCatalog& catalog,
                      const GenerationParams& params, int max_attempts = 5);

/// Judges in both orders when `swap` is set. Verdicts of the swapped run are
/// mapped back so document_2 always means the candidate.
std::vector<JudgeResult> judge_documents(std::string_view baseline_output,
                                         std::string_view candidate_output, LlmGateway& gateway,
                                         const PromptCatalog& catalog,
                                         const GenerationParams& params, int max_attempts,
                                         bool swap);

/// 100 x share of verdicts won by document 2. Throws Error(no_verdicts) on
/// an empty list.
double win_rate(std::span<const JudgeVerdict> verdicts);

/// Parsed verdicts of a result list (failures dropped).
std::vector<JudgeVerdict> parsed_verdicts(std::span<const JudgeResult> results);

// --- reports --------------------------------------------------------------

struct MetricReport {
  std::string doc_id;
  SariBreakdown sari;  // mean over single references
  double sari_joint = 0.0;
  double d_sari = 0.0;
  double fkgl = 0.0;
  TokenStats token_stats_in;
  TokenStats token_stats_out;
  std::optional<double> bartscore;
  std::optional<double> gpt;  // 100 when the candidate won, 0 when it lost
};

nlohmann::json to_json(const MetricReport& report);

/// Scores one document. Subheading lines are removed from all texts unless
/// include_subheadings is set.
MetricReport score_document(const std::string& doc_id, std::string_view source,
                            std::string_view output, std::span<const std::string> references,
                            bool include_subheadings = false);

/// Scores keyed by doc_id from a JSONL sidecar of {"doc_id", "score"}.
std::map<std::string, double> load_score_sidecar(const std::filesystem::path& path);

/// Tab-separated table with columns doc_id, SA, DSA, FKG, then BAR and GPT
/// when any row has them, and a final "mean" row. GPT's mean is the win rate
/// over judged rows.
std::string summary_table(std::span<const MetricReport> reports);

}  // namespace docsimp
