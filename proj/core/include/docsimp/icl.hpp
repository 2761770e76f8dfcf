#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "docsimp/filter.hpp"
#include "docsimp/llm.hpp"
#include "docsimp/prompts.hpp"

namespace docsimp {

enum class BankKind { paragraph_meaning, sentence_structure, lexical };
enum class CoarsePos { noun, verb, adjective, adverb, other };

std::string_view to_string(BankKind kind) noexcept;
std::string_view to_string(CoarsePos pos) noexcept;
std::optional<CoarsePos> pos_from_string(std::string_view name);

struct ExamplePair {
  std::string complex;
  std::string simple;
  std::optional<std::string> reasoning;
  std::string source_tag;
  std::optional<CoarsePos> pos;  // lexical banks: class of the substituted word

  bool operator==(const ExamplePair&) const = default;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  /// Throws Error(invalid_argument) on empty text.
  virtual std::vector<double> embed(std::string_view text) const = 0;
  virtual std::size_t dimension() const = 0;
};

/// L2-normalised TF-IDF over lowercase character 3-5 grams hashed into a
/// fixed number of buckets. IDF weights are 1 until fit_idf is called.
class LocalNgramEmbedder final : public EmbeddingProvider {
 public:
  static constexpr std::size_t kDefaultDimension = 4096;

  explicit LocalNgramEmbedder(std::size_t dimension = kDefaultDimension);

  void fit_idf(std::span<const std::string> corpus);

  std::vector<double> embed(std::string_view text) const override;
  std::size_t dimension() const override { return dimension_; }

 private:
  std::vector<std::size_t> buckets(std::string_view text) const;

  std::size_t dimension_;
  std::vector<double> idf_;
};

/// OpenAI-style /embeddings endpoint. The dimension is fixed by the first
/// response; later responses of another size are provider errors.
class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  HttpEmbeddingProvider(HttpEndpoint endpoint, std::string model,
                        std::chrono::milliseconds timeout = std::chrono::milliseconds{30'000});

  std::vector<double> embed(std::string_view text) const override;
  std::size_t dimension() const override;

 private:
  HttpEndpoint endpoint_;
  std::string model_;
  std::chrono::milliseconds timeout_;
  mutable std::mutex mu_;
  mutable std::size_t dimension_ = 0;
};

double cosine(std::span<const double> a, std::span<const double> b);

class ExampleBank {
 public:
  ExampleBank(BankKind kind, std::vector<ExamplePair> entries);

  BankKind kind() const { return kind_; }
  const std::vector<ExamplePair>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// Precomputes complex-side embeddings.
  void build_index(const EmbeddingProvider& provider);
  const std::optional<std::vector<std::vector<double>>>& embedding_index() const { return index_; }

 private:
  BankKind kind_;
  std::vector<ExamplePair> entries_;
  std::optional<std::vector<std::vector<double>>> index_;
};

/// JSONL, one {"complex", "simple", "reasoning"?, "pos"?} object per line.
ExampleBank load_bank_jsonl(const std::filesystem::path& path, BankKind kind,
                            const std::string& source_tag = {});

/// Top min(k, |bank|) pairs by cosine similarity of the complex side to the
/// query, descending; ties keep bank order.
std::vector<ExamplePair> select_by_embedding(std::string_view query, const ExampleBank& bank, int k,
                                             const EmbeddingProvider& provider);

// --- sentence structure ---------------------------------------------------

/// Closed-class word lists plus suffix rules; total and deterministic.
CoarsePos coarse_pos(std::string_view token);
bool is_function_word(std::string_view token);

struct StructureFeatures {
  long length = 0;  // tokens
  int clause_count = 1;
  std::map<CoarsePos, double> pos_histogram;  // relative frequencies
  double function_word_ratio = 0.0;
};

StructureFeatures structure_features(std::string_view sentence);

/// Mean of the length, clause, POS-histogram and function-word sub-scores.
double sentence_structure_similarity(const StructureFeatures& a, const StructureFeatures& b);

/// Sentence similarities averaged over positionally aligned sentence pairs
/// (the longer text is truncated). Result lies in [0, 1].
double structure_similarity(std::string_view a, std::string_view b);

/// Top min(k, |bank|) pairs by structure similarity of the complex side.
std::vector<ExamplePair> select_by_structure(std::string_view query, const ExampleBank& bank, int k);

// --- lexical --------------------------------------------------------------

/// The pair's annotated class, or the class of the first complex-side word
/// that the simple side drops.
CoarsePos lexical_pos(const ExamplePair& pair);

/// Round-robin over noun, verb, adjective, adverb, other (bank order within
/// a class) until k pairs are chosen.
std::vector<ExamplePair> select_lexical_examples(const ExampleBank& bank, int k);

// --- formatting and reasoning chains ---------------------------------------

std::string format_example(const ExamplePair& pair, BankKind kind);
std::string format_document_example(const ExamplePair& pair);

class CotGenerationError : public Error {
 public:
  CotGenerationError(const std::string& message, AttemptLog log)
      : Error(ErrorCode::cot_generation, message), log_(std::move(log)) {}

  const AttemptLog& log() const { return log_; }

 private:
  AttemptLog log_;
};

struct CotResult {
  ExamplePair pair;
  AttemptLog log;
};

/// Asks the model for the reasoning behind a complex-simple pair. Throws
/// Error(invalid_argument) when the pair already has reasoning and
/// CotGenerationError when every attempt is rejected.
CotResult generate_cot(const ExamplePair& pair, LlmGateway& gateway, const PromptCatalog& catalog,
                       const GenerationParams& params, int max_attempts = 5);

}  // namespace docsimp
