#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "docsimp/llm.hpp"
#include "docsimp/text.hpp"

namespace docsimp::testing {

std::filesystem::path data_dir();

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(std::string_view name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_text(const std::filesystem::path& path, std::string_view contents);

// Text between the first `start` and the following `end`; empty if absent.
std::string between(std::string_view text, std::string_view start, std::string_view end);

// Answers a discourse prompt for n numbered units.
using PlanWriter = std::function<std::string(int n_units, bool sentences)>;

// One topic per paragraph; a single topic holding every sentence for the
// sentence-numbered variant.
std::string pass_through_plan(int n_units, bool sentences);

// Echoes the unit under simplification for every stage. Summaries come back
// as "Short summary.", judge prompts get a Document 2 verdict.
std::string identity_response(const ChatRequest& request, const PlanWriter& plan = pass_through_plan);

std::shared_ptr<ChatBackend> identity_backend(PlanWriter plan = pass_through_plan);

// Number of "Paragraph N:" / "Sentence N:" lines in a discourse prompt.
int numbered_units(std::string_view user_text, bool& sentences);

// Synthetic document: paragraph i has sentences_per_paragraph[i] sentences,
// each of 4..9 lowercase words after a capitalised first word.
Document synthetic_document(const std::string& id, const std::vector<int>& sentences_per_paragraph,
                            std::uint64_t seed);

// Whitespace-separated words from a small vocabulary, 0..max_tokens long.
std::vector<std::string> random_words(std::mt19937_64& rng, std::size_t max_tokens,
                                      std::size_t vocabulary = 6);

std::string join_words(const std::vector<std::string>& words);

}  // namespace docsimp::testing
