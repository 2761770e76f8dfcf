#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "docsimp/text.hpp"

namespace docsimp {

enum class Bucket { wiki_auto, newsela_a, newsela_b };
enum class Collection { wiki, newsela };

std::string_view to_string(Bucket bucket) noexcept;
std::optional<Bucket> bucket_from_string(std::string_view name);
std::string_view to_string(Collection collection) noexcept;
std::optional<Collection> collection_from_string(std::string_view name);

struct ManifestEntry {
  std::string id;
  std::filesystem::path source_path;
  std::vector<std::filesystem::path> reference_paths;
  std::optional<Bucket> bucket;
  std::optional<Collection> collection;

  bool operator==(const ManifestEntry&) const = default;
};

/// JSONL manifest: {"id", "source_path", "reference_paths"?, "bucket"?,
/// "collection"?} per line. Relative paths resolve against the manifest's
/// directory. Throws Error(manifest) naming the line or duplicate id.
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);

/// Newsela-style documents split at 1000 tokens (1000 goes to newsela_b);
/// wiki-style documents are eligible only with 300..500 tokens, otherwise
/// the result is nullopt.
std::optional<Bucket> assign_bucket(Collection collection, const TokenStats& stats);
std::optional<Bucket> assign_bucket(const ManifestEntry& entry, const TokenStats& stats);

/// Sample of n entries without replacement, in sample order. The generator
/// is mt19937_64 seeded with `seed`; the shuffle draws bounded integers by
/// rejection so results do not depend on the standard library's
/// distributions. Throws Error(invalid_argument) when n > |entries|.
std::vector<ManifestEntry> sample_entries(std::span<const ManifestEntry> entries, std::size_t n,
                                          std::uint64_t seed);

std::string read_text_file(const std::filesystem::path& path);

struct LoadedEntry {
  ManifestEntry entry;
  Document source;
  std::vector<Document> references;
};

/// Reads the source and reference documents. Throws Error(io).
LoadedEntry load_entry(const ManifestEntry& entry);

struct CorpusRow {
  std::string id;
  TokenStats source;
  std::vector<TokenStats> references;
};

struct CorpusStats {
  std::size_t documents = 0;
  std::size_t documents_with_references = 0;
  double paragraphs_x = 0, paragraphs_y = 0;
  double sentences_x = 0, sentences_y = 0;
  double tokens_x = 0, tokens_y = 0;
};

/// Means over documents (X) and over every reference document (Y).
CorpusStats corpus_stats(std::span<const CorpusRow> rows);

CorpusRow corpus_row(const LoadedEntry& loaded);

/// Two-column report with rows Paragraphs-X/Y, Sentences-X/Y, Tokens-X/Y.
std::string stats_tsv(const CorpusStats& stats);
nlohmann::json to_json(const CorpusStats& stats);

}  // namespace docsimp
