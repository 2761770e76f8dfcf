#include "docsimp/corpus.hpp"

#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "docsimp/error.hpp"

namespace docsimp {

using nlohmann::json;

std::string_view to_string(Bucket bucket) noexcept {
  switch (bucket) {
    case Bucket::wiki_auto: return "wiki_auto";
    case Bucket::newsela_a: return "newsela_a";
    case Bucket::newsela_b: return "newsela_b";
  }
  return "unknown";
}

std::optional<Bucket> bucket_from_string(std::string_view name) {
  for (auto b : {Bucket::wiki_auto, Bucket::newsela_a, Bucket::newsela_b})
    if (name == to_string(b)) return b;
  return std::nullopt;
}

std::string_view to_string(Collection collection) noexcept {
  return collection == Collection::wiki ? "wiki" : "newsela";
}

std::optional<Collection> collection_from_string(std::string_view name) {
  if (name == "wiki") return Collection::wiki;
  if (name == "newsela") return Collection::newsela;
  return std::nullopt;
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::manifest, "cannot open manifest " + path.string());
  const auto base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };

  std::vector<ManifestEntry> entries;
  std::set<std::string> ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fail = [&](const std::string& m) {
      throw Error(ErrorCode::manifest, path.string() + ":" + std::to_string(line_no) + ": " + m);
    };
    auto j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) fail("not a JSON object");
    if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty())
      fail("missing string field 'id'");
    if (!j.contains("source_path") || !j["source_path"].is_string())
      fail("missing string field 'source_path'");

    ManifestEntry e;
    e.id = j["id"].get<std::string>();
    e.source_path = resolve(j["source_path"].get<std::string>());
    if (j.contains("reference_paths")) {
      if (!j["reference_paths"].is_array()) fail("'reference_paths' must be an array");
      for (const auto& r : j["reference_paths"]) {
        if (!r.is_string()) fail("'reference_paths' entries must be strings");
        e.reference_paths.push_back(resolve(r.get<std::string>()));
      }
    }
    if (j.contains("bucket") && !j["bucket"].is_null()) {
      if (!j["bucket"].is_string()) fail("'bucket' must be a string");
      e.bucket = bucket_from_string(j["bucket"].get<std::string>());
      if (!e.bucket) fail("unknown bucket '" + j["bucket"].get<std::string>() + "'");
    }
    if (j.contains("collection") && !j["collection"].is_null()) {
      if (!j["collection"].is_string()) fail("'collection' must be a string");
      e.collection = collection_from_string(j["collection"].get<std::string>());
      if (!e.collection) fail("unknown collection '" + j["collection"].get<std::string>() + "'");
    }
    for (const auto& [key, _] : j.items())
      if (key != "id" && key != "source_path" && key != "reference_paths" && key != "bucket" &&
          key != "collection")
        fail("unknown field '" + key + "'");
    if (!ids.insert(e.id).second) fail("duplicate id '" + e.id + "'");
    entries.push_back(std::move(e));
  }
  return entries;
}

std::optional<Bucket> assign_bucket(Collection collection, const TokenStats& stats) {
  const long n = stats.token_count;
  if (collection == Collection::newsela) return n < 1000 ? Bucket::newsela_a : Bucket::newsela_b;
  if (n >= 300 && n <= 500) return Bucket::wiki_auto;
  return std::nullopt;
}

std::optional<Bucket> assign_bucket(const ManifestEntry& entry, const TokenStats& stats) {
  Collection c = Collection::newsela;
  if (entry.collection) {
    c = *entry.collection;
  } else if (entry.bucket) {
    c = *entry.bucket == Bucket::wiki_auto ? Collection::wiki : Collection::newsela;
  }
  return assign_bucket(c, stats);
}

std::vector<ManifestEntry> sample_entries(std::span<const ManifestEntry> entries, std::size_t n,
                                          std::uint64_t seed) {
  if (n > entries.size())
    throw Error(ErrorCode::invalid_argument, "cannot sample " + std::to_string(n) + " of " +
                                                 std::to_string(entries.size()) + " entries");
  std::mt19937_64 rng(seed);
  // Uniform integer in [0, bound] by rejection from the raw 64-bit stream.
  auto below_or_equal = [&](std::uint64_t bound) {
    if (bound == 0) return std::uint64_t{0};
    const std::uint64_t range = bound + 1;
    const std::uint64_t limit = range == 0 ? 0 : (~std::uint64_t{0} / range) * range;
    for (;;) {
      std::uint64_t x = rng();
      if (range == 0) return x;
      if (x < limit) return x % range;
    }
  };
  std::vector<std::size_t> idx(entries.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  // Partial Fisher-Yates from the front.
  for (std::size_t i = 0; i < n; ++i) {
    auto j = i + static_cast<std::size_t>(below_or_equal(idx.size() - 1 - i));
    std::swap(idx[i], idx[j]);
  }
  std::vector<ManifestEntry> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(entries[idx[i]]);
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

LoadedEntry load_entry(const ManifestEntry& entry) {
  LoadedEntry out;
  out.entry = entry;
  out.source = parse_document(read_text_file(entry.source_path), entry.id);
  for (const auto& r : entry.reference_paths)
    out.references.push_back(parse_document(read_text_file(r), entry.id));
  return out;
}

CorpusRow corpus_row(const LoadedEntry& loaded) {
  CorpusRow row;
  row.id = loaded.entry.id;
  row.source = doc_stats(loaded.source);
  for (const auto& r : loaded.references) row.references.push_back(doc_stats(r));
  return row;
}

CorpusStats corpus_stats(std::span<const CorpusRow> rows) {
  CorpusStats s;
  std::size_t refs = 0;
  for (const auto& row : rows) {
    ++s.documents;
    s.paragraphs_x += static_cast<double>(row.source.paragraph_count);
    s.sentences_x += static_cast<double>(row.source.sentence_count);
    s.tokens_x += static_cast<double>(row.source.token_count);
    if (!row.references.empty()) ++s.documents_with_references;
    for (const auto& r : row.references) {
      ++refs;
      s.paragraphs_y += static_cast<double>(r.paragraph_count);
      s.sentences_y += static_cast<double>(r.sentence_count);
      s.tokens_y += static_cast<double>(r.token_count);
    }
  }
  if (s.documents) {
    const double n = static_cast<double>(s.documents);
    s.paragraphs_x /= n;
    s.sentences_x /= n;
    s.tokens_x /= n;
  }
  if (refs) {
    const double n = static_cast<double>(refs);
    s.paragraphs_y /= n;
    s.sentences_y /= n;
    s.tokens_y /= n;
  }
  return s;
}

namespace {

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string stats_tsv(const CorpusStats& s) {
  std::string out = "statistic\tvalue\n";
  auto row = [&](std::string_view name, double v) { out += std::string(name) + '\t' + fixed2(v) + '\n'; };
  row("Paragraphs-X", s.paragraphs_x);
  row("Paragraphs-Y", s.paragraphs_y);
  row("Sentences-X", s.sentences_x);
  row("Sentences-Y", s.sentences_y);
  row("Tokens-X", s.tokens_x);
  row("Tokens-Y", s.tokens_y);
  return out;
}

json to_json(const CorpusStats& s) {
  return {{"documents", s.documents},
          {"documents_with_references", s.documents_with_references},
          {"Paragraphs-X", s.paragraphs_x},
          {"Paragraphs-Y", s.paragraphs_y},
          {"Sentences-X", s.sentences_x},
          {"Sentences-Y", s.sentences_y},
          {"Tokens-X", s.tokens_x},
          {"Tokens-Y", s.tokens_y}};
}

}  // namespace docsimp
