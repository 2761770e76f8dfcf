#include <gtest/gtest.h>

#include <set>

#include "docsimp/corpus.hpp"
#include "docsimp/error.hpp"
#include "fixtures.hpp"

using namespace docsimp;
namespace t = docsimp::testing;

namespace {

std::string manifest_error(const std::string& contents) {
  t::TempDir dir;
  t::write_text(dir / "m.jsonl", contents);
  try {
    load_manifest(dir / "m.jsonl");
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::manifest);
    return e.what();
  }
  ADD_FAILURE() << "manifest accepted: " << contents;
  return {};
}

std::vector<ManifestEntry> numbered_entries(int n) {
  std::vector<ManifestEntry> out;
  for (int i = 0; i < n; ++i) out.push_back({"e" + std::to_string(i), "x", {}, std::nullopt, std::nullopt});
  return out;
}

std::vector<CorpusRow> fixture_rows() {
  std::vector<CorpusRow> rows;
  for (const auto& e : load_manifest(t::data_dir() / "manifest.jsonl")) rows.push_back(corpus_row(load_entry(e)));
  return rows;
}

}  // namespace

TEST(Manifest, LoadsAndResolvesPaths) {
  auto entries = load_manifest(t::data_dir() / "manifest.jsonl");
  ASSERT_EQ(entries.size(), 4u);
  EXPECT_EQ(entries[0].id, "d1");
  EXPECT_EQ(entries[0].source_path, t::data_dir() / "corpus/d1.txt");
  EXPECT_EQ(entries[3].reference_paths.size(), 2u);
  EXPECT_EQ(entries[1].collection, Collection::newsela);
  EXPECT_FALSE(entries[1].bucket);
}

TEST(Manifest, Errors) {
  EXPECT_NE(manifest_error("{\"id\": \"a\", \"source_path\": \"x\"}\nnot json\n").find(":2:"), std::string::npos);
  EXPECT_NE(manifest_error("{\"source_path\": \"x\"}\n").find("'id'"), std::string::npos);
  EXPECT_NE(manifest_error("{\"id\": \"a\"}\n").find("source_path"), std::string::npos);
  EXPECT_NE(manifest_error("{\"id\": \"a\", \"source_path\": \"x\"}\n{\"id\": \"a\", \"source_path\": \"y\"}\n")
                .find("duplicate id 'a'"),
            std::string::npos);
  EXPECT_NE(manifest_error("{\"id\": \"a\", \"source_path\": \"x\", \"extra\": 1}\n").find("unknown field"),
            std::string::npos);
  EXPECT_NE(manifest_error("{\"id\": \"a\", \"source_path\": \"x\", \"bucket\": \"C\"}\n").find("unknown bucket"),
            std::string::npos);
  try {
    load_manifest("/nonexistent/manifest.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::manifest);
  }
}

TEST(Buckets, NewselaBoundary) {
  TokenStats s;
  s.token_count = 999;
  EXPECT_EQ(assign_bucket(Collection::newsela, s), Bucket::newsela_a);
  s.token_count = 1000;
  EXPECT_EQ(assign_bucket(Collection::newsela, s), Bucket::newsela_b);
}

TEST(Buckets, WikiWindow) {
  TokenStats s;
  for (long n : {299L, 501L, 0L}) {
    s.token_count = n;
    EXPECT_FALSE(assign_bucket(Collection::wiki, s)) << n;
  }
  for (long n : {300L, 400L, 500L}) {
    s.token_count = n;
    EXPECT_EQ(assign_bucket(Collection::wiki, s), Bucket::wiki_auto) << n;
  }
  ManifestEntry e{"w", "x", {}, Bucket::wiki_auto, std::nullopt};
  s.token_count = 350;
  EXPECT_EQ(assign_bucket(e, s), Bucket::wiki_auto);
  EXPECT_EQ(bucket_from_string(to_string(Bucket::newsela_b)), Bucket::newsela_b);
}

TEST(Sampling, SubsetWithoutRepeats) {
  auto entries = numbered_entries(20);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto s = sample_entries(entries, 7, seed);
    ASSERT_EQ(s.size(), 7u);
    std::set<std::string> ids;
    for (const auto& e : s) ids.insert(e.id);
    EXPECT_EQ(ids.size(), 7u);
    EXPECT_EQ(s, sample_entries(entries, 7, seed));
  }
}

TEST(Sampling, ShorterSampleIsPrefix) {
  auto entries = numbered_entries(15);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto big = sample_entries(entries, 10, seed);
    auto small = sample_entries(entries, 4, seed);
    EXPECT_TRUE(std::equal(small.begin(), small.end(), big.begin()));
  }
}

TEST(Sampling, FirstPickRoughlyUniform) {
  auto entries = numbered_entries(5);
  std::map<std::string, int> counts;
  const int trials = 5000;
  for (int seed = 0; seed < trials; ++seed) counts[sample_entries(entries, 1, seed)[0].id]++;
  // Chi-square with 4 degrees of freedom; 18.47 is the 0.999 quantile.
  double chi = 0;
  for (const auto& e : entries) {
    double d = counts[e.id] - trials / 5.0;
    chi += d * d / (trials / 5.0);
  }
  EXPECT_LT(chi, 18.47);
}

TEST(Sampling, Bounds) {
  auto entries = numbered_entries(3);
  EXPECT_TRUE(sample_entries(entries, 0, 1).empty());
  EXPECT_EQ(sample_entries(entries, 3, 1).size(), 3u);
  try {
    sample_entries(entries, 4, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_argument);
  }
}

TEST(Stats, FixtureMeans) {
  auto rows = fixture_rows();
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].source.paragraph_count, 2);
  EXPECT_EQ(rows[0].source.sentence_count, 3);
  EXPECT_EQ(rows[0].source.token_count, 12);
  EXPECT_EQ(rows[1].source.token_count, 13);
  EXPECT_EQ(rows[1].references[0].sentence_count, 2);
  EXPECT_EQ(rows[3].source.sentence_count, 2);
  EXPECT_EQ(rows[3].references.size(), 2u);

  auto s = corpus_stats(rows);
  EXPECT_EQ(s.documents, 4u);
  EXPECT_EQ(s.documents_with_references, 4u);
  EXPECT_DOUBLE_EQ(s.paragraphs_x, 1.75);
  EXPECT_DOUBLE_EQ(s.sentences_x, 2.75);
  EXPECT_DOUBLE_EQ(s.tokens_x, 12.25);
  EXPECT_DOUBLE_EQ(s.paragraphs_y, 1.2);
  EXPECT_DOUBLE_EQ(s.sentences_y, 1.6);
  EXPECT_DOUBLE_EQ(s.tokens_y, 6.6);
}

TEST(Stats, Tsv) {
  auto tsv = stats_tsv(corpus_stats(fixture_rows()));
  EXPECT_NE(tsv.find("Paragraphs-X\t1.75"), std::string::npos);
  EXPECT_NE(tsv.find("Tokens-Y\t6.60"), std::string::npos);
  EXPECT_EQ(to_json(corpus_stats(fixture_rows()))["Tokens-X"], 12.25);
}

TEST(LoadEntry, MissingFileIsIoError) {
  ManifestEntry e{"x", "/nonexistent/file.txt", {}, std::nullopt, std::nullopt};
  try {
    load_entry(e);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::io);
  }
}
