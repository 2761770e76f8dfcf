#include <gtest/gtest.h>

#include <random>

#include "docsimp/error.hpp"
#include "docsimp/metrics.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace docsimp;
namespace t = docsimp::testing;

namespace {

std::vector<std::string> refs(std::initializer_list<const char*> list) { return {list.begin(), list.end()}; }

void expect_matches_oracle(const std::string& in, const std::string& out, const std::vector<std::string>& rs) {
  std::vector<std::vector<std::string>> rt;
  for (const auto& r : rs) rt.push_back(metric_tokens(r));
  auto want = t::sari_oracle(metric_tokens(in), metric_tokens(out), rt);
  auto got = sari(in, out, rs);
  for (std::size_t n = 0; n < 4; ++n) {
    EXPECT_NEAR(got.per_n[n].add_f1, want.add[n], 1e-9) << n << " | " << in << " | " << out;
    EXPECT_NEAR(got.per_n[n].keep_f1, want.keep[n], 1e-9) << n << " | " << in << " | " << out;
    EXPECT_NEAR(got.per_n[n].del_precision, want.del[n], 1e-9) << n << " | " << in << " | " << out;
  }
  EXPECT_NEAR(got.aggregate, want.aggregate, 1e-9);
}

}  // namespace

TEST(Sari, MatchesOracleOnRandomInputs) {
  std::mt19937_64 rng(101);
  for (int round = 0; round < 300; ++round) {
    auto in = t::join_words(t::random_words(rng, 10));
    auto out = t::join_words(t::random_words(rng, 10));
    std::vector<std::string> rs;
    for (int k = 0, n = 1 + static_cast<int>(rng() % 3); k < n; ++k) rs.push_back(t::join_words(t::random_words(rng, 10)));
    expect_matches_oracle(in, out, rs);
  }
}

TEST(Sari, MatchesOracleOnSentences) {
  expect_matches_oracle("About 95 species are currently accepted.", "About 95 species are now accepted.",
                        refs({"About 95 species are currently known.", "About 95 species are now accepted.",
                              "95 species are now accepted."}));
  expect_matches_oracle("The cat chased the mouse.", "The cat ran after the mouse.",
                        refs({"The cat ran after a mouse."}));
}

TEST(Sari, IdentityAgainstItselfIsPerfect) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    auto text = t::join_words(t::random_words(rng, 12, 10));
    std::vector<std::string> r = {text};
    EXPECT_DOUBLE_EQ(sari(text, text, r).aggregate, 100.0) << text;
  }
}

TEST(Sari, RangeAndCaseInsensitivity) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 200; ++i) {
    auto in = t::join_words(t::random_words(rng, 8));
    auto out = t::join_words(t::random_words(rng, 8));
    std::vector<std::string> r = {t::join_words(t::random_words(rng, 8))};
    double s = sari(in, out, r).aggregate;
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 100.0);
  }
  std::vector<std::string> r = {"The Cat sat."};
  EXPECT_DOUBLE_EQ(sari("THE CAT SAT DOWN.", "the cat sat.", r).aggregate,
                   sari("the cat sat down.", "the cat sat.", r).aggregate);
}

TEST(Sari, EmptyReferencesRejected) {
  try {
    sari("a", "b", std::vector<std::string>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::empty_references);
  }
  EXPECT_THROW(sari_mean_single("a", "b", std::vector<std::string>{}), Error);
}

TEST(Sari, MeanSingleAveragesPerReference) {
  auto rs = refs({"the cat sat.", "a dog ran away."});
  auto a = sari("the cat sat on a mat.", "the cat sat.", std::vector<std::string>{rs[0]});
  auto b = sari("the cat sat on a mat.", "the cat sat.", std::vector<std::string>{rs[1]});
  auto m = sari_mean_single("the cat sat on a mat.", "the cat sat.", rs);
  EXPECT_NEAR(m.aggregate, (a.aggregate + b.aggregate) / 2, 1e-9);
}

TEST(DSari, NoPenaltyWhenLengthsMatch) {
  auto r = refs({"The cat sat. It was happy."});
  EXPECT_NEAR(d_sari("The big cat sat down. It was very happy.", "The cat sat. It was happy.", r),
              sari("The big cat sat down. It was very happy.", "The cat sat. It was happy.", r).aggregate, 1e-9);
}

TEST(DSari, PenaltyScalesAddAndKeep) {
  const std::string in = "The big cat sat down. It was very happy.";
  const std::string out = "The cat sat.";
  auto r = refs({"The cat sat. It was happy."});
  auto s = sari(in, out, r);
  // Output has 4 tokens and 1 sentence; the reference has 8 tokens and 2.
  const double penalty = (4.0 / 8.0) * (1.0 / 2.0);
  double total = 0;
  for (const auto& c : s.per_n) total += (penalty * c.add_f1 + penalty * c.keep_f1 + c.del_precision) / 3.0;
  EXPECT_NEAR(d_sari(in, out, r), 100.0 * total / 4.0, 1e-9);
  EXPECT_LE(d_sari(in, out, r), s.aggregate);
}

TEST(Fkgl, HandComputed) {
  // 5 words, 1 sentence, 5 syllables.
  EXPECT_NEAR(fkgl("The cat chased the mouse."), 0.39 * 5 + 11.8 * 1 - 15.59, 1e-9);
  EXPECT_NEAR(fkgl("The cat chased the mouse."), -1.84, 1e-9);
  // 4 words, 2 sentences, 8 syllables.
  EXPECT_NEAR(fkgl("Simplification helps. Cats sit."), 0.39 * 2 + 11.8 * 8.0 / 4 - 15.59, 1e-9);
}

TEST(Fkgl, EmptyTextRejected) {
  EXPECT_THROW(fkgl(""), Error);
  EXPECT_THROW(fkgl("..."), Error);
}

TEST(Judge, ParsesVerdictLine) {
  auto a = parse_judge_verdict("Reasoning content: two is cleaner.\nThe better-simplified document: Document 2");
  ASSERT_TRUE(a.accepted());
  EXPECT_EQ(a.value().winner, Winner::document_2);
  EXPECT_EQ(a.value().reasoning, "two is cleaner.");

  auto b = parse_judge_verdict("Both are okay.\n\nDocument 1.");
  ASSERT_TRUE(b.accepted());
  EXPECT_EQ(b.value().winner, Winner::document_1);

  auto c = parse_judge_verdict("[Reasoning content: fine. The better-simplified document: (Document 1)]");
  ASSERT_TRUE(c.accepted());
  EXPECT_EQ(c.value().winner, Winner::document_1);
  EXPECT_EQ(c.value().reasoning, "fine.");
}

TEST(Judge, RejectsUnclearVerdicts) {
  for (const char* raw : {"", "Both documents are good.", "I prefer Document 2 because it is short.\nThanks",
                          "Document 2 is better than Document 1"}) {
    auto v = parse_judge_verdict(raw);
    ASSERT_FALSE(v.accepted()) << raw;
    EXPECT_EQ(v.rejection().reason, RejectReason::invalid_verdict);
  }
}

TEST(Judge, SwapMapsVerdictBack) {
  // First call prefers the candidate in position 2, the swapped call
  // prefers the candidate in position 1.
  LlmGateway gw(make_replay_backend(
      {{std::nullopt, "x\nThe better-simplified document: Document 2"}, {std::nullopt, "y\nDocument 1"}}));
  auto results = judge_documents("base", "cand", gw, PromptCatalog(), {}, 2, true);
  ASSERT_EQ(results.size(), 2u);
  auto verdicts = parsed_verdicts(results);
  ASSERT_EQ(verdicts.size(), 2u);
  EXPECT_EQ(verdicts[0].winner, Winner::document_2);
  EXPECT_EQ(verdicts[1].winner, Winner::document_2);
  EXPECT_EQ(gw.ledger_snapshot().per_stage_counts.at("judge"), 2);
}

TEST(Judge, FailureAfterRejectedAttempts) {
  LlmGateway gw(make_replay_backend({{std::nullopt, "no verdict"}, {std::nullopt, ""}, {std::nullopt, "Document 3"}}));
  auto r = gpt_judge("a", "b", gw, PromptCatalog(), {}, 3);
  EXPECT_FALSE(r.verdict);
  EXPECT_TRUE(r.log.fallback_used);
  EXPECT_EQ(r.log.attempts.size(), 3u);
}

TEST(Judge, WinRate) {
  auto v = [](Winner w) { return JudgeVerdict{w, "", ""}; };
  std::vector<JudgeVerdict> verdicts = {v(Winner::document_2), v(Winner::document_2), v(Winner::document_1),
                                        v(Winner::document_2)};
  EXPECT_DOUBLE_EQ(win_rate(verdicts), 75.0);
  try {
    win_rate(std::vector<JudgeVerdict>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::no_verdicts);
  }
}

TEST(Report, ScoreDocumentStripsSubheadings) {
  auto r = refs({"The cat sat."});
  auto with = score_document("d", "The cat sat on the mat.", "## Cats\n\nThe cat sat.", r);
  auto plain = score_document("d", "The cat sat on the mat.", "The cat sat.", r);
  EXPECT_DOUBLE_EQ(with.sari.aggregate, plain.sari.aggregate);
  EXPECT_DOUBLE_EQ(with.fkgl, plain.fkgl);
  EXPECT_EQ(with.token_stats_out.token_count, 4);
  auto kept = score_document("d", "The cat sat on the mat.", "## Cats\n\nThe cat sat.", r, true);
  EXPECT_EQ(kept.token_stats_out.paragraph_count, 2);
  auto j = to_json(with);
  EXPECT_EQ(j["doc_id"], "d");
  EXPECT_FALSE(j.contains("gpt"));
}

TEST(Report, SummaryTable) {
  MetricReport a, b;
  a.doc_id = "a";
  a.sari.aggregate = 40;
  a.d_sari = 30;
  a.fkgl = 5;
  a.gpt = 100;
  b.doc_id = "b";
  b.sari.aggregate = 50;
  b.d_sari = 20;
  b.fkgl = 7;
  b.gpt = 0;
  std::vector<MetricReport> rows = {a, b};
  EXPECT_EQ(summary_table(rows),
            "doc_id\tSA\tDSA\tFKG\tGPT\n"
            "a\t40.00\t30.00\t5.00\t100.00\n"
            "b\t50.00\t20.00\t7.00\t0.00\n"
            "mean\t45.00\t25.00\t6.00\t50.00\n");
}

TEST(Report, ScoreSidecar) {
  t::TempDir dir;
  t::write_text(dir / "bart.jsonl", "{\"doc_id\": \"a\", \"score\": -2.5}\n\n{\"doc_id\": \"b\", \"score\": 1}\n");
  auto scores = load_score_sidecar(dir / "bart.jsonl");
  EXPECT_DOUBLE_EQ(scores.at("a"), -2.5);
  EXPECT_EQ(scores.size(), 2u);
  t::write_text(dir / "bad.jsonl", "{\"doc_id\": \"a\"}\n");
  EXPECT_THROW(load_score_sidecar(dir / "bad.jsonl"), Error);
}
