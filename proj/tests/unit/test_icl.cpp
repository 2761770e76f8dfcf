#include <gtest/gtest.h>
#include <httplib.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <thread>

#include "docsimp/error.hpp"
#include "docsimp/icl.hpp"
#include "fixtures.hpp"

using namespace docsimp;
using docsimp::testing::data_dir;

namespace {

ExamplePair pair(std::string c, std::string s, std::optional<CoarsePos> pos = std::nullopt) {
  return {std::move(c), std::move(s), std::nullopt, "t", pos};
}

const char* kSentences[] = {
    "The cat ran.",
    "A dog slept, and it snored.",
    "Although it rained, we walked to the market because we needed bread.",
    "Officials carefully scrutinized the extraordinarily complicated regulations.",
    "She smiled.",
    "The committee, after lengthy debate, approved the budget, but several members objected.",
    "Birds fly south in winter.",
    "When the bell rang, the children, who were hungry, ran outside.",
    "It is raining again today.",
    "Happiness is a choice.",
};

std::string random_paragraph(std::mt19937_64& rng) {
  std::string out;
  for (int i = 0, n = 1 + static_cast<int>(rng() % 3); i < n; ++i)
    out += (i ? " " : "") + std::string(kSentences[rng() % std::size(kSentences)]);
  return out;
}

}  // namespace

TEST(Embedding, SelfSimilarityIsOne) {
  LocalNgramEmbedder e;
  auto v = e.embed("The council met to discuss the library.");
  EXPECT_NEAR(cosine(v, v), 1.0, 1e-12);
  EXPECT_EQ(v.size(), LocalNgramEmbedder::kDefaultDimension);
}

TEST(Embedding, DisjointCharactersAreOrthogonal) {
  LocalNgramEmbedder e;
  EXPECT_EQ(cosine(e.embed("aaaa"), e.embed("zzzz")), 0.0);
}

TEST(Embedding, EmptyTextRejected) {
  LocalNgramEmbedder e;
  try {
    e.embed("");
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::invalid_argument);
  }
}

TEST(Embedding, ShortTextsStillEmbed) {
  LocalNgramEmbedder e;
  EXPECT_NEAR(cosine(e.embed("a"), e.embed("A")), 1.0, 1e-12);
}

TEST(Embedding, IdfChangesWeightsButKeepsUnitNorm) {
  LocalNgramEmbedder e;
  std::vector<std::string> corpus = {"the cat", "the dog", "the bird"};
  e.fit_idf(corpus);
  auto v = e.embed("the cat");
  double norm = 0;
  for (double x : v) norm += x * x;
  EXPECT_NEAR(norm, 1.0, 1e-12);
}

TEST(SelectByEmbedding, QueryInBankComesFirst) {
  auto bank = load_bank_jsonl(data_dir() / "banks/paragraph.jsonl", BankKind::paragraph_meaning);
  LocalNgramEmbedder e;
  for (const auto& entry : bank.entries()) {
    auto got = select_by_embedding(entry.complex, bank, 1, e);
    ASSERT_EQ(got.size(), 1u);
    EXPECT_EQ(got[0], entry);
  }
}

TEST(SelectByEmbedding, ClampsAndMatchesBruteForceOrder) {
  ExampleBank bank(BankKind::paragraph_meaning,
                   {pair("river boats float", "boats float"), pair("mountain goats climb", "goats climb"),
                    pair("river fish swim", "fish swim")});
  LocalNgramEmbedder e;
  const std::string query = "river boats swim";
  auto got = select_by_embedding(query, bank, 10, e);
  ASSERT_EQ(got.size(), 3u);

  std::vector<std::size_t> order = {0, 1, 2};
  auto q = e.embed(query);
  std::vector<double> sims;
  for (const auto& p : bank.entries()) sims.push_back(cosine(q, e.embed(p.complex)));
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return sims[a] > sims[b]; });
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(got[i], bank.entries()[order[i]]);

  bank.build_index(e);
  EXPECT_EQ(select_by_embedding(query, bank, 10, e), got);
}

TEST(SelectByEmbedding, ShuffleOnlyAffectsTies) {
  std::mt19937_64 rng(4);
  std::vector<ExamplePair> entries;
  for (const auto* s : kSentences) entries.push_back(pair(s, s));
  LocalNgramEmbedder e;
  for (int round = 0; round < 20; ++round) {
    auto shuffled = entries;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto query = random_paragraph(rng);
    auto a = select_by_embedding(query, ExampleBank(BankKind::paragraph_meaning, entries), 3, e);
    auto b = select_by_embedding(query, ExampleBank(BankKind::paragraph_meaning, shuffled), 3, e);
    auto key = [](const ExamplePair& p) { return p.complex; };
    std::vector<std::string> ka, kb;
    std::transform(a.begin(), a.end(), std::back_inserter(ka), key);
    std::transform(b.begin(), b.end(), std::back_inserter(kb), key);
    std::sort(ka.begin(), ka.end());
    std::sort(kb.begin(), kb.end());
    EXPECT_EQ(ka, kb) << query;
  }
}

TEST(SelectByEmbedding, EmptyBankRejected) {
  LocalNgramEmbedder e;
  try {
    select_by_embedding("q", ExampleBank(BankKind::paragraph_meaning, {}), 1, e);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::empty_bank);
  }
}

TEST(Structure, HandTracedPair) {
  // "The cat ran." : 4 tokens, 1 clause, POS {other .5, noun .25, verb .25}, fw .25
  // "A dog slept, and it snored." : 8 tokens, 2 clauses,
  //   POS {other .625, noun .125, verb .25}, fw .375
  // length 4/8, clause 1/2, pos 1 - (.125 + .125)/2, fw 1 - .125
  const double expected = (0.5 + 0.5 + 0.875 + 0.875) / 4.0;
  EXPECT_NEAR(structure_similarity("The cat ran.", "A dog slept, and it snored."), expected, 1e-9);
}

TEST(Structure, Features) {
  auto f = structure_features("A dog slept, and it snored.");
  EXPECT_EQ(f.length, 8);
  EXPECT_EQ(f.clause_count, 2);
  EXPECT_DOUBLE_EQ(f.function_word_ratio, 0.375);
  EXPECT_DOUBLE_EQ(f.pos_histogram.at(CoarsePos::verb), 0.25);
}

TEST(Structure, IdentitySymmetryRange) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 200; ++i) {
    auto a = random_paragraph(rng);
    auto b = random_paragraph(rng);
    double ab = structure_similarity(a, b);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
    EXPECT_DOUBLE_EQ(ab, structure_similarity(b, a));
    EXPECT_DOUBLE_EQ(structure_similarity(a, a), 1.0);
  }
}

TEST(Structure, SelectPrefersSimilarShape) {
  auto bank = load_bank_jsonl(data_dir() / "banks/structure.jsonl", BankKind::sentence_structure);
  auto got = select_by_structure("The dog sat.", bank, 1);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].complex, "The cat ran.");
}

TEST(Pos, CoarseTags) {
  EXPECT_EQ(coarse_pos("quickly"), CoarsePos::adverb);
  EXPECT_EQ(coarse_pos("education"), CoarsePos::noun);
  EXPECT_EQ(coarse_pos("kindness"), CoarsePos::noun);
  EXPECT_EQ(coarse_pos("organize"), CoarsePos::verb);
  EXPECT_EQ(coarse_pos("walked"), CoarsePos::verb);
  EXPECT_EQ(coarse_pos("went"), CoarsePos::verb);
  EXPECT_EQ(coarse_pos("is"), CoarsePos::verb);
  EXPECT_EQ(coarse_pos("famous"), CoarsePos::adjective);
  EXPECT_EQ(coarse_pos("careful"), CoarsePos::adjective);
  EXPECT_EQ(coarse_pos("readable"), CoarsePos::adjective);
  EXPECT_EQ(coarse_pos("the"), CoarsePos::other);
  EXPECT_EQ(coarse_pos(","), CoarsePos::other);
  EXPECT_EQ(coarse_pos("1999"), CoarsePos::other);
  EXPECT_EQ(coarse_pos("table"), CoarsePos::noun);
}

TEST(Lexical, RoundRobinOverClasses) {
  ExampleBank two(BankKind::lexical, {pair("v", "v", CoarsePos::verb), pair("n", "n", CoarsePos::noun)});
  auto got = select_lexical_examples(two, 2);
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0].complex, "n");
  EXPECT_EQ(got[1].complex, "v");
  EXPECT_EQ(select_lexical_examples(two, 1)[0].complex, "n");

  ExampleBank same(BankKind::lexical, {pair("a", "a", CoarsePos::verb), pair("b", "b", CoarsePos::verb),
                                       pair("c", "c", CoarsePos::verb), pair("d", "d", CoarsePos::verb)});
  auto three = select_lexical_examples(same, 3);
  ASSERT_EQ(three.size(), 3u);
  EXPECT_EQ(three[0].complex, "a");
  EXPECT_EQ(three[2].complex, "c");
}

TEST(Lexical, InfersClassWhenUnannotated) {
  EXPECT_EQ(lexical_pos(pair("She spoke eloquently.", "She spoke well.")), CoarsePos::adverb);
  auto bank = load_bank_jsonl(data_dir() / "banks/lexical.jsonl", BankKind::lexical);
  auto got = select_lexical_examples(bank, 5);
  ASSERT_EQ(got.size(), 5u);
  EXPECT_EQ(lexical_pos(got[0]), CoarsePos::noun);
  EXPECT_EQ(lexical_pos(got[1]), CoarsePos::verb);
  EXPECT_EQ(lexical_pos(got[2]), CoarsePos::adjective);
  EXPECT_EQ(lexical_pos(got[3]), CoarsePos::adverb);
  EXPECT_EQ(lexical_pos(got[4]), CoarsePos::verb);
}

TEST(Banks, LoadJsonl) {
  auto bank = load_bank_jsonl(data_dir() / "banks/paragraph.jsonl", BankKind::paragraph_meaning);
  EXPECT_EQ(bank.size(), 4u);
  EXPECT_TRUE(bank.entries()[0].reasoning);
  EXPECT_FALSE(bank.entries()[1].reasoning);
  EXPECT_EQ(bank.entries()[0].source_tag, "paragraph");

  docsimp::testing::TempDir dir;
  docsimp::testing::write_text(dir / "bad.jsonl", "{\"complex\": \"x\"}\n");
  EXPECT_THROW(load_bank_jsonl(dir / "bad.jsonl", BankKind::lexical), Error);
  docsimp::testing::write_text(dir / "badpos.jsonl", "{\"complex\": \"x\", \"simple\": \"y\", \"pos\": \"pronoun\"}\n");
  EXPECT_THROW(load_bank_jsonl(dir / "badpos.jsonl", BankKind::lexical), Error);
}

TEST(Format, ExampleBlocks) {
  ExamplePair p{"Hard words.", "Easy words.", std::string("Swap the words."), "t", std::nullopt};
  EXPECT_EQ(format_example(p, BankKind::lexical),
            "Complex sentence: Hard words.\nReasoning: Swap the words.\nSimple sentence: Easy words.");
  p.reasoning.reset();
  EXPECT_EQ(format_example(p, BankKind::paragraph_meaning),
            "Complex paragraph: Hard words.\nSimple paragraph: Easy words.");
  EXPECT_EQ(format_document_example(p), "Complex document:\nHard words.\nSimple document:\nEasy words.");
}

TEST(Cot, ReasoningFromScript) {
  LlmGateway gw(make_replay_backend({{std::nullopt, "The phrase X is hard, so it becomes Y."}}));
  auto r = generate_cot(pair("X here.", "Y here."), gw, PromptCatalog(), {});
  EXPECT_EQ(r.pair.reasoning, "The phrase X is hard, so it becomes Y.");
  EXPECT_EQ(r.log.attempts.size(), 1u);
}

TEST(Cot, RetriesThenSucceeds) {
  LlmGateway gw(make_replay_backend({{std::nullopt, ""}, {std::nullopt, ""}, {std::nullopt, "Reasoning: fine."}}));
  auto r = generate_cot(pair("X.", "Y."), gw, PromptCatalog(), {}, 3);
  EXPECT_EQ(r.pair.reasoning, "fine.");
  EXPECT_EQ(r.log.attempts.size(), 3u);
}

TEST(Cot, AllAttemptsRejected) {
  LlmGateway gw(make_replay_backend({{std::nullopt, ""}, {std::nullopt, "I cannot do that."}}));
  try {
    generate_cot(pair("X.", "Y."), gw, PromptCatalog(), {}, 2);
    FAIL();
  } catch (const CotGenerationError& e) {
    EXPECT_EQ(e.code(), ErrorCode::cot_generation);
    EXPECT_EQ(e.log().attempts.size(), 2u);
  }
}

TEST(Cot, ExistingReasoningRejected) {
  LlmGateway gw(make_replay_backend({{std::nullopt, "x"}}));
  ExamplePair p = pair("X.", "Y.");
  p.reasoning = "already";
  try {
    generate_cot(p, gw, PromptCatalog(), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_argument);
  }
  EXPECT_EQ(gw.ledger_snapshot().call_count, 0);
}

TEST(Cot, PromptCarriesThePair) {
  std::string seen;
  LlmGateway gw(std::make_shared<CallbackBackend>([&](const ChatRequest& r) {
    seen = r.messages.back().content;
    return "because";
  }));
  generate_cot(pair("Complex one.", "Simple one."), gw, PromptCatalog(), {});
  EXPECT_NE(seen.find("Complex sentence: Complex one.\nSimple: Simple one."), std::string::npos);
  EXPECT_TRUE(seen.ends_with("The reasoning of this pair:"));
}

TEST(HttpEmbedding, WireFormatAndFixedDimension) {
  httplib::Server server;
  int calls = 0;
  server.Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
    auto body = nlohmann::json::parse(req.body);
    EXPECT_EQ(body["model"], "embed-model");
    ++calls;
    std::vector<double> v = calls == 3 ? std::vector<double>{1, 0} : std::vector<double>{1, 0, 0};
    res.set_content(nlohmann::json{{"data", {{{"embedding", v}}}}}.dump(), "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  HttpEmbeddingProvider p(HttpEndpoint{"http://127.0.0.1:" + std::to_string(port) + "/v1", ""}, "embed-model");
  EXPECT_EQ(p.embed("one").size(), 3u);
  EXPECT_EQ(p.dimension(), 3u);
  EXPECT_EQ(p.embed("two").size(), 3u);
  EXPECT_THROW(p.embed("three"), ProviderError);
  server.stop();
  t.join();
}
