#include <gtest/gtest.h>

#include <random>

#include "docsimp/error.hpp"
#include "docsimp/prompts.hpp"
#include "fixtures.hpp"

using namespace docsimp;

namespace {

Bindings dummy_bindings(const PromptTemplate& t) {
  Bindings b;
  for (const auto& p : t.required_placeholders) b[p] = "value of " + p;
  return b;
}

}  // namespace

TEST(Builtins, FigureTextPresent) {
  EXPECT_NE(load_builtin(TemplateName::summarizer).user_text.find(
                "retaining only the most important information"),
            std::string::npos);
  EXPECT_NE(load_builtin(TemplateName::ic).user_text.find("subheadings starting with ##"),
            std::string::npos);
  EXPECT_NE(load_builtin(TemplateName::p2).user_text.find("rather than just providing a brief summary"),
            std::string::npos);
  EXPECT_NE(load_builtin(TemplateName::p1).user_text.find("You are a professional simplified text writer"),
            std::string::npos);
  EXPECT_NE(load_builtin(TemplateName::judge).user_text.find(
                "The better-simplified document: (Document 1 or Document 2)"),
            std::string::npos);
}

TEST(Builtins, UnknownNameRejected) {
  try {
    load_builtin(std::string_view("nope"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unknown_template);
  }
}

TEST(Builtins, NamesRoundTrip) {
  for (auto name : kAllTemplates) {
    EXPECT_EQ(template_from_string(to_string(name)), name);
    EXPECT_EQ(load_builtin(to_string(name)).name, name);
  }
}

TEST(Builtins, PlaceholderSets) {
  auto names = [](TemplateName n) { return load_builtin(n).required_placeholders; };
  using S = std::set<std::string>;
  EXPECT_EQ(names(TemplateName::summarizer), S({"SOURCE_DOCUMENT"}));
  EXPECT_EQ(names(TemplateName::paragraph_simplifier), S({"SUMMARY", "PARAGRAPH"}));
  EXPECT_EQ(names(TemplateName::topic), S({"SUBHEADING", "PARAGRAPH"}));
  EXPECT_EQ(names(TemplateName::lexical), S({"SENTENCE"}));
  EXPECT_EQ(names(TemplateName::judge), S({"BASELINE_DOCUMENT", "CANDIDATE_DOCUMENT"}));
  EXPECT_EQ(names(TemplateName::ic), S({"DOCUMENT_EXAMPLE", "RAW_TEXT"}));
  EXPECT_EQ(load_builtin(TemplateName::topic).example_slots(), 2);
  EXPECT_EQ(load_builtin(TemplateName::summarizer).example_slots(), 0);
}

// Pinned so any edit to a builtin template is deliberate.
TEST(Builtins, ChecksumsPinned) {
  const std::map<std::string, std::string> pinned = {
      {"cot_generator", "fa42908f0ffefc4efda2537bf82c64762153659294836d5145fe5a1f52585c2e"},
      {"discourse", "30b5cdfcf26074cac3f800e610f9363230cd6291d3e84b3fb2f6458266261100"},
      {"discourse_single_paragraph", "72d2aba69cbd04b1fcbafc35aaa676e6e979a06b9966b8b0aa547fc1a1e6f894"},
      {"ic", "75070034cb12d3da7b01ba00e7789512095a949ba54eeb56df7223e47cd710fd"},
      {"judge", "7aca7f5f7bd6eb114932cff986fa35fc46032aba68a23f19d6b84e902314bcd4"},
      {"lexical", "766a1fe7a3ef3ef604c869620629857878dbb6fbe59884e92e940888ae3801d3"},
      {"p1", "7f6cdd101cc4216a64b41a7f51398eba5365e175064c5aa207a068080cdd0c62"},
      {"p2", "6de45693128fbf0e7d473d637cff3efa7209ffaac8c6f4f7eb6e425670e3d1a0"},
      {"paragraph_simplifier", "7a794fb3c2e33688eb59075755a94a6c56454e9bcb6398cd1eeae642fb24044d"},
      {"summarizer", "8ab3a074a5053f3679936df165fca75aa2938838cbd33eb1d276f856779dda2d"},
      {"topic", "a2969f5196ac4050c50ac5c9e3cf1ea62bda0cd1d177a492f87578595b2fef0b"}
  };
  EXPECT_EQ(PromptCatalog().checksums(), pinned);
}

TEST(Render, SummarizerShape) {
  auto r = render(load_builtin(TemplateName::summarizer), {{"SOURCE_DOCUMENT", "Hi."}});
  ASSERT_EQ(r.messages.size(), 2u);
  EXPECT_EQ(r.messages[0].role, Role::system);
  EXPECT_EQ(r.messages[1].role, Role::user);
  EXPECT_TRUE(r.messages[1].content.ends_with("Summary:"));
  EXPECT_NE(r.messages[1].content.find("Source document: Hi."), std::string::npos);
}

TEST(Render, MissingAndExtraBindings) {
  const auto topic = load_builtin(TemplateName::topic);
  try {
    render(topic, {{"PARAGRAPH", "p"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::missing_binding);
  }
  try {
    render(topic, {{"PARAGRAPH", "p"}, {"SUBHEADING", "s"}, {"EXTRA", "x"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::extra_binding);
  }
}

TEST(Render, EmptyExamplesSlotDisappears) {
  auto r = render(load_builtin(TemplateName::lexical), {{"SENTENCE", "It rained."}});
  const auto& user = r.messages[1].content;
  EXPECT_EQ(user.find("[Examples]"), std::string::npos);
  EXPECT_EQ(user.find("\n\n"), std::string::npos);
  EXPECT_TRUE(user.starts_with("Sentence to be simplified:\nIt rained.\n"));
}

TEST(Render, ExamplesFillSlots) {
  auto r = render(load_builtin(TemplateName::lexical), {{"SENTENCE", "S."}}, {"EX ONE", "EX TWO"});
  EXPECT_TRUE(r.messages[1].content.starts_with("EX ONE\n\nEX TWO\n"));

  auto t = render_slots(load_builtin(TemplateName::topic), {{"SUBHEADING", "H"}, {"PARAGRAPH", "P."}},
                        {{"MEANING EXAMPLE"}, {"STRUCTURE EXAMPLE"}});
  const auto& user = t.messages[1].content;
  auto meaning = user.find("MEANING EXAMPLE");
  auto structure = user.find("STRUCTURE EXAMPLE");
  ASSERT_NE(meaning, std::string::npos);
  ASSERT_NE(structure, std::string::npos);
  EXPECT_LT(meaning, user.find("When it comes to the structure"));
  EXPECT_GT(structure, user.find("When it comes to the structure"));
}

TEST(Render, NoPlaceholderLeftInAnyBuiltin) {
  for (auto name : kAllTemplates) {
    auto t = load_builtin(name);
    auto r = render(t, dummy_bindings(t));
    EXPECT_TRUE(find_placeholders(r.text()).empty()) << to_string(name);
    EXPECT_EQ(r.text().find("[Examples]"), std::string::npos) << to_string(name);
  }
}

TEST(Render, DeterministicAndInjective) {
  std::mt19937_64 rng(9);
  const auto t = load_builtin(TemplateName::paragraph_simplifier);
  for (int i = 0; i < 100; ++i) {
    Bindings a = {{"SUMMARY", std::to_string(rng() % 50)}, {"PARAGRAPH", std::to_string(rng() % 50)}};
    Bindings b = {{"SUMMARY", std::to_string(rng() % 50)}, {"PARAGRAPH", std::to_string(rng() % 50)}};
    EXPECT_EQ(render(t, a).text(), render(t, a).text());
    EXPECT_EQ(render(t, a).text() == render(t, b).text(), a == b);
  }
}

TEST(Catalog, OverrideDirectory) {
  docsimp::testing::TempDir dir;
  auto lexical = load_builtin(TemplateName::lexical);
  lexical.system_text = "Custom system.";
  docsimp::testing::write_text(dir / "lexical.txt", serialize_template_file(lexical));
  PromptCatalog catalog(dir.path());
  EXPECT_EQ(catalog.get(TemplateName::lexical).system_text, "Custom system.");
  EXPECT_EQ(catalog.get(TemplateName::topic).system_text, load_builtin(TemplateName::topic).system_text);
  EXPECT_NE(catalog.checksums().at("lexical"), PromptCatalog().checksums().at("lexical"));
}

TEST(Catalog, OverrideMustKeepPlaceholders) {
  docsimp::testing::TempDir dir;
  docsimp::testing::write_text(dir / "lexical.txt", "=== system ===\nS\n=== user ===\nNo slot here.\n");
  try {
    PromptCatalog catalog(dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::template_format);
  }
}

TEST(Catalog, ExportThenLoadIsIdentity) {
  docsimp::testing::TempDir dir;
  export_builtins(dir.path());
  EXPECT_EQ(PromptCatalog(dir.path()).checksums(), PromptCatalog().checksums());
  for (auto name : kAllTemplates) {
    auto t = load_builtin(name);
    auto parsed = parse_template_file(name, serialize_template_file(t));
    EXPECT_EQ(parsed.system_text, t.system_text);
    EXPECT_EQ(parsed.user_text, t.user_text);
  }
}
