#include "fixtures.hpp"

#include <atomic>
#include <fstream>
#include <stdexcept>

namespace docsimp::testing {

namespace fs = std::filesystem;

fs::path data_dir() { return DOCSIMP_TEST_DATA; }

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  std::random_device rd;
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto candidate = fs::temp_directory_path() /
                     ("docsimp-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    if (fs::create_directory(candidate)) {
      path_ = candidate;
      return;
    }
  }
  throw std::runtime_error("cannot create temp dir");
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_text(const fs::path& path, std::string_view contents) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << contents;
}

std::string between(std::string_view text, std::string_view start, std::string_view end) {
  auto a = text.find(start);
  if (a == std::string_view::npos) return {};
  a += start.size();
  auto b = text.find(end, a);
  if (b == std::string_view::npos) return {};
  return std::string(text.substr(a, b - a));
}

std::string pass_through_plan(int n_units, bool sentences) {
  if (sentences) {
    std::string line = "Topic:";
    for (int i = 1; i <= n_units; ++i) line += (i == 1 ? " " : ", ") + std::to_string(i);
    return line;
  }
  std::string out;
  for (int i = 1; i <= n_units; ++i)
    out += "Topic " + std::to_string(i) + ": " + std::to_string(i) + "\n";
  return out;
}

int numbered_units(std::string_view user, bool& sentences) {
  int paragraphs = 0, sentence_lines = 0;
  std::size_t pos = 0;
  while (pos < user.size()) {
    auto eol = user.find('\n', pos);
    if (eol == std::string_view::npos) eol = user.size();
    auto line = user.substr(pos, eol - pos);
    if (line.starts_with("Paragraph ") && line.find(':') != std::string_view::npos &&
        line[10] >= '0' && line[10] <= '9')
      ++paragraphs;
    if (line.starts_with("Sentence ") && line.size() > 9 && line[9] >= '0' && line[9] <= '9')
      ++sentence_lines;
    pos = eol + 1;
  }
  sentences = sentence_lines > 0;
  return sentences ? sentence_lines : paragraphs;
}

std::string identity_response(const ChatRequest& request, const PlanWriter& plan) {
  const std::string& user = request.messages.back().content;
  auto ends = [&](std::string_view cue) { return std::string_view(user).ends_with(cue); };
  if (ends("The organized content:")) {
    bool sentences = false;
    int n = numbered_units(user, sentences);
    return plan(n, sentences);
  }
  if (ends("The simplified paragraph:"))
    return between(user, "Paragraph to be simplified: ", "\nThe simplified paragraph:");
  if (ends("The simplified sentence:"))
    return between(user, "Sentence to be simplified:\n", "\nThe simplified sentence:");
  if (ends("Simplified paragraph:"))
    return between(user, "Paragraph to be simplified: ", "\nSimplified paragraph:");
  if (ends("Summary:")) return "Short summary.";
  if (ends("Simplified text:")) return between(user, "Raw text:\n", "\nSimplified text:");
  if (ends("The reasoning of this pair:")) return "Plain words replace the hard ones.";
  return "Reasoning content: both are fine.\nThe better-simplified document: Document 2";
}

std::shared_ptr<ChatBackend> identity_backend(PlanWriter plan) {
  return std::make_shared<CallbackBackend>(
      [plan = std::move(plan)](const ChatRequest& r) { return identity_response(r, plan); });
}

namespace {

constexpr const char* kWords[] = {
    "river", "stone",  "village", "market", "teacher", "garden", "window", "winter",
    "bright", "quiet", "small",   "green",  "walked",  "found",  "carried", "opened",
    "near",  "under",  "with",    "across", "slowly",  "again",  "people",  "letter",
};

}  // namespace

Document synthetic_document(const std::string& id, const std::vector<int>& sentences_per_paragraph,
                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> paragraphs;
  constexpr std::size_t n_words = std::size(kWords);
  for (int count : sentences_per_paragraph) {
    std::string para;
    for (int s = 0; s < count; ++s) {
      std::size_t len = 4 + rng() % 6;
      std::string sentence;
      for (std::size_t w = 0; w < len; ++w) {
        std::string word = kWords[rng() % n_words];
        if (w == 0) word[0] = static_cast<char>(word[0] - 'a' + 'A');
        sentence += (w ? " " : "") + word;
      }
      para += (s ? " " : "") + sentence + ".";
    }
    paragraphs.push_back(para);
  }
  return make_document(id, paragraphs);
}

std::vector<std::string> random_words(std::mt19937_64& rng, std::size_t max_tokens,
                                      std::size_t vocabulary) {
  static constexpr const char* kSmall[] = {"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"};
  vocabulary = std::min<std::size_t>(vocabulary, std::size(kSmall));
  std::size_t len = rng() % (max_tokens + 1);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < len; ++i) out.emplace_back(kSmall[rng() % vocabulary]);
  return out;
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) out += (i ? " " : "") + words[i];
  return out;
}

}  // namespace docsimp::testing
