#include "docsimp/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>

#include "docsimp/error.hpp"

namespace docsimp {

namespace {

// Versioned asset: changing it changes segmentation and every statistic
// derived from it. Bump kAbbreviationListVersion alongside any edit.
[[maybe_unused]] constexpr int kAbbreviationListVersion = 1;
constexpr std::array<std::string_view, 56> kAbbreviations = {
    "Mr.",   "Mrs.",  "Ms.",   "Dr.",   "Prof.", "Sr.",    "Jr.",   "St.",
    "Mt.",   "Ft.",   "Gen.",  "Gov.",  "Sen.",  "Rep.",   "Rev.",  "Hon.",
    "Capt.", "Lt.",   "Col.",  "Sgt.",  "Maj.",  "Cmdr.",  "Adm.",  "Pres.",
    "Supt.", "Jan.",  "Feb.",  "Mar.",  "Apr.",  "Jun.",   "Jul.",  "Aug.",
    "Sep.",  "Sept.", "Oct.",  "Nov.",  "Dec.",  "Inc.",   "Ltd.",  "Co.",
    "Corp.", "Bros.", "Ave.",  "Blvd.", "Rd.",   "Dept.",  "Univ.", "Fig.",
    "approx.", "vs.", "etc.",  "e.g.",  "i.e.",  "U.S.",   "U.K.",  "Ph.D.",
};

// Multi-byte punctuation treated like ASCII punctuation by the tokenizer.
constexpr std::array<std::string_view, 10> kUnicodePunct = {
    "‘", "’", "“", "”", "–",
    "—", "…", "«", "»", "·",
};

constexpr std::string_view kClosers = "\"')]}";
constexpr std::array<std::string_view, 3> kUnicodeClosers = {"”", "’", "»"};
constexpr std::string_view kOpeners = "\"'([{";
constexpr std::array<std::string_view, 3> kUnicodeOpeners = {"“", "‘", "«"};

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

// Length in bytes of a punctuation code point at the start of s, or 0.
std::size_t leading_punct(std::string_view s) {
  if (s.empty()) return 0;
  if (std::ispunct(static_cast<unsigned char>(s.front()))) return 1;
  for (auto p : kUnicodePunct)
    if (s.starts_with(p)) return p.size();
  return 0;
}

std::size_t trailing_punct(std::string_view s) {
  if (s.empty()) return 0;
  if (std::ispunct(static_cast<unsigned char>(s.back()))) return 1;
  for (auto p : kUnicodePunct)
    if (s.ends_with(p)) return p.size();
  return 0;
}

std::vector<std::string_view> whitespace_chunks(std::string_view text) {
  std::vector<std::string_view> chunks;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) chunks.push_back(text.substr(start, i - start));
  }
  return chunks;
}

std::string_view strip_closers(std::string_view chunk) {
  bool changed = true;
  while (changed && !chunk.empty()) {
    changed = false;
    if (kClosers.find(chunk.back()) != std::string_view::npos) {
      chunk.remove_suffix(1);
      changed = true;
      continue;
    }
    for (auto c : kUnicodeClosers) {
      if (chunk.ends_with(c)) {
        chunk.remove_suffix(c.size());
        changed = true;
        break;
      }
    }
  }
  return chunk;
}

std::string_view strip_openers(std::string_view chunk) {
  bool changed = true;
  while (changed && !chunk.empty()) {
    changed = false;
    if (kOpeners.find(chunk.front()) != std::string_view::npos) {
      chunk.remove_prefix(1);
      changed = true;
      continue;
    }
    for (auto c : kUnicodeOpeners) {
      if (chunk.starts_with(c)) {
        chunk.remove_prefix(c.size());
        changed = true;
        break;
      }
    }
  }
  return chunk;
}

bool ends_sentence(std::string_view chunk) {
  auto core = strip_closers(chunk);
  if (core.empty()) return false;
  char last = core.back();
  if (last != '.' && last != '!' && last != '?') return false;
  return !is_abbreviation(strip_openers(core));
}

bool starts_sentence(std::string_view chunk) {
  auto core = strip_openers(chunk);
  if (core.empty()) return false;
  char c = core.front();
  return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

}  // namespace

std::vector<Sentence> Paragraph::sentences() const { return split_sentences(text); }

TokenStats& TokenStats::operator+=(const TokenStats& other) {
  paragraph_count += other.paragraph_count;
  sentence_count += other.sentence_count;
  token_count += other.token_count;
  word_count += other.word_count;
  syllable_count += other.syllable_count;
  return *this;
}

std::string_view trim(std::string_view text) {
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  return text;
}

std::string to_lower_ascii(std::string_view text) {
  std::string out(text);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (auto chunk : whitespace_chunks(text)) {
    if (!out.empty()) out.push_back(' ');
    out.append(chunk);
  }
  return out;
}

bool is_abbreviation(std::string_view token) {
  if (std::find(kAbbreviations.begin(), kAbbreviations.end(), token) != kAbbreviations.end())
    return true;
  // Dotted initialisms: "U.N.", "a.m.", "N.Y.C."
  if (token.size() < 4 || token.size() % 2 != 0) return false;
  for (std::size_t i = 0; i < token.size(); i += 2) {
    if (!is_ascii_alpha(token[i]) || token[i + 1] != '.') return false;
  }
  return true;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  for (auto chunk : whitespace_chunks(text)) {
    std::string_view rest = chunk;
    while (!rest.empty() && !is_abbreviation(rest)) {
      auto n = leading_punct(rest);
      if (n == 0) break;
      tokens.emplace_back(rest.substr(0, n));
      rest.remove_prefix(n);
    }
    std::vector<std::string_view> trailing;
    while (!rest.empty() && !is_abbreviation(rest)) {
      auto n = trailing_punct(rest);
      if (n == 0) break;
      trailing.push_back(rest.substr(rest.size() - n));
      rest.remove_suffix(n);
    }
    if (!rest.empty()) tokens.emplace_back(rest);
    for (auto it = trailing.rbegin(); it != trailing.rend(); ++it) tokens.emplace_back(*it);
  }
  return tokens;
}

std::vector<Sentence> split_sentences(std::string_view text) {
  auto chunks = whitespace_chunks(text);
  std::vector<Sentence> sentences;
  std::string current;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    if (!current.empty()) current.push_back(' ');
    current.append(chunks[i]);
    bool boundary = i + 1 < chunks.size() && ends_sentence(chunks[i]) &&
                    starts_sentence(chunks[i + 1]);
    if (boundary) {
      sentences.push_back({static_cast<int>(sentences.size()) + 1, std::move(current)});
      current.clear();
    }
  }
  if (!current.empty())
    sentences.push_back({static_cast<int>(sentences.size()) + 1, std::move(current)});
  return sentences;
}

bool is_word(std::string_view token) {
  if (token.empty() || !is_ascii_alpha(token.front()) || !is_ascii_alpha(token.back()))
    return false;
  std::size_t i = 0;
  while (i < token.size()) {
    char c = token[i];
    if (is_ascii_alpha(c)) {
      ++i;
    } else if (c == '\'' || c == '-') {
      if (!is_ascii_alpha(token[i + 1])) return false;
      ++i;
    } else if (token.substr(i).starts_with("’")) {
      i += 3;
      if (i >= token.size() || !is_ascii_alpha(token[i])) return false;
    } else {
      return false;
    }
  }
  return true;
}

int count_syllables(std::string_view word) {
  if (!is_word(word))
    throw Error(ErrorCode::non_alphabetic_word,
                "count_syllables expects an alphabetic token, got '" + std::string(word) + "'");
  std::string letters;
  for (char c : word)
    if (is_ascii_alpha(c)) letters.push_back(static_cast<char>(std::tolower(c)));
    else letters.push_back('-');  // separators break vowel groups

  int groups = 0;
  bool in_vowel = false;
  for (char c : letters) {
    bool v = is_vowel(c);
    if (v && !in_vowel) ++groups;
    in_vowel = v;
  }

  const auto n = letters.size();
  if (groups > 1 && n >= 2 && letters[n - 1] == 'e' && !is_vowel(letters[n - 2])) {
    // consonant + "le" keeps its syllable: "table", "little"
    bool consonant_le = n >= 3 && letters[n - 2] == 'l' && !is_vowel(letters[n - 3]) &&
                        letters[n - 3] != '-';
    if (!consonant_le) --groups;
  } else if (groups > 1 && n >= 4 && letters.ends_with("ed") && !is_vowel(letters[n - 3]) &&
             letters[n - 3] != 't' && letters[n - 3] != 'd') {
    --groups;
  }
  return std::max(groups, 1);
}

TokenStats text_stats(std::string_view paragraph_text) {
  TokenStats stats;
  auto tokens = tokenize(paragraph_text);
  if (tokens.empty()) return stats;
  stats.paragraph_count = 1;
  stats.token_count = static_cast<long>(tokens.size());
  for (const auto& t : tokens) {
    if (is_word(t)) {
      ++stats.word_count;
      stats.syllable_count += count_syllables(t);
    }
  }
  stats.sentence_count = static_cast<long>(split_sentences(paragraph_text).size());
  return stats;
}

TokenStats doc_stats(const Document& doc) {
  TokenStats total;
  for (const auto& p : doc.paragraphs) total += text_stats(p.text);
  total.paragraph_count = static_cast<long>(doc.paragraphs.size());
  return total;
}

Document parse_document(std::string_view text, std::string id) {
  Document doc;
  doc.id = std::move(id);
  std::vector<std::string> paragraphs;
  std::string current;
  bool first_line = true;

  auto flush = [&] {
    auto norm = normalize_whitespace(current);
    if (!norm.empty()) paragraphs.push_back(std::move(norm));
    current.clear();
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    auto line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (first_line) {
      first_line = false;
      auto t = trim(line);
      if (t.starts_with("# ")) {
        doc.title = std::string(trim(t.substr(2)));
        continue;
      }
    }
    if (trim(line).empty()) {
      flush();
    } else {
      current.push_back(' ');
      current.append(line);
    }
    if (eol == text.size()) break;
  }
  flush();

  for (std::size_t i = 0; i < paragraphs.size(); ++i)
    doc.paragraphs.push_back({static_cast<int>(i) + 1, std::move(paragraphs[i])});
  return doc;
}

Document make_document(std::string id, std::span<const std::string> paragraphs,
                       std::optional<std::string> title) {
  Document doc;
  doc.id = std::move(id);
  doc.title = std::move(title);
  for (const auto& p : paragraphs) {
    auto norm = normalize_whitespace(p);
    if (norm.empty()) continue;
    doc.paragraphs.push_back({static_cast<int>(doc.paragraphs.size()) + 1, std::move(norm)});
  }
  return doc;
}

std::string document_body(const Document& doc) {
  std::string out;
  for (const auto& p : doc.paragraphs) {
    if (!out.empty()) out += "\n\n";
    out += p.text;
  }
  return out;
}

std::string render_document(const Document& doc) {
  std::string body = document_body(doc);
  if (!doc.title) return body;
  std::string out = "# " + *doc.title;
  if (!body.empty()) out += "\n\n" + body;
  return out;
}

bool is_subheading_line(std::string_view line) {
  auto t = trim(line);
  return t.starts_with("## ") || t == "##";
}

std::string strip_subheadings(std::string_view text) {
  std::string kept;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    auto line = text.substr(pos, eol - pos);
    if (!is_subheading_line(line)) kept.append(line);
    kept.push_back('\n');
    if (eol == text.size()) break;
    pos = eol + 1;
  }
  return document_body(parse_document(kept));
}

}  // namespace docsimp
