#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace docsimp {

struct Sentence {
  int index = 0;  // 1-based within its paragraph
  std::string text;

  bool operator==(const Sentence&) const = default;
};

struct Paragraph {
  int index = 0;  // 1-based within its document
  std::string text;

  // Derived on demand from text; see split_sentences.
  std::vector<Sentence> sentences() const;

  bool operator==(const Paragraph&) const = default;
};

struct Document {
  std::string id;
  std::optional<std::string> title;
  std::vector<Paragraph> paragraphs;

  bool operator==(const Document&) const = default;
};

struct TokenStats {
  long paragraph_count = 0;
  long sentence_count = 0;
  long token_count = 0;
  long word_count = 0;  // alphabetic tokens only
  long syllable_count = 0;

  TokenStats& operator+=(const TokenStats& other);
  bool operator==(const TokenStats&) const = default;
};

/// Trims the text and collapses every whitespace run (newlines included) to a
/// single space.
std::string normalize_whitespace(std::string_view text);

/// Splits text into tokens. Leading and trailing punctuation is peeled off
/// into single-character tokens; abbreviations such as "U.S." or "Dr." stay
/// whole, as does punctuation inside a word ("don't", "1,000").
std::vector<std::string> tokenize(std::string_view text);

/// Sentence boundaries fall after . ! or ? (plus any closing quotes or
/// brackets) when the next word starts with an uppercase letter or a digit,
/// unless the terminating word is a known abbreviation.
std::vector<Sentence> split_sentences(std::string_view text);

bool is_abbreviation(std::string_view token);

/// True for tokens made of ASCII letters, optionally joined by internal
/// apostrophes or hyphens.
bool is_word(std::string_view token);

/// Vowel-group syllable estimate with silent final "e" and silent "-ed"
/// handling. Throws Error(non_alphabetic_word) unless is_word(word).
int count_syllables(std::string_view word);

/// Counts for a single paragraph-sized chunk of text (paragraph_count = 1
/// when the text is nonempty).
TokenStats text_stats(std::string_view paragraph_text);

TokenStats doc_stats(const Document& doc);

/// Parses the plain-text document format: UTF-8, paragraphs separated by one
/// or more blank lines, single newlines treated as soft wraps, optional
/// "# <title>" first line.
Document parse_document(std::string_view text, std::string id = {});

/// Builds a document from already separated paragraph texts; empty
/// paragraphs are dropped and indices renumbered.
Document make_document(std::string id, std::span<const std::string> paragraphs,
                       std::optional<std::string> title = std::nullopt);

/// Paragraph texts joined by blank lines, without the title line.
std::string document_body(const Document& doc);

/// Inverse of parse_document (title line included when present).
std::string render_document(const Document& doc);

/// True for markdown subheading lines such as "## Topic".
bool is_subheading_line(std::string_view line);

/// Removes "## " subheading lines from a text, keeping paragraph breaks.
std::string strip_subheadings(std::string_view text);

std::string to_lower_ascii(std::string_view text);
std::string_view trim(std::string_view text);

}  // namespace docsimp
