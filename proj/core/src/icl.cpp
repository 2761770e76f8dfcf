#include "docsimp/icl.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "docsimp/error.hpp"
#include "docsimp/text.hpp"

namespace docsimp {

using nlohmann::json;

std::string_view to_string(BankKind kind) noexcept {
  switch (kind) {
    case BankKind::paragraph_meaning: return "paragraph_meaning";
    case BankKind::sentence_structure: return "sentence_structure";
    case BankKind::lexical: return "lexical";
  }
  return "unknown";
}

std::string_view to_string(CoarsePos pos) noexcept {
  switch (pos) {
    case CoarsePos::noun: return "noun";
    case CoarsePos::verb: return "verb";
    case CoarsePos::adjective: return "adjective";
    case CoarsePos::adverb: return "adverb";
    case CoarsePos::other: return "other";
  }
  return "other";
}

std::optional<CoarsePos> pos_from_string(std::string_view name) {
  auto n = to_lower_ascii(name);
  if (n == "noun" || n == "n") return CoarsePos::noun;
  if (n == "verb" || n == "v") return CoarsePos::verb;
  if (n == "adjective" || n == "adj" || n == "a") return CoarsePos::adjective;
  if (n == "adverb" || n == "adv" || n == "r") return CoarsePos::adverb;
  if (n == "other") return CoarsePos::other;
  return std::nullopt;
}

// --- embeddings -----------------------------------------------------------

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

LocalNgramEmbedder::LocalNgramEmbedder(std::size_t dimension)
    : dimension_(dimension), idf_(dimension, 1.0) {
  if (dimension_ == 0) throw Error(ErrorCode::invalid_argument, "embedding dimension must be > 0");
}

std::vector<std::size_t> LocalNgramEmbedder::buckets(std::string_view text) const {
  auto norm = to_lower_ascii(normalize_whitespace(text));
  std::vector<std::size_t> out;
  if (norm.size() < 3) {
    out.push_back(fnv1a(norm) % dimension_);
    return out;
  }
  for (std::size_t n = 3; n <= 5; ++n)
    for (std::size_t i = 0; i + n <= norm.size(); ++i)
      out.push_back(fnv1a(std::string_view(norm).substr(i, n)) % dimension_);
  return out;
}

void LocalNgramEmbedder::fit_idf(std::span<const std::string> corpus) {
  std::vector<double> df(dimension_, 0.0);
  for (const auto& doc : corpus) {
    auto b = buckets(doc);
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    for (auto i : b) df[i] += 1.0;
  }
  const double n = static_cast<double>(corpus.size());
  for (std::size_t i = 0; i < dimension_; ++i) idf_[i] = std::log((1.0 + n) / (1.0 + df[i])) + 1.0;
}

std::vector<double> LocalNgramEmbedder::embed(std::string_view text) const {
  if (trim(text).empty()) throw Error(ErrorCode::invalid_argument, "cannot embed empty text");
  std::vector<double> v(dimension_, 0.0);
  for (auto i : buckets(text)) v[i] += 1.0;
  double norm = 0.0;
  for (std::size_t i = 0; i < dimension_; ++i) {
    v[i] *= idf_[i];
    norm += v[i] * v[i];
  }
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;
  return v;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(HttpEndpoint endpoint, std::string model,
                                             std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), model_(std::move(model)), timeout_(timeout) {}

std::vector<double> HttpEmbeddingProvider::embed(std::string_view text) const {
  if (trim(text).empty()) throw Error(ErrorCode::invalid_argument, "cannot embed empty text");
  json body = {{"model", model_}, {"input", std::string(text)}};
  auto raw = http_post_json(endpoint_.base_url, "/embeddings", endpoint_.api_key, body.dump(),
                            timeout_);
  auto j = json::parse(raw, nullptr, false);
  if (j.is_discarded() || !j.contains("data") || !j["data"].is_array() || j["data"].empty())
    throw ProviderError(0, "embedding response has no data");
  auto vec = j["data"][0].at("embedding").get<std::vector<double>>();
  std::lock_guard lock(mu_);
  if (dimension_ == 0) dimension_ = vec.size();
  if (vec.size() != dimension_ || vec.empty())
    throw ProviderError(0, "embedding dimension changed from " + std::to_string(dimension_) +
                               " to " + std::to_string(vec.size()));
  return vec;
}

std::size_t HttpEmbeddingProvider::dimension() const {
  std::lock_guard lock(mu_);
  return dimension_;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw Error(ErrorCode::invalid_argument, "cosine of vectors with different dimensions");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

// --- banks ----------------------------------------------------------------

ExampleBank::ExampleBank(BankKind kind, std::vector<ExamplePair> entries)
    : kind_(kind), entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    if (e.complex.empty() || e.simple.empty())
      throw Error(ErrorCode::invalid_argument, "example pair with an empty side");
    if (e.reasoning && e.reasoning->empty())
      throw Error(ErrorCode::invalid_argument, "example pair with empty reasoning");
  }
}

void ExampleBank::build_index(const EmbeddingProvider& provider) {
  std::vector<std::vector<double>> index;
  index.reserve(entries_.size());
  for (const auto& e : entries_) index.push_back(provider.embed(e.complex));
  index_ = std::move(index);
}

ExampleBank load_bank_jsonl(const std::filesystem::path& path, BankKind kind,
                            const std::string& source_tag) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open example bank " + path.string());
  std::vector<ExamplePair> entries;
  std::string line;
  int line_no = 0;
  const std::string tag = source_tag.empty() ? path.stem().string() : source_tag;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto where = path.string() + ":" + std::to_string(line_no);
    try {
      auto j = json::parse(line);
      ExamplePair p;
      p.complex = j.at("complex").get<std::string>();
      p.simple = j.at("simple").get<std::string>();
      if (j.contains("reasoning") && !j["reasoning"].is_null())
        p.reasoning = j["reasoning"].get<std::string>();
      if (j.contains("pos") && !j["pos"].is_null()) {
        p.pos = pos_from_string(j["pos"].get<std::string>());
        if (!p.pos) throw Error(ErrorCode::io, where + ": unknown pos tag");
      }
      p.source_tag = tag;
      entries.push_back(std::move(p));
    } catch (const json::exception& ex) {
      throw Error(ErrorCode::io, where + ": " + ex.what());
    }
  }
  try {
    return ExampleBank(kind, std::move(entries));
  } catch (const Error& e) {
    throw Error(ErrorCode::io, path.string() + ": " + e.what());
  }
}

namespace {

std::vector<ExamplePair> top_k(const ExampleBank& bank, int k, const std::vector<double>& scores) {
  std::vector<std::size_t> order(bank.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<ExamplePair> out;
  auto n = std::min<std::size_t>(static_cast<std::size_t>(k), bank.size());
  for (std::size_t i = 0; i < n; ++i) out.push_back(bank.entries()[order[i]]);
  return out;
}

void check_selection(const ExampleBank& bank, int k) {
  if (bank.empty()) throw Error(ErrorCode::empty_bank, "example bank is empty");
  if (k < 1) throw Error(ErrorCode::invalid_argument, "k must be >= 1");
}

}  // namespace

std::vector<ExamplePair> select_by_embedding(std::string_view query, const ExampleBank& bank, int k,
                                             const EmbeddingProvider& provider) {
  check_selection(bank, k);
  auto q = provider.embed(query);
  std::vector<double> scores;
  scores.reserve(bank.size());
  const auto& index = bank.embedding_index();
  for (std::size_t i = 0; i < bank.size(); ++i)
    scores.push_back(index ? cosine(q, (*index)[i])
                           : cosine(q, provider.embed(bank.entries()[i].complex)));
  return top_k(bank, k, scores);
}

// --- sentence structure ---------------------------------------------------

namespace {

const std::unordered_set<std::string_view>& auxiliaries() {
  static const std::unordered_set<std::string_view> s = {
      "is",   "am",    "are",    "was",   "were",  "be",    "been",  "being",
      "have", "has",   "had",    "having", "do",   "does",  "did",   "will",
      "would", "shall", "should", "can",   "could", "may",  "might", "must",
  };
  return s;
}

const std::unordered_set<std::string_view>& function_words() {
  static const std::unordered_set<std::string_view> s = {
      // determiners
      "the", "a", "an", "this", "that", "these", "those", "my", "your", "his", "her", "its",
      "our", "their", "some", "any", "each", "every", "no", "all", "both", "either", "neither",
      // pronouns
      "i", "you", "he", "she", "it", "we", "they", "me", "him", "us", "them", "myself",
      "yourself", "himself", "herself", "itself", "ourselves", "themselves", "mine", "yours",
      "hers", "ours", "theirs",
      // prepositions
      "of", "in", "on", "at", "by", "for", "with", "about", "against", "between", "into",
      "through", "during", "before", "after", "above", "below", "to", "from", "up", "down",
      "out", "off", "over", "under", "without", "within", "upon", "across", "toward", "towards",
      "among", "around",
      // conjunctions and subordinators
      "and", "but", "or", "nor", "so", "yet", "if", "because", "as", "until", "while",
      "although", "though", "since", "unless", "whereas", "than",
      // auxiliaries and modals
      "is", "am", "are", "was", "were", "be", "been", "being", "have", "has", "had", "having",
      "do", "does", "did", "will", "would", "shall", "should", "can", "could", "may", "might",
      "must",
      // misc
      "not", "there", "here", "what", "which", "who", "whom", "whose", "when", "where", "why",
      "how",
  };
  return s;
}

const std::unordered_set<std::string_view>& common_verbs() {
  static const std::unordered_set<std::string_view> s = {
      "go",     "goes",   "went",   "gone",  "make",  "makes",  "made",   "say",   "says",
      "said",   "get",    "gets",   "got",   "take",  "takes",  "took",   "taken", "see",
      "sees",   "saw",    "seen",   "come",  "comes", "came",   "know",   "knows", "knew",
      "known",  "think",  "thinks", "thought", "give", "gives", "gave",   "given", "find",
      "finds",  "found",  "tell",   "tells", "told",  "become", "becomes", "became", "leave",
      "left",   "feel",   "feels",  "felt",  "bring", "brought", "begin", "began", "begun",
      "keep",   "kept",   "hold",   "held",  "write", "wrote",  "written", "stand", "stood",
      "hear",   "heard",  "mean",   "meant", "meet",  "met",    "run",    "runs",  "ran",
      "pay",    "paid",   "sit",    "sat",   "speak", "spoke",  "lead",   "led",   "grow",
      "grew",   "grown",  "lose",   "lost",  "fall",  "fell",   "send",   "sent",  "build",
      "built",  "understand", "understood", "draw", "drew", "break", "broke", "spend",
      "spent",  "rise",   "rose",   "drive", "drove", "buy",    "bought", "wear",  "wore",
      "choose", "chose",  "sleep",  "sleeps", "slept", "eat",   "ate",    "eaten", "help",
      "helps",  "use",    "uses",   "want",  "wants", "need",   "needs",  "try",   "tries",
      "ask",    "asks",   "work",   "works", "seem",  "seems",  "show",   "shows", "move",
      "moves",  "live",   "lives",  "believe", "happen", "include", "includes", "continue",
      "change", "play",   "plays",  "turn",  "start", "call",   "put",    "let",   "set",
  };
  return s;
}

const std::unordered_set<std::string_view>& clause_connectors() {
  static const std::unordered_set<std::string_view> s = {
      "and",  "but",    "or",     "nor",   "so",     "yet",     "for",   "because", "although",
      "though", "while", "when",  "whenever", "if",  "unless",  "since", "after",   "before",
      "until", "whereas", "which", "who",  "whom",   "whose",   "that",  "where",
  };
  return s;
}

}  // namespace

bool is_function_word(std::string_view token) {
  return function_words().contains(to_lower_ascii(token));
}

CoarsePos coarse_pos(std::string_view token) {
  if (!is_word(token)) return CoarsePos::other;
  auto w = to_lower_ascii(token);
  if (auxiliaries().contains(w)) return CoarsePos::verb;
  if (function_words().contains(w)) return CoarsePos::other;
  if (common_verbs().contains(w)) return CoarsePos::verb;
  if (w.size() > 3 && w.ends_with("ly")) return CoarsePos::adverb;
  if (w.ends_with("tion") || w.ends_with("ness")) return CoarsePos::noun;
  if (w.ends_with("ize") || w.ends_with("izes") || w.ends_with("ized") || w.ends_with("izing"))
    return CoarsePos::verb;
  if (w.size() > 3 && w.ends_with("ed")) return CoarsePos::verb;
  if (w.ends_with("ous") || w.ends_with("ful")) return CoarsePos::adjective;
  if (w.size() >= 7 && w.ends_with("able")) return CoarsePos::adjective;  // not table, cable
  return CoarsePos::noun;
}

StructureFeatures structure_features(std::string_view sentence) {
  StructureFeatures f;
  auto tokens = tokenize(sentence);
  f.length = static_cast<long>(tokens.size());
  if (tokens.empty()) return f;
  long function = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    f.pos_histogram[coarse_pos(t)] += 1.0;
    if (is_function_word(t)) ++function;
    if ((t == "," || t == ";") && i + 1 < tokens.size() &&
        clause_connectors().contains(to_lower_ascii(tokens[i + 1])))
      ++f.clause_count;
  }
  for (auto& [_, v] : f.pos_histogram) v /= static_cast<double>(tokens.size());
  f.function_word_ratio = static_cast<double>(function) / static_cast<double>(tokens.size());
  return f;
}

double sentence_structure_similarity(const StructureFeatures& a, const StructureFeatures& b) {
  auto ratio = [](double x, double y) {
    if (x == y) return 1.0;
    return std::min(x, y) / std::max(x, y);
  };
  double length = ratio(static_cast<double>(a.length), static_cast<double>(b.length));
  double clause = ratio(a.clause_count, b.clause_count);
  double l1 = 0.0;
  for (auto pos : {CoarsePos::noun, CoarsePos::verb, CoarsePos::adjective, CoarsePos::adverb,
                   CoarsePos::other}) {
    auto fa = a.pos_histogram.contains(pos) ? a.pos_histogram.at(pos) : 0.0;
    auto fb = b.pos_histogram.contains(pos) ? b.pos_histogram.at(pos) : 0.0;
    l1 += std::abs(fa - fb);
  }
  double pos = std::clamp(1.0 - 0.5 * l1, 0.0, 1.0);
  double function = 1.0 - std::abs(a.function_word_ratio - b.function_word_ratio);
  return (length + clause + pos + function) / 4.0;
}

double structure_similarity(std::string_view a, std::string_view b) {
  if (trim(a).empty() || trim(b).empty())
    throw Error(ErrorCode::invalid_argument, "structure_similarity needs nonempty texts");
  auto sa = split_sentences(a);
  auto sb = split_sentences(b);
  auto n = std::min(sa.size(), sb.size());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    total += sentence_structure_similarity(structure_features(sa[i].text),
                                           structure_features(sb[i].text));
  return total / static_cast<double>(n);
}

std::vector<ExamplePair> select_by_structure(std::string_view query, const ExampleBank& bank,
                                             int k) {
  check_selection(bank, k);
  std::vector<double> scores;
  scores.reserve(bank.size());
  for (const auto& e : bank.entries()) scores.push_back(structure_similarity(query, e.complex));
  return top_k(bank, k, scores);
}

// --- lexical --------------------------------------------------------------

CoarsePos lexical_pos(const ExamplePair& pair) {
  if (pair.pos) return *pair.pos;
  std::unordered_set<std::string> simple;
  for (const auto& t : tokenize(pair.simple)) simple.insert(to_lower_ascii(t));
  for (const auto& t : tokenize(pair.complex))
    if (is_word(t) && !simple.contains(to_lower_ascii(t))) return coarse_pos(t);
  return CoarsePos::other;
}

std::vector<ExamplePair> select_lexical_examples(const ExampleBank& bank, int k) {
  check_selection(bank, k);
  constexpr std::array<CoarsePos, 5> kOrder = {CoarsePos::noun, CoarsePos::verb,
                                               CoarsePos::adjective, CoarsePos::adverb,
                                               CoarsePos::other};
  std::map<CoarsePos, std::vector<std::size_t>> queues;
  for (std::size_t i = 0; i < bank.size(); ++i) queues[lexical_pos(bank.entries()[i])].push_back(i);

  std::vector<ExamplePair> out;
  std::map<CoarsePos, std::size_t> cursor;
  const auto want = std::min<std::size_t>(static_cast<std::size_t>(k), bank.size());
  while (out.size() < want) {
    for (auto pos : kOrder) {
      if (out.size() == want) break;
      auto& q = queues[pos];
      auto& c = cursor[pos];
      if (c < q.size()) out.push_back(bank.entries()[q[c++]]);
    }
  }
  return out;
}

// --- formatting and reasoning chains ---------------------------------------

std::string format_example(const ExamplePair& pair, BankKind kind) {
  std::string_view unit = kind == BankKind::paragraph_meaning ? "paragraph" : "sentence";
  std::string out = "Complex " + std::string(unit) + ": " + pair.complex + "\n";
  if (pair.reasoning) out += "Reasoning: " + *pair.reasoning + "\n";
  out += "Simple " + std::string(unit) + ": " + pair.simple;
  return out;
}

std::string format_document_example(const ExamplePair& pair) {
  return "Complex document:\n" + pair.complex + "\nSimple document:\n" + pair.simple;
}

namespace {

Outcome<std::string> validate_reasoning(const std::string& raw) {
  std::string_view view = trim(raw);
  for (std::string_view label : {"the reasoning of this pair:", "reasoning:"}) {
    if (to_lower_ascii(view.substr(0, label.size())) == label) view = trim(view.substr(label.size()));
  }
  return extract_simplified_text(view, ExtractStage::paragraph, 0);
}

}  // namespace

CotResult generate_cot(const ExamplePair& pair, LlmGateway& gateway, const PromptCatalog& catalog,
                       const GenerationParams& params, int max_attempts) {
  if (pair.reasoning)
    throw Error(ErrorCode::invalid_argument, "example pair already carries reasoning");
  auto prompt = render(catalog.get(TemplateName::cot_generator),
                       {{"COMPLEX_SIMPLE_PAIR",
                         "Complex sentence: " + pair.complex + "\nSimple: " + pair.simple}});
  auto result = over_generate_filter<std::string>(
      [&] { return gateway.complete(prompt.messages, params, "cot").text; }, validate_reasoning,
      max_attempts, std::string());
  if (result.log.fallback_used)
    throw CotGenerationError("no valid reasoning after " + std::to_string(max_attempts) +
                                 " attempts",
                             std::move(result.log));
  CotResult out{pair, std::move(result.log)};
  out.pair.reasoning = std::move(result.value);
  return out;
}

}  // namespace docsimp
