#include "docsimp/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include "docsimp/error.hpp"

namespace docsimp {

using nlohmann::json;

std::vector<std::string> metric_tokens(std::string_view text) {
  auto tokens = tokenize(text);
  for (auto& t : tokens) t = to_lower_ascii(t);
  return tokens;
}

namespace {

using Counts = std::map<std::string, double>;

Counts ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  Counts out;
  if (tokens.size() < n) return out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string g = tokens[i];
    for (std::size_t j = 1; j < n; ++j) g += ' ' + tokens[i + j];
    out[g] += 1.0;
  }
  return out;
}

double get(const Counts& c, const std::string& g) {
  auto it = c.find(g);
  return it == c.end() ? 0.0 : it->second;
}

double f1(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }

SariComponents sari_n(const Counts& in, const Counts& out, const Counts& ref) {
  SariComponents c;

  // keep
  Counts keep, keep_all;
  for (const auto& [g, ic] : in) {
    if (double k = std::min(ic, get(out, g)); k > 0) keep[g] = k;
    if (double a = std::min(ic, get(ref, g)); a > 0) keep_all[g] = a;
  }
  if (keep.empty() && keep_all.empty()) {
    c.keep_f1 = 1.0;
  } else if (!keep.empty() && !keep_all.empty()) {
    double p = 0, r = 0;
    for (const auto& [g, k] : keep) {
      double good = std::min(k, get(ref, g));
      if (good <= 0) continue;
      p += good / k;
      r += good / keep_all.at(g);
    }
    c.keep_f1 = f1(p / static_cast<double>(keep.size()), r / static_cast<double>(keep_all.size()));
  }

  // delete
  Counts del;
  std::size_t del_target = 0;
  for (const auto& [g, ic] : in) {
    if (double d = ic - get(out, g); d > 0) del[g] = d;
    if (ic - get(ref, g) > 0) ++del_target;
  }
  if (del.empty() && del_target == 0) {
    c.del_precision = 1.0;
  } else if (!del.empty()) {
    double p = 0;
    for (const auto& [g, d] : del) p += std::max(0.0, d - get(ref, g)) / d;
    c.del_precision = p / static_cast<double>(del.size());
  }

  // add (sets)
  std::set<std::string> add, add_target;
  for (const auto& [g, _] : out)
    if (!in.contains(g)) add.insert(g);
  for (const auto& [g, _] : ref)
    if (!in.contains(g)) add_target.insert(g);
  if (add.empty() && add_target.empty()) {
    c.add_f1 = 1.0;
  } else if (!add.empty() && !add_target.empty()) {
    double good = 0;
    for (const auto& g : add)
      if (add_target.contains(g)) good += 1;
    c.add_f1 = f1(good / static_cast<double>(add.size()), good / static_cast<double>(add_target.size()));
  }
  return c;
}

void require_references(std::span<const std::string> references) {
  if (references.empty()) throw Error(ErrorCode::empty_references, "at least one reference is required");
}

double aggregate_of(const std::array<SariComponents, 4>& per_n) {
  double total = 0;
  for (const auto& c : per_n) total += (c.add_f1 + c.keep_f1 + c.del_precision) / 3.0;
  return 100.0 * total / 4.0;
}

double length_ratio(double a, double b) {
  if (a == b) return 1.0;
  if (a <= 0 || b <= 0) return 0.0;
  return std::min(a, b) / std::max(a, b);
}

}  // namespace

SariBreakdown sari(std::string_view input, std::string_view output,
                   std::span<const std::string> references) {
  require_references(references);
  auto in_tokens = metric_tokens(input);
  auto out_tokens = metric_tokens(output);
  std::vector<std::vector<std::string>> ref_tokens;
  for (const auto& r : references) ref_tokens.push_back(metric_tokens(r));
  const double n_refs = static_cast<double>(references.size());

  SariBreakdown b;
  for (std::size_t n = 1; n <= 4; ++n) {
    Counts ref;
    for (const auto& rt : ref_tokens)
      for (const auto& [g, c] : ngrams(rt, n)) ref[g] += c / n_refs;
    b.per_n[n - 1] = sari_n(ngrams(in_tokens, n), ngrams(out_tokens, n), ref);
  }
  b.aggregate = aggregate_of(b.per_n);
  return b;
}

SariBreakdown sari_mean_single(std::string_view input, std::string_view output,
                               std::span<const std::string> references) {
  require_references(references);
  SariBreakdown mean;
  for (const auto& r : references) {
    auto s = sari(input, output, std::span<const std::string>(&r, 1));
    for (std::size_t n = 0; n < 4; ++n) {
      mean.per_n[n].add_f1 += s.per_n[n].add_f1;
      mean.per_n[n].keep_f1 += s.per_n[n].keep_f1;
      mean.per_n[n].del_precision += s.per_n[n].del_precision;
    }
  }
  const double k = static_cast<double>(references.size());
  for (auto& c : mean.per_n) {
    c.add_f1 /= k;
    c.keep_f1 /= k;
    c.del_precision /= k;
  }
  mean.aggregate = aggregate_of(mean.per_n);
  return mean;
}

double d_sari(std::string_view input, std::string_view output,
              std::span<const std::string> references) {
  auto s = sari(input, output, references);
  double ref_tokens = 0, ref_sentences = 0;
  for (const auto& r : references) {
    ref_tokens += static_cast<double>(metric_tokens(r).size());
    ref_sentences += static_cast<double>(split_sentences(r).size());
  }
  ref_tokens /= static_cast<double>(references.size());
  ref_sentences /= static_cast<double>(references.size());
  const double penalty =
      length_ratio(static_cast<double>(metric_tokens(output).size()), ref_tokens) *
      length_ratio(static_cast<double>(split_sentences(output).size()), ref_sentences);
  for (auto& c : s.per_n) {
    c.add_f1 *= penalty;
    c.keep_f1 *= penalty;
  }
  return aggregate_of(s.per_n);
}

double fkgl(std::string_view text) {
  auto stats = doc_stats(parse_document(text));
  if (stats.sentence_count == 0 || stats.word_count == 0)
    throw Error(ErrorCode::invalid_argument, "fkgl needs at least one sentence and one word");
  const double words = static_cast<double>(stats.word_count);
  return 0.39 * (words / static_cast<double>(stats.sentence_count)) +
         11.8 * (static_cast<double>(stats.syllable_count) / words) - 15.59;
}

// --- judge ----------------------------------------------------------------

Outcome<JudgeVerdict> parse_judge_verdict(std::string_view raw) {
  std::string_view body = trim(raw);
  auto nl = body.rfind('\n');
  std::string_view last = trim(nl == std::string_view::npos ? body : body.substr(nl + 1));
  std::string_view before = nl == std::string_view::npos ? std::string_view{} : body.substr(0, nl);

  std::string_view line = last;
  while (!line.empty() && (line.back() == ']' || line.back() == ')' || line.back() == '.' ||
                           line.back() == '*' || line.back() == ' '))
    line.remove_suffix(1);
  auto lower = to_lower_ascii(line);

  std::optional<Winner> winner;
  std::size_t cut = 0;
  for (auto [suffix, w] : {std::pair{std::string_view("document 1"), Winner::document_1},
                           std::pair{std::string_view("document 2"), Winner::document_2}}) {
    if (lower.ends_with(suffix)) {
      winner = w;
      cut = lower.size() - suffix.size();
    }
  }
  if (!winner)
    return Rejection{RejectReason::invalid_verdict,
                     "final line does not name Document 1 or Document 2"};

  std::string_view prefix = trim(line.substr(0, cut));
  while (!prefix.empty() && (prefix.back() == '(' || prefix.back() == '*' || prefix.back() == ' '))
    prefix.remove_suffix(1);
  auto prefix_lower = to_lower_ascii(prefix);
  constexpr std::string_view kLabel = "better-simplified document:";
  std::string reasoning(trim(before));
  if (!prefix.empty()) {
    if (!prefix_lower.ends_with(kLabel))
      return Rejection{RejectReason::invalid_verdict, "verdict not on its own final line"};
    auto head = prefix.substr(0, prefix.size() - kLabel.size());
    auto head_lower = to_lower_ascii(head);
    if (head_lower.ends_with("the ")) head = head.substr(0, head.size() - 4);
    auto tail = trim(head);
    if (!tail.empty()) reasoning += (reasoning.empty() ? "" : "\n") + std::string(tail);
  }
  for (std::string_view label : {"[reasoning content:", "reasoning content:"}) {
    if (to_lower_ascii(std::string_view(reasoning).substr(0, label.size())) == label) {
      reasoning = std::string(trim(std::string_view(reasoning).substr(label.size())));
      break;
    }
  }
  return JudgeVerdict{*winner, std::move(reasoning), std::string(raw)};
}

JudgeResult gpt_judge(std::string_view baseline_output, std::string_view candidate_output,
                      LlmGateway& gateway, const PromptCatalog& catalog,
                      const GenerationParams& params, int max_attempts) {
  if (trim(baseline_output).empty() || trim(candidate_output).empty())
    throw Error(ErrorCode::invalid_argument, "judge needs two nonempty documents");
  auto prompt = render(catalog.get(TemplateName::judge),
                       {{"BASELINE_DOCUMENT", std::string(baseline_output)},
                        {"CANDIDATE_DOCUMENT", std::string(candidate_output)}});
  auto filtered = over_generate_filter<std::optional<JudgeVerdict>>(
      [&] { return gateway.complete(prompt.messages, params, "judge").text; },
      [](const std::string& raw) -> Outcome<std::optional<JudgeVerdict>> {
        auto v = parse_judge_verdict(raw);
        if (!v.accepted()) return v.rejection();
        return std::optional<JudgeVerdict>(std::move(v).value());
      },
      max_attempts, std::nullopt);
  return {std::move(filtered.value), std::move(filtered.log)};
}

std::vector<JudgeResult> judge_documents(std::string_view baseline_output,
                                         std::string_view candidate_output, LlmGateway& gateway,
                                         const PromptCatalog& catalog,
                                         const GenerationParams& params, int max_attempts,
                                         bool swap) {
  std::vector<JudgeResult> out;
  out.push_back(gpt_judge(baseline_output, candidate_output, gateway, catalog, params, max_attempts));
  if (swap) {
    auto r = gpt_judge(candidate_output, baseline_output, gateway, catalog, params, max_attempts);
    if (r.verdict)
      r.verdict->winner =
          r.verdict->winner == Winner::document_1 ? Winner::document_2 : Winner::document_1;
    out.push_back(std::move(r));
  }
  return out;
}

double win_rate(std::span<const JudgeVerdict> verdicts) {
  if (verdicts.empty()) throw Error(ErrorCode::no_verdicts, "no parsed judge verdicts");
  double wins = 0;
  for (const auto& v : verdicts)
    if (v.winner == Winner::document_2) wins += 1;
  return 100.0 * wins / static_cast<double>(verdicts.size());
}

std::vector<JudgeVerdict> parsed_verdicts(std::span<const JudgeResult> results) {
  std::vector<JudgeVerdict> out;
  for (const auto& r : results)
    if (r.verdict) out.push_back(*r.verdict);
  return out;
}

// --- reports --------------------------------------------------------------

namespace {

json stats_json(const TokenStats& s) {
  return {{"paragraphs", s.paragraph_count},
          {"sentences", s.sentence_count},
          {"tokens", s.token_count},
          {"words", s.word_count},
          {"syllables", s.syllable_count}};
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

json to_json(const MetricReport& r) {
  json per_n = json::array();
  for (const auto& c : r.sari.per_n)
    per_n.push_back({{"add_f1", c.add_f1}, {"keep_f1", c.keep_f1}, {"del_precision", c.del_precision}});
  json j = {{"doc_id", r.doc_id},
            {"sari", {{"aggregate", r.sari.aggregate}, {"per_n", per_n}}},
            {"sari_joint", r.sari_joint},
            {"d_sari", r.d_sari},
            {"fkgl", r.fkgl},
            {"token_stats_in", stats_json(r.token_stats_in)},
            {"token_stats_out", stats_json(r.token_stats_out)}};
  if (r.bartscore) j["bartscore"] = *r.bartscore;
  if (r.gpt) j["gpt"] = *r.gpt;
  return j;
}

MetricReport score_document(const std::string& doc_id, std::string_view source,
                            std::string_view output, std::span<const std::string> references,
                            bool include_subheadings) {
  auto prep = [&](std::string_view t) {
    return include_subheadings ? std::string(t) : strip_subheadings(t);
  };
  const auto src = prep(source);
  const auto out = prep(output);
  std::vector<std::string> refs;
  for (const auto& r : references) refs.push_back(prep(r));

  MetricReport report;
  report.doc_id = doc_id;
  report.sari = sari_mean_single(src, out, refs);
  report.sari_joint = sari(src, out, refs).aggregate;
  report.d_sari = d_sari(src, out, refs);
  report.fkgl = fkgl(out);
  report.token_stats_in = doc_stats(parse_document(src));
  report.token_stats_out = doc_stats(parse_document(out));
  return report;
}

std::map<std::string, double> load_score_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open score sidecar " + path.string());
  std::map<std::string, double> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      auto j = json::parse(line);
      out[j.at("doc_id").get<std::string>()] = j.at("score").get<double>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::io, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::string summary_table(std::span<const MetricReport> reports) {
  const bool bar = std::any_of(reports.begin(), reports.end(), [](auto& r) { return r.bartscore.has_value(); });
  const bool gpt = std::any_of(reports.begin(), reports.end(), [](auto& r) { return r.gpt.has_value(); });
  std::string out = "doc_id\tSA\tDSA\tFKG";
  if (bar) out += "\tBAR";
  if (gpt) out += "\tGPT";
  out += '\n';

  double sa = 0, dsa = 0, fk = 0, bar_sum = 0, gpt_sum = 0;
  std::size_t bar_n = 0, gpt_n = 0;
  for (const auto& r : reports) {
    out += r.doc_id + '\t' + fixed2(r.sari.aggregate) + '\t' + fixed2(r.d_sari) + '\t' + fixed2(r.fkgl);
    if (bar) out += '\t' + (r.bartscore ? fixed2(*r.bartscore) : std::string("-"));
    if (gpt) out += '\t' + (r.gpt ? fixed2(*r.gpt) : std::string("-"));
    out += '\n';
    sa += r.sari.aggregate;
    dsa += r.d_sari;
    fk += r.fkgl;
    if (r.bartscore) bar_sum += *r.bartscore, ++bar_n;
    if (r.gpt) gpt_sum += *r.gpt, ++gpt_n;
  }
  if (!reports.empty()) {
    const double n = static_cast<double>(reports.size());
    out += "mean\t" + fixed2(sa / n) + '\t' + fixed2(dsa / n) + '\t' + fixed2(fk / n);
    if (bar) out += '\t' + (bar_n ? fixed2(bar_sum / static_cast<double>(bar_n)) : std::string("-"));
    if (gpt) out += '\t' + (gpt_n ? fixed2(gpt_sum / static_cast<double>(gpt_n)) : std::string("-"));
    out += '\n';
  }
  return out;
}

}  // namespace docsimp
