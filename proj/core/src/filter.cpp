#include "docsimp/filter.hpp"

#include <algorithm>
#include <charconv>

#include "docsimp/text.hpp"

namespace docsimp {

using nlohmann::json;

std::string_view to_string(RejectReason reason) noexcept {
  switch (reason) {
    case RejectReason::malformed_line: return "malformed-line";
    case RejectReason::duplicate_member: return "duplicate-member";
    case RejectReason::index_range: return "index-range";
    case RejectReason::empty_plan: return "empty-plan";
    case RejectReason::empty_after_strip: return "empty-after-strip";
    case RejectReason::refusal_detected: return "refusal-detected";
    case RejectReason::length_exploded: return "length-exploded";
    case RejectReason::invalid_verdict: return "invalid-verdict";
  }
  return "unknown";
}

std::string_view to_string(UnitKind kind) noexcept {
  return kind == UnitKind::paragraph ? "paragraph" : "sentence";
}

json to_json(const AttemptLog& log) {
  json attempts = json::array();
  for (const auto& a : log.attempts) {
    json j = {{"raw_text", a.raw_text}};
    if (a.accepted()) {
      j["verdict"] = "accepted";
    } else {
      j["verdict"] = "rejected";
      j["reason"] = to_string(a.rejection->reason);
      j["detail"] = a.rejection->detail;
    }
    attempts.push_back(std::move(j));
  }
  json out = {{"attempts", attempts}, {"fallback_used", log.fallback_used}};
  if (log.warning) out["warning"] = *log.warning;
  return out;
}

void DiscoursePlan::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::invalid_argument, m); };
  if (n_units < 1) fail("plan must cover at least one unit");
  if (topics.empty()) fail("plan has no topics");
  std::set<int> seen;
  for (const auto& t : topics) {
    if (t.subheading.empty()) fail("plan topic has an empty subheading");
    if (t.members.empty()) fail("plan topic '" + t.subheading + "' has no members");
    for (int m : t.members) {
      if (m < 1 || m > n_units) fail("plan member " + std::to_string(m) + " out of range");
      if (!seen.insert(m).second) fail("plan member " + std::to_string(m) + " listed twice");
    }
  }
  std::set<int> expected_deleted;
  for (int i = 1; i <= n_units; ++i)
    if (!seen.contains(i)) expected_deleted.insert(i);
  if (expected_deleted != deleted) fail("plan deleted set does not complement its members");
}

json to_json(const DiscoursePlan& plan) {
  json topics = json::array();
  for (const auto& t : plan.topics)
    topics.push_back({{"subheading", t.subheading}, {"members", t.members}});
  return {{"unit_kind", to_string(plan.unit_kind)},
          {"n_units", plan.n_units},
          {"topics", topics},
          {"deleted", plan.deleted}};
}

namespace {

std::string_view strip_list_marker(std::string_view line) {
  if (line.starts_with("- ") || line.starts_with("* ")) return trim(line.substr(2));
  if (line.starts_with("• ")) return trim(line.substr(std::string_view("• ").size()));
  std::size_t i = 0;
  while (i < line.size() && line[i] >= '0' && line[i] <= '9') ++i;
  if (i > 0 && i + 1 < line.size() && (line[i] == '.' || line[i] == ')') && line[i + 1] == ' ')
    return trim(line.substr(i + 2));
  return line;
}

std::string_view strip_unit_word(std::string_view list) {
  auto lower = to_lower_ascii(list);
  for (std::string_view w : {"paragraphs", "paragraph", "sentences", "sentence"}) {
    if (lower.starts_with(w)) return trim(list.substr(w.size()));
  }
  return list;
}

Rejection reject(RejectReason r, std::string detail) { return {r, std::move(detail)}; }

}  // namespace

Outcome<DiscoursePlan> try_parse_discourse_plan(std::string_view raw, int n_units, UnitKind kind) {
  if (n_units < 1) throw Error(ErrorCode::invalid_argument, "n_units must be >= 1");
  DiscoursePlan plan;
  plan.unit_kind = kind;
  plan.n_units = n_units;
  std::set<int> seen;

  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= raw.size()) {
    auto eol = raw.find('\n', pos);
    if (eol == std::string_view::npos) eol = raw.size();
    auto line = trim(raw.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (!line.empty()) {
      line = strip_list_marker(line);
      if (to_lower_ascii(line) == "the organized content:") continue;
      auto colon = line.rfind(':');
      if (colon == std::string_view::npos)
        return reject(RejectReason::malformed_line,
                      "line " + std::to_string(line_no) + " has no ':' separator");
      auto subheading = trim(line.substr(0, colon));
      auto list = strip_unit_word(trim(line.substr(colon + 1)));
      if (subheading.empty())
        return reject(RejectReason::malformed_line,
                      "line " + std::to_string(line_no) + " has an empty subheading");
      if (list.empty())
        return reject(RejectReason::malformed_line,
                      "line " + std::to_string(line_no) + " lists no unit numbers");

      Topic topic{std::string(subheading), {}};
      std::size_t p = 0;
      while (p <= list.size()) {
        auto comma = list.find(',', p);
        if (comma == std::string_view::npos) comma = list.size();
        auto item = trim(list.substr(p, comma - p));
        p = comma + 1;
        int value = 0;
        auto [end, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
        if (item.empty() || item.size() > 9 || ec != std::errc() ||
            end != item.data() + item.size() || item.front() == '-' || item.front() == '+')
          return reject(RejectReason::malformed_line,
                        "line " + std::to_string(line_no) + ": '" + std::string(item) +
                            "' is not a unit number");
        if (value < 1 || value > n_units)
          return reject(RejectReason::index_range,
                        "unit " + std::to_string(value) + " outside [1, " +
                            std::to_string(n_units) + "]");
        if (!seen.insert(value).second)
          return reject(RejectReason::duplicate_member,
                        "unit " + std::to_string(value) + " assigned to more than one topic");
        topic.members.push_back(value);
        if (comma == list.size()) break;
      }
      plan.topics.push_back(std::move(topic));
    }
    if (eol == raw.size()) break;
  }

  if (plan.topics.empty()) return reject(RejectReason::empty_plan, "no topics in response");
  for (int i = 1; i <= n_units; ++i)
    if (!seen.contains(i)) plan.deleted.insert(i);
  return plan;
}

DiscoursePlan parse_discourse_plan(std::string_view raw, int n_units, UnitKind kind) {
  auto outcome = try_parse_discourse_plan(raw, n_units, kind);
  if (!outcome.accepted())
    throw PlanParseError(outcome.rejection().reason, outcome.rejection().detail);
  return std::move(outcome).value();
}

std::string serialize_plan(const DiscoursePlan& plan) {
  std::string out;
  for (const auto& t : plan.topics) {
    if (!out.empty()) out.push_back('\n');
    out += t.subheading;
    out += ": ";
    for (std::size_t i = 0; i < t.members.size(); ++i) {
      if (i) out += ", ";
      out += std::to_string(t.members[i]);
    }
  }
  return out;
}

DiscoursePlan fallback_plan(int n_units, UnitKind kind) {
  DiscoursePlan plan;
  plan.unit_kind = kind;
  plan.n_units = n_units;
  for (int i = 1; i <= n_units; ++i) plan.topics.push_back({"Section " + std::to_string(i), {i}});
  return plan;
}

// --- simplified text ------------------------------------------------------

FilterConfig FilterConfig::defaults() {
  // Versioned asset (v1). Prefixes are matched at the start of the stripped
  // output, case-insensitively; "anywhere" phrases match at any position.
  FilterConfig c;
  c.refusal_prefixes = {"i cannot",    "i can't",     "i can’t",   "i'm sorry",
                        "i’m sorry", "i am sorry",  "i'm unable",  "i am unable",
                        "sorry, but",  "i apologize", "i won't",     "i will not"};
  c.refusal_anywhere = {"as an ai"};
  return c;
}

namespace {

constexpr std::string_view kPreambleLabels[] = {
    "the simplified paragraph:", "simplified paragraph:", "the simplified sentence:",
    "simplified sentence:",      "the simplified text:",  "simplified text:",
    "the summary:",              "summary:",
};

std::string remove_fence_lines(std::string_view raw) {
  std::string out;
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    auto eol = raw.find('\n', pos);
    if (eol == std::string_view::npos) eol = raw.size();
    auto line = raw.substr(pos, eol - pos);
    if (!trim(line).starts_with("```")) {
      out.append(line);
      out.push_back('\n');
    }
    if (eol == raw.size()) break;
    pos = eol + 1;
  }
  return out;
}

}  // namespace

Outcome<std::string> extract_simplified_text(std::string_view raw, ExtractStage /*stage*/,
                                             long source_len_tokens, const FilterConfig& config) {
  std::string text = remove_fence_lines(raw);
  std::string_view view = trim(text);
  bool stripped = true;
  while (stripped) {
    stripped = false;
    auto lower = to_lower_ascii(view.substr(0, 40));
    for (auto label : kPreambleLabels) {
      if (lower.starts_with(label)) {
        view = trim(view.substr(label.size()));
        stripped = true;
        break;
      }
    }
  }
  std::string result(view);
  if (result.empty()) return Rejection{RejectReason::empty_after_strip, "nothing left after strip"};

  auto lower = to_lower_ascii(result);
  for (const auto& p : config.refusal_prefixes)
    if (lower.starts_with(p)) return Rejection{RejectReason::refusal_detected, "starts with '" + p + "'"};
  for (const auto& p : config.refusal_anywhere)
    if (lower.find(p) != std::string::npos)
      return Rejection{RejectReason::refusal_detected, "contains '" + p + "'"};

  if (source_len_tokens > 0) {
    auto n = static_cast<double>(tokenize(result).size());
    if (n > config.expansion_factor * static_cast<double>(source_len_tokens))
      return Rejection{RejectReason::length_exploded,
                       std::to_string(static_cast<long>(n)) + " tokens for a " +
                           std::to_string(source_len_tokens) + "-token source"};
  }
  return result;
}

}  // namespace docsimp
