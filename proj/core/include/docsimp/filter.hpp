#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "docsimp/error.hpp"

namespace docsimp {

enum class RejectReason {
  malformed_line,
  duplicate_member,
  index_range,
  empty_plan,
  empty_after_strip,
  refusal_detected,
  length_exploded,
  invalid_verdict,
};

std::string_view to_string(RejectReason reason) noexcept;

struct Rejection {
  RejectReason reason;
  std::string detail;
};

/// Either an accepted value or the reason it was rejected.
template <class T>
class Outcome {
 public:
  Outcome(T value) : state_(std::move(value)) {}
  Outcome(Rejection rejection) : state_(std::move(rejection)) {}

  bool accepted() const { return std::holds_alternative<T>(state_); }
  const T& value() const& { return std::get<T>(state_); }
  T&& value() && { return std::get<T>(std::move(state_)); }
  const Rejection& rejection() const { return std::get<Rejection>(state_); }

 private:
  std::variant<T, Rejection> state_;
};

struct Attempt {
  std::string raw_text;
  std::optional<Rejection> rejection;  // empty when accepted

  bool accepted() const { return !rejection.has_value(); }
};

struct AttemptLog {
  std::vector<Attempt> attempts;
  bool fallback_used = false;
  std::optional<std::string> warning;
};

nlohmann::json to_json(const AttemptLog& log);

// --- discourse plans ------------------------------------------------------

enum class UnitKind { paragraph, sentence };

std::string_view to_string(UnitKind kind) noexcept;

struct Topic {
  std::string subheading;
  std::vector<int> members;

  bool operator==(const Topic&) const = default;
};

struct DiscoursePlan {
  std::vector<Topic> topics;
  std::set<int> deleted;
  UnitKind unit_kind = UnitKind::paragraph;
  int n_units = 0;

  bool operator==(const DiscoursePlan&) const = default;

  /// Throws Error(invalid_argument) when an invariant does not hold.
  void validate() const;
};

nlohmann::json to_json(const DiscoursePlan& plan);

class PlanParseError : public Error {
 public:
  PlanParseError(RejectReason reason, const std::string& message)
      : Error(ErrorCode::invalid_argument, message), reason_(reason) {}

  RejectReason reason() const noexcept { return reason_; }

 private:
  RejectReason reason_;
};

/// Grammar: nonempty lines "<subheading>: <int>[, <int>]*", list markers
/// ("1.", "-", "*") stripped. Unlisted indices become deleted.
Outcome<DiscoursePlan> try_parse_discourse_plan(std::string_view raw, int n_units, UnitKind kind);

/// Throwing form of try_parse_discourse_plan (PlanParseError).
DiscoursePlan parse_discourse_plan(std::string_view raw, int n_units, UnitKind kind);

std::string serialize_plan(const DiscoursePlan& plan);

/// One topic per unit, subheadings "Section <i>", nothing deleted.
DiscoursePlan fallback_plan(int n_units, UnitKind kind);

// --- simplified text ------------------------------------------------------

enum class ExtractStage { summary, paragraph, sentence };

struct FilterConfig {
  double expansion_factor = 3.0;
  std::vector<std::string> refusal_prefixes;
  std::vector<std::string> refusal_anywhere;

  /// Default refusal phrase lists (lowercase).
  static FilterConfig defaults();
};

/// Strips preamble labels and code fences, then rejects empty output,
/// refusals, and output longer than expansion_factor x source tokens
/// (skipped when source_len_tokens is 0).
Outcome<std::string> extract_simplified_text(std::string_view raw, ExtractStage stage,
                                             long source_len_tokens,
                                             const FilterConfig& config = FilterConfig::defaults());

// --- over-generate-then-filter --------------------------------------------

template <class T>
struct Filtered {
  T value;
  AttemptLog log;
};

/// Calls generate until validate accepts or max_attempts is reached; returns
/// the fallback (fallback_used = true) when every attempt is rejected.
/// Exceptions thrown by generate propagate.
template <class T>
Filtered<T> over_generate_filter(const std::function<std::string()>& generate,
                                 const std::function<Outcome<T>(const std::string&)>& validate,
                                 int max_attempts, T fallback) {
  if (max_attempts < 1) throw Error(ErrorCode::invalid_argument, "max_attempts must be >= 1");
  AttemptLog log;
  for (int i = 0; i < max_attempts; ++i) {
    std::string raw = generate();
    auto outcome = validate(raw);
    if (outcome.accepted()) {
      log.attempts.push_back({std::move(raw), std::nullopt});
      return {std::move(outcome).value(), std::move(log)};
    }
    log.attempts.push_back({std::move(raw), outcome.rejection()});
  }
  log.fallback_used = true;
  log.warning = "all " + std::to_string(max_attempts) + " attempts rejected; fallback used";
  return {std::move(fallback), std::move(log)};
}

}  // namespace docsimp
