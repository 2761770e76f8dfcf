#include "docsimp/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <thread>

#include "docsimp/digest.hpp"
#include "docsimp/error.hpp"

namespace docsimp {

using nlohmann::json;

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::progds: return "progds";
    case Method::sumds: return "sumds";
    case Method::p1: return "p1";
    case Method::p2: return "p2";
    case Method::ic: return "ic";
  }
  return "unknown";
}

std::optional<Method> method_from_string(std::string_view name) {
  auto n = to_lower_ascii(name);
  for (auto m : {Method::progds, Method::sumds, Method::p1, Method::p2, Method::ic})
    if (n == to_string(m)) return m;
  return std::nullopt;
}

void PipelineConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::config, m); };
  if (iterations < 1) fail("iterations must be >= 1");
  if (iterations > 1 && method != Method::progds) fail("iterations > 1 requires method progds");
  if (parallelism < 1) fail("parallelism must be >= 1");
  if (max_attempts < 1) fail("max_attempts must be >= 1");
  if (k_examples < 1) fail("k_examples must be >= 1");
  if (lexical_min_tokens < 0) fail("lexical_min_tokens must be >= 0");
  params.validate();
}

json to_json(const StageTrace& t) {
  json j = {{"doc_id", t.doc_id},
            {"iteration", t.iteration},
            {"stage", t.stage},
            {"unit", t.unit_ref},
            {"prompt_digest", t.prompt_digest},
            {"output_digest", t.output_digest},
            {"attempt_log", to_json(t.attempt_log)}};
  if (t.note) j["note"] = *t.note;
  return j;
}

bool SimplifiedDocument::degraded() const {
  for (const auto& t : traces)
    if (t.attempt_log.fallback_used) return true;
  return false;
}

std::vector<std::string> SimplifiedDocument::fallback_stages() const {
  std::vector<std::string> out;
  for (const auto& t : traces)
    if (t.attempt_log.fallback_used) out.push_back(t.stage + " (" + t.unit_ref + ")");
  return out;
}

std::string reassemble(const DiscoursePlan& plan, const std::map<int, std::string>& unit_texts,
                       bool include_subheadings) {
  std::string out;
  auto append_block = [&](std::string_view block) {
    if (!out.empty()) out += "\n\n";
    out += block;
  };
  for (const auto& topic : plan.topics) {
    if (include_subheadings) append_block("## " + topic.subheading);
    for (int m : topic.members) {
      auto it = unit_texts.find(m);
      if (it == unit_texts.end())
        throw Error(ErrorCode::missing_unit_text,
                    "no text for unit " + std::to_string(m) + " of topic '" + topic.subheading + "'");
      append_block(it->second);
    }
  }
  return out;
}

std::vector<std::string> source_paragraphs(const Document& doc) {
  std::vector<std::string> out;
  for (const auto& p : doc.paragraphs) {
    auto body = strip_subheadings(p.text);
    auto norm = normalize_whitespace(body);
    if (!norm.empty()) out.push_back(std::move(norm));
  }
  return out;
}

void parallel_for(std::size_t n, int parallelism, const std::function<void(std::size_t)>& fn) {
  if (parallelism <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;
  auto worker = [&] {
    for (;;) {
      auto i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  auto count = std::min<std::size_t>(static_cast<std::size_t>(parallelism), n);
  for (std::size_t t = 0; t < count; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

CallLedger ledger_delta(const CallLedger& after, const CallLedger& before) {
  CallLedger d;
  d.call_count = after.call_count - before.call_count;
  d.retry_count = after.retry_count - before.retry_count;
  d.cache_hits = after.cache_hits - before.cache_hits;
  d.wall_time = after.wall_time - before.wall_time;
  for (const auto& [stage, count] : after.per_stage_counts) {
    auto it = before.per_stage_counts.find(stage);
    long diff = count - (it == before.per_stage_counts.end() ? 0 : it->second);
    if (diff != 0) d.per_stage_counts[stage] = diff;
  }
  return d;
}

namespace {

long token_count(std::string_view text) { return static_cast<long>(tokenize(text).size()); }

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<std::string> format_examples(const std::vector<ExamplePair>& pairs, BankKind kind) {
  std::vector<std::string> out;
  for (const auto& p : pairs) out.push_back(format_example(p, kind));
  return out;
}

// Paragraphs of a model output, subheading lines dropped.
std::vector<std::string> output_paragraphs(std::string_view text) {
  auto doc = parse_document(strip_subheadings(text));
  std::vector<std::string> out;
  if (doc.title) out.push_back(*doc.title);
  for (auto& p : doc.paragraphs) out.push_back(std::move(p.text));
  return out;
}

// One model-backed unit: render, over-generate, filter, trace.
struct UnitResult {
  std::string text;
  StageTrace trace;
};

class Runner {
 public:
  Runner(const Document& doc, const PipelineConfig& cfg, PipelineDeps& deps)
      : doc_(doc), cfg_(cfg), deps_(deps) {
    cfg_.validate();
    before_ = deps_.gateway.ledger_snapshot();
    start_ = std::chrono::steady_clock::now();
  }

  UnitResult text_unit(const RenderedPrompt& prompt, std::string_view stage, std::string unit_ref,
                       int iteration, ExtractStage extract, long source_tokens,
                       const std::string& fallback) {
    auto filtered = over_generate_filter<std::string>(
        [&] { return deps_.gateway.complete(prompt.messages, cfg_.params, stage).text; },
        [&](const std::string& raw) {
          return extract_simplified_text(raw, extract, source_tokens, deps_.filter);
        },
        cfg_.max_attempts, fallback);
    UnitResult r;
    r.trace = make_trace(iteration, stage, std::move(unit_ref), prompt);
    r.trace.attempt_log = std::move(filtered.log);
    r.trace.output_digest = sha256_hex(filtered.value);
    r.text = std::move(filtered.value);
    return r;
  }

  StageTrace make_trace(int iteration, std::string_view stage, std::string unit_ref,
                        const RenderedPrompt& prompt) const {
    StageTrace t;
    t.doc_id = doc_.id;
    t.iteration = iteration;
    t.stage = std::string(stage);
    t.unit_ref = std::move(unit_ref);
    t.prompt_digest = prompt_digest(prompt.messages);
    return t;
  }

  SimplifiedDocument finish(std::string text) {
    SimplifiedDocument out;
    out.doc_id = doc_.id;
    out.text = std::move(text);
    out.document = parse_document(out.text, doc_.id);
    out.document.title = doc_.title;
    out.plan_history = std::move(plans_);
    out.traces = std::move(traces_);
    out.ledger = ledger_delta(deps_.gateway.ledger_snapshot(), before_);
    out.ledger.wall_time = std::chrono::steady_clock::now() - start_;
    return out;
  }

  std::string progds_iteration(const std::vector<std::string>& paragraphs, int iteration);
  std::string sumds(const std::vector<std::string>& paragraphs);
  std::string direct(const std::vector<std::string>& paragraphs);

 private:
  std::vector<std::string> icl_examples(const ExampleBank* bank, std::string_view query,
                                        bool by_structure) const {
    if (!cfg_.use_icl || bank == nullptr || bank->empty()) return {};
    if (by_structure)
      return format_examples(select_by_structure(query, *bank, cfg_.k_examples), bank->kind());
    if (deps_.icl.embedder == nullptr) return {};
    return format_examples(select_by_embedding(query, *bank, cfg_.k_examples, *deps_.icl.embedder),
                           bank->kind());
  }

  const Document& doc_;
  const PipelineConfig& cfg_;
  PipelineDeps& deps_;
  CallLedger before_;
  std::chrono::steady_clock::time_point start_;
  std::vector<DiscoursePlan> plans_;
  std::vector<StageTrace> traces_;
};

std::string Runner::progds_iteration(const std::vector<std::string>& paragraphs, int iteration) {
  if (paragraphs.empty()) return {};
  const auto& prompts = deps_.prompts;

  // 1. discourse
  const bool single = paragraphs.size() == 1;
  const UnitKind kind = single ? UnitKind::sentence : UnitKind::paragraph;
  std::vector<std::string> units;
  if (single) {
    for (auto& s : split_sentences(paragraphs.front())) units.push_back(std::move(s.text));
  } else {
    units = paragraphs;
  }
  const int n_units = static_cast<int>(units.size());
  std::vector<std::string> numbered;
  for (int i = 0; i < n_units; ++i)
    numbered.push_back((single ? "Sentence " : "Paragraph ") + std::to_string(i + 1) + ": " +
                       units[static_cast<std::size_t>(i)]);
  auto discourse_prompt =
      single ? render(prompts.get(TemplateName::discourse_single_paragraph),
                      {{"NUMBERED_PARAGRAPH", join(numbered, "\n")}})
             : render(prompts.get(TemplateName::discourse),
                      {{"NUMBERED_DOCUMENT", join(numbered, "\n")}});
  auto plan_result = over_generate_filter<DiscoursePlan>(
      [&] { return deps_.gateway.complete(discourse_prompt.messages, cfg_.params, "discourse").text; },
      [&](const std::string& raw) { return try_parse_discourse_plan(raw, n_units, kind); },
      cfg_.max_attempts, fallback_plan(n_units, kind));
  auto trace = make_trace(iteration, "discourse", "document", discourse_prompt);
  trace.attempt_log = std::move(plan_result.log);
  trace.output_digest = sha256_hex(serialize_plan(plan_result.value));
  traces_.push_back(std::move(trace));
  const DiscoursePlan plan = std::move(plan_result.value);
  plans_.push_back(plan);

  // Topic-stage units. Paragraph plans keep paragraph numbers; sentence plans
  // turn each topic's sentences into one new paragraph numbered by topic.
  struct TopicUnit {
    int key;
    std::string subheading;
    std::string text;
  };
  std::vector<TopicUnit> topic_units;
  DiscoursePlan assembly;
  if (kind == UnitKind::paragraph) {
    assembly = plan;
    for (const auto& t : plan.topics)
      for (int m : t.members)
        topic_units.push_back({m, t.subheading, units[static_cast<std::size_t>(m - 1)]});
  } else {
    assembly.unit_kind = UnitKind::paragraph;
    assembly.n_units = static_cast<int>(plan.topics.size());
    for (std::size_t i = 0; i < plan.topics.size(); ++i) {
      const auto& t = plan.topics[i];
      std::vector<std::string> parts;
      for (int m : t.members) parts.push_back(units[static_cast<std::size_t>(m - 1)]);
      const int key = static_cast<int>(i) + 1;
      assembly.topics.push_back({t.subheading, {key}});
      topic_units.push_back({key, t.subheading, join(parts, " ")});
    }
  }

  // 2. topic
  std::vector<UnitResult> topic_results(topic_units.size());
  const auto& topic_tmpl = prompts.get(TemplateName::topic);
  parallel_for(topic_units.size(), cfg_.parallelism, [&](std::size_t i) {
    const auto& u = topic_units[i];
    auto prompt = render_slots(
        topic_tmpl, {{"SUBHEADING", u.subheading}, {"PARAGRAPH", u.text}},
        {icl_examples(deps_.icl.paragraph_bank, u.text, false),
         icl_examples(deps_.icl.structure_bank, u.text, true)});
    auto ref = (kind == UnitKind::paragraph ? "paragraph " : "topic ") + std::to_string(u.key);
    topic_results[i] = text_unit(prompt, "topic", ref, iteration, ExtractStage::paragraph,
                                 token_count(u.text), u.text);
  });
  for (auto& r : topic_results) traces_.push_back(std::move(r.trace));

  // 3. lexical, per sentence of the topic-stage output
  struct SentenceJob {
    std::size_t unit;       // index into topic_units
    std::size_t paragraph;  // paragraph within that unit's output
    int ordinal;            // 1-based within the unit
    std::string text;
  };
  std::vector<SentenceJob> jobs;
  std::vector<std::vector<std::size_t>> paragraph_sizes(topic_units.size());
  for (std::size_t u = 0; u < topic_units.size(); ++u) {
    int ordinal = 0;
    auto paras = output_paragraphs(topic_results[u].text);
    for (std::size_t p = 0; p < paras.size(); ++p) {
      auto sentences = split_sentences(paras[p]);
      paragraph_sizes[u].push_back(sentences.size());
      for (auto& s : sentences) jobs.push_back({u, p, ++ordinal, std::move(s.text)});
    }
  }
  std::vector<UnitResult> lexical_results(jobs.size());
  const auto& lexical_tmpl = prompts.get(TemplateName::lexical);
  const std::string unit_word = kind == UnitKind::paragraph ? "sentence " : "topic-sentence ";
  parallel_for(jobs.size(), cfg_.parallelism, [&](std::size_t i) {
    const auto& job = jobs[i];
    auto ref = unit_word + std::to_string(topic_units[job.unit].key) + "." +
               std::to_string(job.ordinal);
    const long tokens = token_count(job.text);
    if (tokens < cfg_.lexical_min_tokens) {
      UnitResult r;
      r.text = job.text;
      r.trace.doc_id = doc_.id;
      r.trace.iteration = iteration;
      r.trace.stage = "lexical";
      r.trace.unit_ref = ref;
      r.trace.output_digest = sha256_hex(job.text);
      r.trace.note = "skipped: " + std::to_string(tokens) + " tokens";
      lexical_results[i] = std::move(r);
      return;
    }
    std::vector<std::string> examples;
    if (cfg_.use_icl && deps_.icl.lexical_bank && !deps_.icl.lexical_bank->empty())
      examples = format_examples(select_lexical_examples(*deps_.icl.lexical_bank, cfg_.k_examples),
                                 BankKind::lexical);
    auto prompt = render(lexical_tmpl, {{"SENTENCE", job.text}}, examples);
    lexical_results[i] =
        text_unit(prompt, "lexical", ref, iteration, ExtractStage::sentence, tokens, job.text);
  });

  // 4. reassemble
  std::map<int, std::string> unit_texts;
  std::size_t cursor = 0;
  for (std::size_t u = 0; u < topic_units.size(); ++u) {
    std::vector<std::string> paras;
    for (auto count : paragraph_sizes[u]) {
      std::vector<std::string> sentences;
      for (std::size_t s = 0; s < count; ++s) {
        sentences.push_back(normalize_whitespace(lexical_results[cursor].text));
        traces_.push_back(std::move(lexical_results[cursor].trace));
        ++cursor;
      }
      paras.push_back(join(sentences, " "));
    }
    unit_texts[topic_units[u].key] = join(paras, "\n\n");
  }
  return reassemble(assembly, unit_texts, cfg_.include_subheadings);
}

std::string Runner::sumds(const std::vector<std::string>& paragraphs) {
  if (paragraphs.empty()) return {};
  const auto& prompts = deps_.prompts;
  const auto body = join(paragraphs, "\n\n");

  std::vector<std::string> leads;
  for (const auto& p : paragraphs) {
    auto s = split_sentences(p);
    leads.push_back(s.empty() ? p : s.front().text);
  }
  auto summary_prompt = render(prompts.get(TemplateName::summarizer), {{"SOURCE_DOCUMENT", body}});
  auto summary = text_unit(summary_prompt, "summary", "document", 1, ExtractStage::summary,
                           token_count(body), join(leads, " "));
  traces_.push_back(std::move(summary.trace));

  const bool single = paragraphs.size() == 1;
  std::vector<std::string> units;
  if (single) {
    for (auto& s : split_sentences(paragraphs.front())) units.push_back(std::move(s.text));
  } else {
    units = paragraphs;
  }
  const std::string stage = single ? "sentence" : "paragraph";
  std::vector<UnitResult> results(units.size());
  const auto& tmpl = prompts.get(TemplateName::paragraph_simplifier);
  parallel_for(units.size(), cfg_.parallelism, [&](std::size_t i) {
    auto prompt = render(tmpl, {{"SUMMARY", summary.text}, {"PARAGRAPH", units[i]}},
                         icl_examples(deps_.icl.paragraph_bank, units[i], false));
    results[i] = text_unit(prompt, stage, stage + " " + std::to_string(i + 1), 1,
                           single ? ExtractStage::sentence : ExtractStage::paragraph,
                           token_count(units[i]), units[i]);
  });
  std::vector<std::string> texts;
  for (auto& r : results) {
    texts.push_back(r.text);
    traces_.push_back(std::move(r.trace));
  }
  return join(texts, single ? " " : "\n\n");
}

std::string Runner::direct(const std::vector<std::string>& paragraphs) {
  if (paragraphs.empty()) return {};
  const auto body = join(paragraphs, "\n\n");
  RenderedPrompt prompt;
  switch (cfg_.method) {
    case Method::p1:
      prompt = render(deps_.prompts.get(TemplateName::p1), {{"RAW_TEXT", body}});
      break;
    case Method::p2:
      prompt = render(deps_.prompts.get(TemplateName::p2), {{"RAW_TEXT", body}});
      break;
    case Method::ic:
      if (!deps_.icl.document_example)
        throw Error(ErrorCode::invalid_argument, "method ic needs a document example pair");
      prompt = render(deps_.prompts.get(TemplateName::ic),
                      {{"DOCUMENT_EXAMPLE", format_document_example(*deps_.icl.document_example)},
                       {"RAW_TEXT", body}});
      break;
    default:
      throw Error(ErrorCode::invalid_argument, "run_direct needs method p1, p2 or ic");
  }
  auto r = text_unit(prompt, "direct", "document", 1, ExtractStage::paragraph, token_count(body),
                     body);
  traces_.push_back(std::move(r.trace));
  return r.text;
}

void require_method(const PipelineConfig& cfg, std::initializer_list<Method> allowed,
                    std::string_view runner) {
  for (auto m : allowed)
    if (cfg.method == m) return;
  throw Error(ErrorCode::invalid_argument,
              std::string(runner) + " cannot run method " + std::string(to_string(cfg.method)));
}

}  // namespace

SimplifiedDocument run_progds(const Document& doc, const PipelineConfig& cfg, PipelineDeps& deps) {
  require_method(cfg, {Method::progds}, "run_progds");
  Runner runner(doc, cfg, deps);
  auto paragraphs = source_paragraphs(doc);
  std::string text;
  for (int it = 1; it <= cfg.iterations; ++it) {
    text = runner.progds_iteration(paragraphs, it);
    // The next iteration reads this output as a fresh document.
    paragraphs = source_paragraphs(parse_document(text));
  }
  return runner.finish(std::move(text));
}

SimplifiedDocument run_sumds(const Document& doc, const PipelineConfig& cfg, PipelineDeps& deps) {
  require_method(cfg, {Method::sumds}, "run_sumds");
  Runner runner(doc, cfg, deps);
  auto text = runner.sumds(source_paragraphs(doc));
  return runner.finish(std::move(text));
}

SimplifiedDocument run_direct(const Document& doc, const PipelineConfig& cfg, PipelineDeps& deps) {
  require_method(cfg, {Method::p1, Method::p2, Method::ic}, "run_direct");
  Runner runner(doc, cfg, deps);
  auto text = runner.direct(source_paragraphs(doc));
  return runner.finish(std::move(text));
}

SimplifiedDocument simplify(const Document& doc, const PipelineConfig& cfg, PipelineDeps& deps) {
  switch (cfg.method) {
    case Method::progds: return run_progds(doc, cfg, deps);
    case Method::sumds: return run_sumds(doc, cfg, deps);
    default: return run_direct(doc, cfg, deps);
  }
}

}  // namespace docsimp
