#include "docsimp_cli/commands.hpp"

#include <fstream>
#include <memory>
#include <ostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "docsimp/corpus.hpp"
#include "docsimp/digest.hpp"
#include "docsimp/error.hpp"
#include "docsimp/icl.hpp"
#include "docsimp/metrics.hpp"
#include "docsimp/pipeline.hpp"
#include "docsimp_cli/config.hpp"

namespace docsimp::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << contents;
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

// Doc ids become file names.
void check_doc_id(const std::string& id) {
  if (id.empty() || id == "." || id == ".." || id.find('/') != std::string::npos ||
      id.find('\\') != std::string::npos)
    throw Error(ErrorCode::manifest, "document id '" + id + "' cannot be used as a file name");
}

std::unique_ptr<LlmGateway> make_gateway(const RunConfig& cfg) {
  std::shared_ptr<ChatBackend> backend;
  switch (cfg.gateway.backend) {
    case BackendKind::http:
      backend = std::make_shared<HttpChatBackend>(HttpEndpoint{cfg.gateway.base_url, cfg.gateway.api_key});
      break;
    case BackendKind::replay:
      backend = make_replay_backend(load_replay_script(*cfg.gateway.replay_script));
      break;
    case BackendKind::cache_only:
      backend = std::make_shared<OfflineBackend>();
      break;
  }
  std::shared_ptr<ResponseCache> cache;
  if (cfg.gateway.cache_path)
    cache = std::make_shared<ResponseCache>(*cfg.gateway.cache_path,
                                            cfg.gateway.backend == BackendKind::cache_only);
  GatewayOptions options;
  options.max_transport_retries = cfg.gateway.max_retries;
  options.backoff_base = std::chrono::milliseconds(cfg.gateway.backoff_ms);
  options.model_fallbacks = cfg.gateway.models;
  options.count_cache_hits_as_calls = cfg.gateway.count_cache_hits_as_calls;
  return std::make_unique<LlmGateway>(backend, cache, options);
}

PromptCatalog make_catalog(const RunConfig& cfg) {
  return cfg.prompts_dir ? PromptCatalog(*cfg.prompts_dir) : PromptCatalog();
}

// Banks and embedder live here so IclResources can point at them.
struct IclStore {
  std::optional<ExampleBank> paragraph, structure, lexical;
  std::unique_ptr<EmbeddingProvider> embedder;
  IclResources resources;
};

std::unique_ptr<IclStore> load_icl(const RunConfig& cfg) {
  auto store = std::make_unique<IclStore>();
  const auto& b = cfg.banks;
  if (b.document_example) {
    auto bank = load_bank_jsonl(*b.document_example, BankKind::paragraph_meaning);
    if (bank.empty()) throw Error(ErrorCode::empty_bank, "document example file has no pair");
    store->resources.document_example = bank.entries().front();
  }
  if (!cfg.pipeline.use_icl) return store;
  if (b.paragraph) store->paragraph = load_bank_jsonl(*b.paragraph, BankKind::paragraph_meaning);
  if (b.structure) store->structure = load_bank_jsonl(*b.structure, BankKind::sentence_structure);
  if (b.lexical) store->lexical = load_bank_jsonl(*b.lexical, BankKind::lexical);

  if (store->paragraph) {
    if (cfg.embedding.provider == "http") {
      store->embedder = std::make_unique<HttpEmbeddingProvider>(
          HttpEndpoint{cfg.gateway.base_url, cfg.gateway.api_key}, cfg.embedding.model);
    } else {
      auto local = std::make_unique<LocalNgramEmbedder>(static_cast<std::size_t>(cfg.embedding.dimension));
      std::vector<std::string> corpus;
      for (const auto& e : store->paragraph->entries()) corpus.push_back(e.complex);
      local->fit_idf(corpus);
      store->embedder = std::move(local);
    }
    store->paragraph->build_index(*store->embedder);
  }
  store->resources.paragraph_bank = store->paragraph ? &*store->paragraph : nullptr;
  store->resources.structure_bank = store->structure ? &*store->structure : nullptr;
  store->resources.lexical_bank = store->lexical ? &*store->lexical : nullptr;
  store->resources.embedder = store->embedder.get();
  return store;
}

json file_digest(const std::string& id, const fs::path& path) {
  return {{"id", id}, {"sha256", sha256_hex(read_text_file(path))}};
}

int fatal(CommandIo io, const std::string& message) {
  io.err << "error: " << message << '\n';
  return kExitFatal;
}

}  // namespace

int cmd_simplify(const SimplifyArgs& args, CommandIo io) {
  try {
    auto cfg = load_config(args.config);
    if (args.manifest) cfg.manifest = args.manifest;
    if (args.out_dir) cfg.output_dir = args.out_dir;
    if (args.method) {
      auto m = method_from_string(*args.method);
      if (!m) return fatal(io, "unknown method '" + *args.method + "'");
      cfg.pipeline.method = *m;
      cfg.pipeline.validate();
    }
    if (!cfg.manifest) return fatal(io, "no manifest given (--manifest or config 'manifest')");
    if (!fs::exists(*cfg.manifest)) return fatal(io, "manifest not found: " + cfg.manifest->string());
    if (!cfg.output_dir) return fatal(io, "no output directory given (--out or config 'output_dir')");

    auto entries = load_manifest(*cfg.manifest);
    for (const auto& e : entries) check_doc_id(e.id);
    if (cfg.sample) entries = sample_entries(entries, *cfg.sample, cfg.seed);

    auto gateway = make_gateway(cfg);
    auto catalog = make_catalog(cfg);
    auto icl = load_icl(cfg);
    PipelineDeps deps{*gateway, catalog, icl->resources};

    fs::create_directories(*cfg.output_dir);
    std::string trace_lines;
    json inputs = json::array(), outputs = json::array(), degraded = json::array();
    for (const auto& entry : entries) {
      auto source = parse_document(read_text_file(entry.source_path), entry.id);
      auto result = simplify(source, cfg.pipeline, deps);
      auto out_path = *cfg.output_dir / (entry.id + ".txt");
      write_file(out_path, result.text + "\n");
      for (const auto& t : result.traces) trace_lines += to_json(t).dump() + "\n";
      inputs.push_back(file_digest(entry.id, entry.source_path));
      outputs.push_back({{"id", entry.id}, {"sha256", sha256_hex(result.text + "\n")}});
      if (result.degraded()) {
        json stages = result.fallback_stages();
        degraded.push_back({{"id", entry.id}, {"fallbacks", stages}});
        std::string joined;
        for (const auto& s : result.fallback_stages()) joined += (joined.empty() ? "" : ", ") + s;
        io.err << "warning: " << entry.id << ": fallback used in " << joined << '\n';
      }
    }
    write_file(*cfg.output_dir / "trace.jsonl", trace_lines);

    json run = {{"config", cfg.raw},
                {"config_sha256", sha256_hex(cfg.raw)},
                {"method", to_string(cfg.pipeline.method)},
                {"seed", cfg.seed},
                {"inputs", inputs},
                {"outputs", outputs},
                {"template_checksums", catalog.checksums()},
                {"ledger", to_json(gateway->ledger_snapshot(), false)},
                {"degraded", degraded}};
    write_file(*cfg.output_dir / "run.json", run.dump(2) + "\n");
    io.out << "simplified " << entries.size() << " document(s) into " << cfg.output_dir->string()
           << '\n';
    return degraded.empty() ? kExitOk : kExitDegraded;
  } catch (const std::exception& e) {
    return fatal(io, e.what());
  }
}

int cmd_evaluate(const EvaluateArgs& args, CommandIo io) {
  try {
    std::optional<RunConfig> cfg;
    if (args.config) cfg = load_config(*args.config);
    auto manifest = args.manifest ? args.manifest : (cfg ? cfg->manifest : std::nullopt);
    if (!manifest) return fatal(io, "no manifest given (--manifest or config 'manifest')");
    if (!fs::is_directory(args.outputs_dir))
      return fatal(io, "outputs directory not found: " + args.outputs_dir.string());
    if (args.judge_baseline && !cfg) return fatal(io, "--judge needs --config for the gateway");

    const MetricsConfig metrics = cfg ? cfg->metrics : MetricsConfig{};
    auto sidecar_path = args.bartscore_sidecar ? args.bartscore_sidecar : metrics.bartscore_sidecar;
    std::map<std::string, double> bart;
    if (sidecar_path) bart = load_score_sidecar(*sidecar_path);

    std::unique_ptr<LlmGateway> gateway;
    std::optional<PromptCatalog> catalog;
    if (args.judge_baseline) {
      gateway = make_gateway(*cfg);
      catalog = make_catalog(*cfg);
    }

    bool row_errors = false;
    std::vector<MetricReport> reports;
    json judge_rows = json::array();
    std::size_t judge_failures = 0;
    std::vector<JudgeVerdict> all_verdicts;
    for (const auto& entry : load_manifest(*manifest)) {
      auto out_path = args.outputs_dir / (entry.id + ".txt");
      if (!fs::exists(out_path)) {
        io.err << "warning: no output for " << entry.id << "; skipped\n";
        continue;
      }
      try {
        if (entry.reference_paths.empty())
          throw Error(ErrorCode::empty_references, "no reference documents");
        auto source = read_text_file(entry.source_path);
        auto output = read_text_file(out_path);
        std::vector<std::string> refs;
        for (const auto& r : entry.reference_paths) refs.push_back(read_text_file(r));
        auto report = score_document(entry.id, source, output, refs, metrics.include_subheadings);
        if (auto it = bart.find(entry.id); it != bart.end()) report.bartscore = it->second;

        if (args.judge_baseline) {
          auto baseline = read_text_file(*args.judge_baseline / (entry.id + ".txt"));
          auto results = judge_documents(baseline, output, *gateway, *catalog, cfg->pipeline.params,
                                         metrics.judge_max_attempts, metrics.judge_swap);
          auto verdicts = parsed_verdicts(results);
          judge_failures += results.size() - verdicts.size();
          json winners = json::array();
          for (const auto& v : verdicts) {
            winners.push_back(v.winner == Winner::document_2 ? "document_2" : "document_1");
            all_verdicts.push_back(v);
          }
          judge_rows.push_back({{"doc_id", entry.id},
                                {"winners", winners},
                                {"failures", results.size() - verdicts.size()}});
          if (!verdicts.empty()) {
            report.gpt = win_rate(verdicts);
          } else {
            io.err << "warning: judge failed for " << entry.id << '\n';
          }
        }
        reports.push_back(std::move(report));
      } catch (const Error& e) {
        if (e.code() == ErrorCode::transport || e.code() == ErrorCode::timeout ||
            e.code() == ErrorCode::provider || e.code() == ErrorCode::replay_miss)
          throw;
        row_errors = true;
        io.err << "warning: " << entry.id << ": " << e.what() << '\n';
      }
    }
    if (reports.empty()) return fatal(io, "no manifest entry has a scorable output");

    const fs::path out_dir = args.out_dir ? *args.out_dir : args.outputs_dir;
    fs::create_directories(out_dir);
    std::string lines;
    for (const auto& r : reports) lines += to_json(r).dump() + "\n";
    write_file(out_dir / "metrics.jsonl", lines);
    auto table = summary_table(reports);
    write_file(out_dir / "summary.tsv", table);
    if (args.judge_baseline) {
      json judge = {{"documents", judge_rows}, {"failures", judge_failures}};
      if (!all_verdicts.empty()) judge["win_rate"] = win_rate(all_verdicts);
      write_file(out_dir / "judge.json", judge.dump(2) + "\n");
    }
    io.out << table;
    return row_errors || judge_failures ? kExitDegraded : kExitOk;
  } catch (const std::exception& e) {
    return fatal(io, e.what());
  }
}

int cmd_stats(const StatsArgs& args, CommandIo io) {
  try {
    auto entries = load_manifest(args.manifest);
    std::vector<CorpusRow> rows;
    bool row_errors = false;
    for (const auto& entry : entries) {
      try {
        rows.push_back(corpus_row(load_entry(entry)));
      } catch (const Error& e) {
        row_errors = true;
        io.err << "warning: " << entry.id << ": " << e.what() << '\n';
      }
    }
    auto stats = corpus_stats(rows);
    if (args.json) {
      json docs = json::array();
      for (const auto& r : rows)
        docs.push_back({{"id", r.id},
                        {"paragraphs", r.source.paragraph_count},
                        {"sentences", r.source.sentence_count},
                        {"tokens", r.source.token_count},
                        {"references", r.references.size()}});
      io.out << json{{"documents", docs}, {"summary", to_json(stats)}}.dump(2) << '\n';
    } else {
      io.out << "id\tparagraphs\tsentences\ttokens\treferences\n";
      for (const auto& r : rows)
        io.out << r.id << '\t' << r.source.paragraph_count << '\t' << r.source.sentence_count << '\t'
               << r.source.token_count << '\t' << r.references.size() << '\n';
      io.out << '\n' << stats_tsv(stats);
    }
    return row_errors ? kExitDegraded : kExitOk;
  } catch (const std::exception& e) {
    return fatal(io, e.what());
  }
}

int cmd_cache_inspect(const fs::path& cache, CommandIo io) {
  try {
    auto s = ResponseCache::inspect(cache);
    io.out << json{{"records", s.records}, {"unique_keys", s.unique_keys}, {"per_model", s.per_model}}
                  .dump(2)
           << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    return fatal(io, e.what());
  }
}

int cmd_cache_prune(const fs::path& cache, const std::optional<std::string>& drop_model,
                    CommandIo io) {
  try {
    auto removed = ResponseCache::prune(cache, drop_model);
    io.out << "removed " << removed << " record(s)\n";
    return kExitOk;
  } catch (const std::exception& e) {
    return fatal(io, e.what());
  }
}

int run_cli(const std::vector<std::string>& argv, CommandIo io) {
  CLI::App app{"Document simplification runs, evaluation and corpus statistics", "docsimp"};
  app.require_subcommand(1);

  SimplifyArgs simplify_args;
  std::string simplify_manifest, simplify_method, simplify_out;
  auto* simplify = app.add_subcommand("simplify", "Simplify every document of a manifest");
  simplify->add_option("-c,--config", simplify_args.config, "JSON run config")->required();
  simplify->add_option("-m,--manifest", simplify_manifest, "Manifest JSONL (overrides config)");
  simplify->add_option("--method", simplify_method, "progds | sumds | p1 | p2 | ic");
  simplify->add_option("-o,--out", simplify_out, "Output directory (overrides config)");

  EvaluateArgs eval_args;
  std::string eval_config, eval_manifest, eval_judge, eval_bart, eval_out;
  auto* evaluate = app.add_subcommand("evaluate", "Score simplified outputs against references");
  evaluate->add_option("-c,--config", eval_config, "JSON run config");
  evaluate->add_option("-m,--manifest", eval_manifest, "Manifest JSONL");
  evaluate->add_option("outputs", eval_args.outputs_dir, "Directory of <doc_id>.txt outputs")->required();
  evaluate->add_option("--judge", eval_judge, "Baseline outputs directory for pairwise judging");
  evaluate->add_option("--bartscore", eval_bart, "JSONL sidecar of external scores");
  evaluate->add_option("-o,--out", eval_out, "Where to write metrics.jsonl and summary.tsv");

  StatsArgs stats_args;
  auto* stats = app.add_subcommand("stats", "Corpus statistics for a manifest");
  stats->add_option("manifest", stats_args.manifest, "Manifest JSONL")->required();
  stats->add_flag("--json", stats_args.json, "Print JSON instead of TSV");

  auto* cache = app.add_subcommand("cache", "Inspect or prune a response cache");
  cache->require_subcommand(1);
  std::string cache_path, drop_model;
  auto* inspect = cache->add_subcommand("inspect", "Print record counts");
  inspect->add_option("path", cache_path, "Cache JSONL")->required();
  auto* prune = cache->add_subcommand("prune", "Keep the newest record per key");
  prune->add_option("path", cache_path, "Cache JSONL")->required();
  prune->add_option("--drop-model", drop_model, "Also drop every record of this model");

  std::vector<std::string> args(argv.rbegin(), argv.rend() - (argv.empty() ? 0 : 1));
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    io.out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    io.err << "error: " << e.what() << "\n" << app.help();
    return kExitFatal;
  }

  if (simplify->parsed()) {
    if (!simplify_manifest.empty()) simplify_args.manifest = simplify_manifest;
    if (!simplify_method.empty()) simplify_args.method = simplify_method;
    if (!simplify_out.empty()) simplify_args.out_dir = simplify_out;
    return cmd_simplify(simplify_args, io);
  }
  if (evaluate->parsed()) {
    if (!eval_config.empty()) eval_args.config = eval_config;
    if (!eval_manifest.empty()) eval_args.manifest = eval_manifest;
    if (!eval_judge.empty()) eval_args.judge_baseline = eval_judge;
    if (!eval_bart.empty()) eval_args.bartscore_sidecar = eval_bart;
    if (!eval_out.empty()) eval_args.out_dir = eval_out;
    return cmd_evaluate(eval_args, io);
  }
  if (stats->parsed()) return cmd_stats(stats_args, io);
  if (inspect->parsed()) return cmd_cache_inspect(cache_path, io);
  if (prune->parsed())
    return cmd_cache_prune(cache_path, drop_model.empty() ? std::nullopt : std::optional(drop_model), io);
  return kExitFatal;
}

}  // namespace docsimp::cli
