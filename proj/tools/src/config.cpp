#include "docsimp_cli/config.hpp"

#include <cstdlib>
#include <set>

#include <nlohmann/json.hpp>

#include "docsimp/corpus.hpp"
#include "docsimp/error.hpp"

namespace docsimp::cli {

using nlohmann::json;
namespace fs = std::filesystem;

std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

std::string interpolate_env(std::string_view text, const EnvLookup& lookup) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto start = text.find("${", pos);
    if (start == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    out.append(text.substr(pos, start - pos));
    auto end = text.find('}', start);
    if (end == std::string_view::npos) throw Error(ErrorCode::config, "unterminated ${ in config");
    std::string name(text.substr(start + 2, end - start - 2));
    auto value = lookup(name);
    if (!value) throw Error(ErrorCode::config, "environment variable " + name + " is not set");
    out += *value;
    pos = end + 1;
  }
  return out;
}

namespace {

void interpolate_tree(json& j, const EnvLookup& lookup) {
  if (j.is_string()) {
    j = interpolate_env(j.get<std::string>(), lookup);
  } else if (j.is_structured()) {
    for (auto& child : j) interpolate_tree(child, lookup);
  }
}

void check_keys(const json& obj, std::string_view section, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw Error(ErrorCode::config, "'" + std::string(section) + "' must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw Error(ErrorCode::config, "unknown key '" + key + "' in " + std::string(section));
  }
}

template <class T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::config, std::string("bad value for '") + key + "'");
  }
}

template <class T>
void read(const json& obj, const char* key, std::optional<T>& out) {
  if (!obj.contains(key) || obj.at(key).is_null()) return;
  T v{};
  read(obj, key, v);
  out = std::move(v);
}

fs::path existing(const fs::path& base, const std::string& p, std::string_view what) {
  fs::path path = fs::path(p).is_absolute() ? fs::path(p) : base / p;
  if (!fs::exists(path))
    throw Error(ErrorCode::config, std::string(what) + " not found: " + path.string());
  return path;
}

void read_path(const json& obj, const char* key, const fs::path& base,
               std::optional<fs::path>& out, bool must_exist) {
  std::optional<std::string> raw;
  read(obj, key, raw);
  if (!raw) return;
  if (must_exist) {
    out = existing(base, *raw, key);
  } else {
    out = fs::path(*raw).is_absolute() ? fs::path(*raw) : base / *raw;
  }
}

}  // namespace

RunConfig parse_config(std::string_view text, const fs::path& base_dir, const EnvLookup& lookup) {
  RunConfig cfg;
  cfg.raw = std::string(text);
  json root = json::parse(text, nullptr, false);
  if (root.is_discarded()) throw Error(ErrorCode::config, "config is not valid JSON");
  interpolate_tree(root, lookup);
  check_keys(root, "config",
             {"gateway", "pipeline", "banks", "embedding", "metrics", "prompts_dir", "manifest",
              "output_dir", "seed", "sample"});

  if (root.contains("gateway")) {
    const auto& g = root["gateway"];
    check_keys(g, "gateway",
               {"backend", "base_url", "api_key", "model", "models", "temperature",
                "max_output_tokens", "timeout_ms", "cache_path", "replay_script", "max_retries",
                "backoff_ms", "count_cache_hits_as_calls"});
    std::string backend = "http";
    read(g, "backend", backend);
    if (backend == "http") {
      cfg.gateway.backend = BackendKind::http;
    } else if (backend == "replay") {
      cfg.gateway.backend = BackendKind::replay;
    } else if (backend == "cache_only") {
      cfg.gateway.backend = BackendKind::cache_only;
    } else {
      throw Error(ErrorCode::config, "unknown gateway backend '" + backend + "'");
    }
    read(g, "base_url", cfg.gateway.base_url);
    read(g, "api_key", cfg.gateway.api_key);
    read(g, "model", cfg.pipeline.params.model_id);
    read(g, "temperature", cfg.pipeline.params.temperature);
    read(g, "max_output_tokens", cfg.pipeline.params.max_output_tokens);
    int timeout_ms = static_cast<int>(cfg.pipeline.params.request_timeout.count());
    read(g, "timeout_ms", timeout_ms);
    cfg.pipeline.params.request_timeout = std::chrono::milliseconds(timeout_ms);
    if (g.contains("models")) {
      if (!g["models"].is_array()) throw Error(ErrorCode::config, "'models' must be an array");
      for (const auto& m : g["models"]) {
        check_keys(m, "gateway.models", {"model_id", "context_tokens"});
        ModelTier tier;
        read(m, "model_id", tier.model_id);
        read(m, "context_tokens", tier.context_tokens);
        if (tier.model_id.empty() || tier.context_tokens <= 0)
          throw Error(ErrorCode::config, "model tiers need model_id and positive context_tokens");
        cfg.gateway.models.push_back(tier);
      }
    }
    read_path(g, "cache_path", base_dir, cfg.gateway.cache_path,
              cfg.gateway.backend == BackendKind::cache_only);
    read_path(g, "replay_script", base_dir, cfg.gateway.replay_script, true);
    read(g, "max_retries", cfg.gateway.max_retries);
    read(g, "backoff_ms", cfg.gateway.backoff_ms);
    read(g, "count_cache_hits_as_calls", cfg.gateway.count_cache_hits_as_calls);
  }
  if (cfg.gateway.backend == BackendKind::replay && !cfg.gateway.replay_script)
    throw Error(ErrorCode::config, "backend 'replay' needs gateway.replay_script");
  if (cfg.gateway.backend == BackendKind::cache_only && !cfg.gateway.cache_path)
    throw Error(ErrorCode::config, "backend 'cache_only' needs gateway.cache_path");

  if (root.contains("pipeline")) {
    const auto& p = root["pipeline"];
    check_keys(p, "pipeline",
               {"method", "iterations", "use_icl", "k_examples", "include_subheadings",
                "max_attempts", "parallelism", "lexical_min_tokens"});
    std::optional<std::string> method;
    read(p, "method", method);
    if (method) {
      auto m = method_from_string(*method);
      if (!m) throw Error(ErrorCode::config, "unknown method '" + *method + "'");
      cfg.pipeline.method = *m;
    }
    read(p, "iterations", cfg.pipeline.iterations);
    read(p, "use_icl", cfg.pipeline.use_icl);
    read(p, "k_examples", cfg.pipeline.k_examples);
    read(p, "include_subheadings", cfg.pipeline.include_subheadings);
    read(p, "max_attempts", cfg.pipeline.max_attempts);
    read(p, "parallelism", cfg.pipeline.parallelism);
    read(p, "lexical_min_tokens", cfg.pipeline.lexical_min_tokens);
  }

  if (root.contains("banks")) {
    const auto& b = root["banks"];
    check_keys(b, "banks", {"paragraph", "structure", "lexical", "document_example"});
    read_path(b, "paragraph", base_dir, cfg.banks.paragraph, true);
    read_path(b, "structure", base_dir, cfg.banks.structure, true);
    read_path(b, "lexical", base_dir, cfg.banks.lexical, true);
    read_path(b, "document_example", base_dir, cfg.banks.document_example, true);
  }

  if (root.contains("embedding")) {
    const auto& e = root["embedding"];
    check_keys(e, "embedding", {"provider", "model", "dimension"});
    read(e, "provider", cfg.embedding.provider);
    read(e, "model", cfg.embedding.model);
    read(e, "dimension", cfg.embedding.dimension);
    if (cfg.embedding.provider != "local" && cfg.embedding.provider != "http")
      throw Error(ErrorCode::config, "embedding provider must be 'local' or 'http'");
    if (cfg.embedding.dimension < 1) throw Error(ErrorCode::config, "embedding dimension must be >= 1");
  }

  if (root.contains("metrics")) {
    const auto& m = root["metrics"];
    check_keys(m, "metrics",
               {"include_subheadings", "bartscore_sidecar", "judge_swap", "judge_max_attempts"});
    read(m, "include_subheadings", cfg.metrics.include_subheadings);
    read_path(m, "bartscore_sidecar", base_dir, cfg.metrics.bartscore_sidecar, true);
    read(m, "judge_swap", cfg.metrics.judge_swap);
    read(m, "judge_max_attempts", cfg.metrics.judge_max_attempts);
  }

  read_path(root, "prompts_dir", base_dir, cfg.prompts_dir, true);
  read_path(root, "manifest", base_dir, cfg.manifest, true);
  read_path(root, "output_dir", base_dir, cfg.output_dir, false);
  read(root, "seed", cfg.seed);
  read(root, "sample", cfg.sample);

  cfg.pipeline.validate();
  return cfg;
}

RunConfig load_config(const fs::path& path, const EnvLookup& lookup) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error&) {
    throw Error(ErrorCode::config, "cannot read config " + path.string());
  }
  return parse_config(text, path.parent_path(), lookup);
}

}  // namespace docsimp::cli
