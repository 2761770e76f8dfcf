#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "docsimp/llm.hpp"
#include "docsimp/pipeline.hpp"

namespace docsimp::cli {

enum class BackendKind { http, replay, cache_only };

struct GatewayConfig {
  BackendKind backend = BackendKind::http;
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key;
  std::vector<ModelTier> models;
  std::optional<std::filesystem::path> cache_path;
  std::optional<std::filesystem::path> replay_script;
  int max_retries = 3;
  int backoff_ms = 500;
  bool count_cache_hits_as_calls = false;
};

struct BankPaths {
  std::optional<std::filesystem::path> paragraph;
  std::optional<std::filesystem::path> structure;
  std::optional<std::filesystem::path> lexical;
  std::optional<std::filesystem::path> document_example;  // first pair is used
};

struct EmbeddingConfig {
  std::string provider = "local";  // local | http
  std::string model = "text-embedding-ada-002";
  int dimension = 4096;
};

struct MetricsConfig {
  bool include_subheadings = false;
  std::optional<std::filesystem::path> bartscore_sidecar;
  bool judge_swap = false;
  int judge_max_attempts = 5;
};

struct RunConfig {
  GatewayConfig gateway;
  PipelineConfig pipeline;
  BankPaths banks;
  EmbeddingConfig embedding;
  MetricsConfig metrics;
  std::optional<std::filesystem::path> prompts_dir;
  std::optional<std::filesystem::path> manifest;
  std::optional<std::filesystem::path> output_dir;
  std::uint64_t seed = 0;
  std::optional<std::size_t> sample;

  std::string raw;  // file contents before interpolation
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

std::optional<std::string> process_env(const std::string& name);

/// Replaces every ${NAME} with its value. Throws Error(config) for an unset
/// variable or an unterminated reference.
std::string interpolate_env(std::string_view text, const EnvLookup& lookup);

/// Parses a JSON config. String values are interpolated, relative paths
/// resolve against base_dir, unknown keys and missing referenced files are
/// Error(config).
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir,
                       const EnvLookup& lookup = process_env);

RunConfig load_config(const std::filesystem::path& path, const EnvLookup& lookup = process_env);

}  // namespace docsimp::cli
