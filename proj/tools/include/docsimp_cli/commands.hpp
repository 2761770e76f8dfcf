#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace docsimp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitDegraded = 2;

struct CommandIo {
  std::ostream& out;
  std::ostream& err;
};

struct SimplifyArgs {
  std::filesystem::path config;
  std::optional<std::filesystem::path> manifest;
  std::optional<std::string> method;
  std::optional<std::filesystem::path> out_dir;
};

struct EvaluateArgs {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> manifest;
  std::filesystem::path outputs_dir;
  std::optional<std::filesystem::path> judge_baseline;  // outputs of the baseline method
  std::optional<std::filesystem::path> bartscore_sidecar;
  std::optional<std::filesystem::path> out_dir;  // defaults to outputs_dir
};

struct StatsArgs {
  std::filesystem::path manifest;
  bool json = false;
};

/// Writes <out>/<doc_id>.txt, trace.jsonl and run.json.
int cmd_simplify(const SimplifyArgs& args, CommandIo io);

/// Writes metrics.jsonl and summary.tsv (plus judge.json with --judge).
int cmd_evaluate(const EvaluateArgs& args, CommandIo io);

int cmd_stats(const StatsArgs& args, CommandIo io);

int cmd_cache_inspect(const std::filesystem::path& cache, CommandIo io);
int cmd_cache_prune(const std::filesystem::path& cache, const std::optional<std::string>& drop_model,
                    CommandIo io);

/// Parses argv and dispatches; returns the process exit code.
int run_cli(const std::vector<std::string>& argv, CommandIo io);

}  // namespace docsimp::cli
