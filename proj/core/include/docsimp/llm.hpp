#pragma once

#include <chrono>
#include <cstddef>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace docsimp {

enum class Role { system, user, assistant };

std::string_view to_string(Role role) noexcept;
Role role_from_string(std::string_view name);

struct ChatMessage {
  Role role = Role::user;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct GenerationParams {
  std::string model_id = "gpt-3.5-turbo";
  double temperature = 0.3;
  std::optional<int> max_output_tokens;
  std::chrono::milliseconds request_timeout{60'000};

  // Throws Error(invalid_argument) when temperature is outside [0, 2] or the
  // timeout is not positive.
  void validate() const;
};

struct LlmResponse {
  std::string text;
  long prompt_tokens = 0;
  long completion_tokens = 0;
  bool from_cache = false;
};

struct ChatRequest {
  std::vector<ChatMessage> messages;
  GenerationParams params;
};

struct CallLedger {
  long call_count = 0;
  long retry_count = 0;
  long cache_hits = 0;
  std::chrono::nanoseconds wall_time{0};
  std::map<std::string, long> per_stage_counts;
};

nlohmann::json to_json(const CallLedger& ledger, bool include_wall_time = true);

nlohmann::json messages_to_json(std::span<const ChatMessage> messages);

/// Digest of the serialized message list; identifies a prompt independent of
/// generation parameters. Replay scripts match on it.
std::string prompt_digest(std::span<const ChatMessage> messages);

/// Digest of (model_id, temperature, serialized messages).
std::string cache_key(const GenerationParams& params, std::span<const ChatMessage> messages);

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual LlmResponse send(const ChatRequest& request) = 0;
};

// --- replay ---------------------------------------------------------------

struct ReplayEntry {
  std::optional<std::string> prompt_hash;  // nullopt matches any prompt
  std::string response;
};

/// Serves scripted responses. Exact-hash entries are served by prompt digest
/// (first unused entry for that digest); wildcard entries are served in script
/// order to any prompt without an exact entry.
class ReplayBackend final : public ChatBackend {
 public:
  explicit ReplayBackend(std::vector<ReplayEntry> script);

  LlmResponse send(const ChatRequest& request) override;

  std::size_t remaining() const;

 private:
  mutable std::mutex mu_;
  std::unordered_map<std::string, std::deque<std::string>> by_hash_;
  std::deque<std::string> wildcards_;
};

std::shared_ptr<ReplayBackend> make_replay_backend(std::vector<ReplayEntry> script);

/// Replay script file: JSONL, one {"match": "*" | "<prompt digest>",
/// "response": "..."} object per line.
std::vector<ReplayEntry> load_replay_script(const std::filesystem::path& path);

/// Answers each request with a caller-supplied function.
class CallbackBackend final : public ChatBackend {
 public:
  using Responder = std::function<std::string(const ChatRequest&)>;
  explicit CallbackBackend(Responder responder) : responder_(std::move(responder)) {}

  LlmResponse send(const ChatRequest& request) override;

 private:
  Responder responder_;
};

/// Refuses every request; pairs with a cache for cache-only runs.
class OfflineBackend final : public ChatBackend {
 public:
  LlmResponse send(const ChatRequest& request) override;
};

// --- http -----------------------------------------------------------------

struct HttpEndpoint {
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key;
  std::string chat_path = "/chat/completions";
};

/// OpenAI-style chat-completions request body.
nlohmann::json build_chat_request(const ChatRequest& request);

/// Parses a chat-completions response body. Throws ProviderError when the
/// payload carries an "error" object or lacks choices.
LlmResponse parse_chat_response(std::string_view body);

class HttpChatBackend final : public ChatBackend {
 public:
  explicit HttpChatBackend(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

  LlmResponse send(const ChatRequest& request) override;

 private:
  HttpEndpoint endpoint_;
};

/// POSTs a JSON body and returns the response body. Throws Error(transport),
/// Error(timeout) or ProviderError(status).
std::string http_post_json(const std::string& base_url, const std::string& path,
                           const std::string& api_key, const std::string& body,
                           std::chrono::milliseconds timeout);

// --- cache ----------------------------------------------------------------

struct CacheStats {
  std::size_t records = 0;
  std::size_t unique_keys = 0;
  std::map<std::string, std::size_t> per_model;
};

/// Append-only JSONL cache of {key, model_id, params, messages, response,
/// timestamp}. The last record for a key wins on load.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path path, bool read_only = false);

  std::optional<std::string> lookup(const std::string& key) const;
  void store(const std::string& key, const GenerationParams& params,
             std::span<const ChatMessage> messages, const std::string& response);

  std::size_t size() const;
  const std::filesystem::path& path() const { return path_; }

  static CacheStats inspect(const std::filesystem::path& path);

  /// Rewrites the file keeping only the newest record per key, optionally
  /// dropping records of one model. Returns the number of records removed.
  static std::size_t prune(const std::filesystem::path& path,
                           const std::optional<std::string>& drop_model = std::nullopt);

 private:
  std::filesystem::path path_;
  bool read_only_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, std::string> entries_;
};

// --- gateway --------------------------------------------------------------

struct ModelTier {
  std::string model_id;
  long context_tokens = 0;
};

struct GatewayOptions {
  int max_transport_retries = 3;
  std::chrono::milliseconds backoff_base{500};
  // Ordered upgrade path; the first tier whose context budget holds the
  // estimated prompt is used. Empty means "use params.model_id".
  std::vector<ModelTier> model_fallbacks;
  bool count_cache_hits_as_calls = false;
};

class LlmGateway {
 public:
  LlmGateway(std::shared_ptr<ChatBackend> backend, std::shared_ptr<ResponseCache> cache = nullptr,
             GatewayOptions options = {});

  /// Thread-safe. Requires at least one user message and nonempty system and
  /// user contents.
  LlmResponse complete(std::span<const ChatMessage> messages, const GenerationParams& params,
                       std::string_view stage);

  CallLedger ledger_snapshot() const;

  std::string select_model(std::span<const ChatMessage> messages,
                           const GenerationParams& params) const;

 private:
  std::shared_ptr<ChatBackend> backend_;
  std::shared_ptr<ResponseCache> cache_;
  GatewayOptions options_;
  mutable std::mutex ledger_mu_;
  CallLedger ledger_;
};

}  // namespace docsimp
