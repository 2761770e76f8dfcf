#include "docsimp/llm.hpp"

#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include "docsimp/digest.hpp"
#include "docsimp/error.hpp"
#include "docsimp/text.hpp"

namespace docsimp {

using nlohmann::json;

std::string_view to_string(Role role) noexcept {
  switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

Role role_from_string(std::string_view name) {
  if (name == "system") return Role::system;
  if (name == "user") return Role::user;
  if (name == "assistant") return Role::assistant;
  throw Error(ErrorCode::invalid_argument, "unknown chat role '" + std::string(name) + "'");
}

void GenerationParams::validate() const {
  if (!(temperature >= 0.0 && temperature <= 2.0))
    throw Error(ErrorCode::invalid_argument, "temperature must lie in [0, 2]");
  if (request_timeout.count() <= 0)
    throw Error(ErrorCode::invalid_argument, "request timeout must be positive");
  if (max_output_tokens && *max_output_tokens <= 0)
    throw Error(ErrorCode::invalid_argument, "max_output_tokens must be positive");
  if (model_id.empty()) throw Error(ErrorCode::invalid_argument, "model_id is empty");
}

json to_json(const CallLedger& ledger, bool include_wall_time) {
  json j = {
      {"call_count", ledger.call_count},
      {"retry_count", ledger.retry_count},
      {"cache_hits", ledger.cache_hits},
      {"per_stage_counts", ledger.per_stage_counts},
  };
  if (include_wall_time)
    j["wall_time_ms"] =
        std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(ledger.wall_time)
            .count();
  return j;
}

json messages_to_json(std::span<const ChatMessage> messages) {
  json arr = json::array();
  for (const auto& m : messages)
    arr.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  return arr;
}

std::string prompt_digest(std::span<const ChatMessage> messages) {
  return sha256_hex(messages_to_json(messages).dump());
}

std::string cache_key(const GenerationParams& params, std::span<const ChatMessage> messages) {
  json j = {{"model_id", params.model_id},
            {"temperature", params.temperature},
            {"messages", messages_to_json(messages)}};
  return sha256_hex(j.dump());
}

// --- replay ---------------------------------------------------------------

ReplayBackend::ReplayBackend(std::vector<ReplayEntry> script) {
  if (script.empty()) throw Error(ErrorCode::invalid_argument, "replay script is empty");
  for (auto& e : script) {
    if (e.prompt_hash) by_hash_[*e.prompt_hash].push_back(std::move(e.response));
    else wildcards_.push_back(std::move(e.response));
  }
}

LlmResponse ReplayBackend::send(const ChatRequest& request) {
  auto hash = prompt_digest(request.messages);
  std::lock_guard lock(mu_);
  std::string text;
  if (auto it = by_hash_.find(hash); it != by_hash_.end() && !it->second.empty()) {
    text = std::move(it->second.front());
    it->second.pop_front();
  } else if (!wildcards_.empty()) {
    text = std::move(wildcards_.front());
    wildcards_.pop_front();
  } else {
    bool exhausted = true;
    for (const auto& [_, q] : by_hash_)
      if (!q.empty()) exhausted = false;
    throw Error(ErrorCode::replay_miss, exhausted
                                            ? "replay miss for prompt " + hash + ": script exhausted"
                                            : "replay miss for prompt " + hash);
  }
  LlmResponse r;
  r.text = std::move(text);
  return r;
}

std::size_t ReplayBackend::remaining() const {
  std::lock_guard lock(mu_);
  std::size_t n = wildcards_.size();
  for (const auto& [_, q] : by_hash_) n += q.size();
  return n;
}

std::shared_ptr<ReplayBackend> make_replay_backend(std::vector<ReplayEntry> script) {
  return std::make_shared<ReplayBackend>(std::move(script));
}

std::vector<ReplayEntry> load_replay_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open replay script " + path.string());
  std::vector<ReplayEntry> script;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      auto j = json::parse(line);
      ReplayEntry e;
      auto match = j.at("match").get<std::string>();
      if (match != "*") e.prompt_hash = match;
      e.response = j.at("response").get<std::string>();
      script.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw Error(ErrorCode::io, path.string() + ":" + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return script;
}

LlmResponse CallbackBackend::send(const ChatRequest& request) {
  LlmResponse r;
  r.text = responder_(request);
  return r;
}

LlmResponse OfflineBackend::send(const ChatRequest& request) {
  throw Error(ErrorCode::replay_miss,
              "cache miss for prompt " + prompt_digest(request.messages) + " in cache-only mode");
}

// --- cache ----------------------------------------------------------------

namespace {

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<json> read_cache_records(const std::filesystem::path& path) {
  std::vector<json> records;
  std::ifstream in(path);
  if (!in) return records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      records.push_back(json::parse(line));
    } catch (const json::exception& ex) {
      throw Error(ErrorCode::io, path.string() + ":" + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return records;
}

}  // namespace

ResponseCache::ResponseCache(std::filesystem::path path, bool read_only)
    : path_(std::move(path)), read_only_(read_only) {
  for (const auto& r : read_cache_records(path_))
    entries_[r.at("key").get<std::string>()] = r.at("response").get<std::string>();
}

std::optional<std::string> ResponseCache::lookup(const std::string& key) const {
  std::lock_guard lock(mu_);
  if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  return std::nullopt;
}

void ResponseCache::store(const std::string& key, const GenerationParams& params,
                          std::span<const ChatMessage> messages, const std::string& response) {
  if (read_only_) return;
  json params_j = {{"temperature", params.temperature}};
  params_j["max_output_tokens"] =
      params.max_output_tokens ? json(*params.max_output_tokens) : json(nullptr);
  json record = {{"key", key},
                 {"model_id", params.model_id},
                 {"params", params_j},
                 {"messages", messages_to_json(messages)},
                 {"response", response},
                 {"timestamp", utc_timestamp()}};
  std::lock_guard lock(mu_);
  std::ofstream out(path_, std::ios::app);
  if (!out) throw Error(ErrorCode::io, "cannot append to cache " + path_.string());
  out << record.dump() << '\n';
  entries_[key] = response;
}

std::size_t ResponseCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

CacheStats ResponseCache::inspect(const std::filesystem::path& path) {
  CacheStats stats;
  std::unordered_map<std::string, int> keys;
  for (const auto& r : read_cache_records(path)) {
    ++stats.records;
    keys[r.at("key").get<std::string>()]++;
    stats.per_model[r.value("model_id", std::string("?"))]++;
  }
  stats.unique_keys = keys.size();
  return stats;
}

std::size_t ResponseCache::prune(const std::filesystem::path& path,
                                 const std::optional<std::string>& drop_model) {
  auto records = read_cache_records(path);
  std::unordered_map<std::string, std::size_t> last;
  for (std::size_t i = 0; i < records.size(); ++i) last[records[i].at("key").get<std::string>()] = i;

  auto tmp = path;
  tmp += ".tmp";
  std::size_t kept = 0;
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write " + tmp.string());
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& r = records[i];
      if (last[r.at("key").get<std::string>()] != i) continue;
      if (drop_model && r.value("model_id", std::string()) == *drop_model) continue;
      out << r.dump() << '\n';
      ++kept;
    }
  }
  std::filesystem::rename(tmp, path);
  return records.size() - kept;
}

// --- gateway --------------------------------------------------------------

namespace {

bool retryable(const Error& e) {
  if (e.code() == ErrorCode::transport || e.code() == ErrorCode::timeout) return true;
  if (const auto* p = dynamic_cast<const ProviderError*>(&e))
    return p->status() == 429 || p->status() >= 500;
  return false;
}

void check_messages(std::span<const ChatMessage> messages) {
  bool has_user = false;
  for (const auto& m : messages) {
    if (m.role == Role::user) has_user = true;
    if (m.role != Role::assistant && m.content.empty())
      throw Error(ErrorCode::invalid_argument,
                  std::string(to_string(m.role)) + " message content is empty");
  }
  if (!has_user) throw Error(ErrorCode::invalid_argument, "request has no user message");
}

}  // namespace

LlmGateway::LlmGateway(std::shared_ptr<ChatBackend> backend, std::shared_ptr<ResponseCache> cache,
                       GatewayOptions options)
    : backend_(std::move(backend)), cache_(std::move(cache)), options_(std::move(options)) {
  if (!backend_) throw Error(ErrorCode::invalid_argument, "gateway needs a backend");
  if (options_.max_transport_retries < 0)
    throw Error(ErrorCode::invalid_argument, "max_transport_retries must be >= 0");
}

std::string LlmGateway::select_model(std::span<const ChatMessage> messages,
                                     const GenerationParams& params) const {
  if (options_.model_fallbacks.empty()) return params.model_id;
  long estimate = 0;
  for (const auto& m : messages) estimate += static_cast<long>(tokenize(m.content).size());
  if (params.max_output_tokens) estimate += *params.max_output_tokens;
  for (const auto& tier : options_.model_fallbacks)
    if (estimate <= tier.context_tokens) return tier.model_id;
  return options_.model_fallbacks.back().model_id;
}

LlmResponse LlmGateway::complete(std::span<const ChatMessage> messages,
                                 const GenerationParams& params, std::string_view stage) {
  check_messages(messages);
  params.validate();

  ChatRequest request{{messages.begin(), messages.end()}, params};
  request.params.model_id = select_model(messages, params);
  const std::string stage_name(stage);

  std::string key;
  if (cache_) {
    key = cache_key(request.params, messages);
    if (auto hit = cache_->lookup(key)) {
      std::lock_guard lock(ledger_mu_);
      ++ledger_.cache_hits;
      if (options_.count_cache_hits_as_calls) {
        ++ledger_.call_count;
        ++ledger_.per_stage_counts[stage_name];
      }
      LlmResponse r;
      r.text = std::move(*hit);
      r.from_cache = true;
      return r;
    }
  }

  {
    std::lock_guard lock(ledger_mu_);
    ++ledger_.call_count;
    ++ledger_.per_stage_counts[stage_name];
  }

  const auto start = std::chrono::steady_clock::now();
  auto account_time = [&] {
    auto elapsed = std::chrono::steady_clock::now() - start;
    std::lock_guard lock(ledger_mu_);
    ledger_.wall_time += std::chrono::duration_cast<std::chrono::nanoseconds>(elapsed);
  };

  LlmResponse response;
  for (int attempt = 0;; ++attempt) {
    try {
      response = backend_->send(request);
      break;
    } catch (const Error& e) {
      if (!retryable(e) || attempt >= options_.max_transport_retries) {
        account_time();
        throw;
      }
      {
        std::lock_guard lock(ledger_mu_);
        ++ledger_.retry_count;
      }
      std::this_thread::sleep_for(options_.backoff_base * (1L << attempt));
    }
  }
  account_time();

  response.from_cache = false;
  if (cache_) cache_->store(key, request.params, messages, response.text);
  return response;
}

CallLedger LlmGateway::ledger_snapshot() const {
  std::lock_guard lock(ledger_mu_);
  return ledger_;
}

}  // namespace docsimp
