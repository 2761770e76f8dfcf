#include <httplib.h>

#include "docsimp/error.hpp"
#include "docsimp/llm.hpp"

namespace docsimp {

using nlohmann::json;

namespace {

// "https://host:port/v1" -> {"https://host:port", "/v1"}
std::pair<std::string, std::string> split_base_url(const std::string& url) {
  auto scheme = url.find("://");
  auto path_start = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path_start == std::string::npos) return {url, ""};
  std::string prefix = url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, path_start), prefix};
}

std::string provider_message(const std::string& body) {
  auto j = json::parse(body, nullptr, false);
  if (!j.is_discarded() && j.is_object() && j.contains("error")) {
    const auto& e = j["error"];
    if (e.is_object() && e.contains("message") && e["message"].is_string())
      return e["message"].get<std::string>();
    if (e.is_string()) return e.get<std::string>();
  }
  return body.substr(0, 200);
}

}  // namespace

std::string http_post_json(const std::string& base_url, const std::string& path,
                           const std::string& api_key, const std::string& body,
                           std::chrono::milliseconds timeout) {
  auto [host, prefix] = split_base_url(base_url);
  httplib::Client client(host);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  httplib::Headers headers;
  if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

  auto res = client.Post(prefix + path, headers, body, "application/json");
  if (!res) {
    auto err = res.error();
    if (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout)
      throw Error(ErrorCode::timeout, "request to " + base_url + " timed out");
    throw Error(ErrorCode::transport,
                "request to " + base_url + " failed: " + httplib::to_string(err));
  }
  if (res->status < 200 || res->status >= 300)
    throw ProviderError(res->status, "endpoint returned " + std::to_string(res->status) + ": " +
                                         provider_message(res->body));
  return res->body;
}

json build_chat_request(const ChatRequest& request) {
  json body = {{"model", request.params.model_id},
               {"messages", messages_to_json(request.messages)},
               {"temperature", request.params.temperature}};
  if (request.params.max_output_tokens) body["max_tokens"] = *request.params.max_output_tokens;
  return body;
}

LlmResponse parse_chat_response(std::string_view body) {
  auto j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw ProviderError(0, "chat response is not a JSON object");
  if (j.contains("error")) throw ProviderError(0, provider_message(std::string(body)));
  const auto& choices = j.value("choices", json::array());
  if (!choices.is_array() || choices.empty())
    throw ProviderError(0, "chat response has no choices");
  const auto& message = choices[0].value("message", json::object());
  LlmResponse r;
  if (message.contains("content") && message["content"].is_string())
    r.text = message["content"].get<std::string>();
  if (j.contains("usage") && j["usage"].is_object()) {
    r.prompt_tokens = j["usage"].value("prompt_tokens", 0L);
    r.completion_tokens = j["usage"].value("completion_tokens", 0L);
  }
  return r;
}

LlmResponse HttpChatBackend::send(const ChatRequest& request) {
  auto body = http_post_json(endpoint_.base_url, endpoint_.chat_path, endpoint_.api_key,
                             build_chat_request(request).dump(), request.params.request_timeout);
  return parse_chat_response(body);
}

}  // namespace docsimp
