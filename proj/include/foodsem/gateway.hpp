#ifndef FOODSEM_GATEWAY_HPP
#define FOODSEM_GATEWAY_HPP

// Chat-completions client: bounded-parallel requests with retries. Transport
// failures become flagged empty responses, never batch failures.

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "foodsem/common.hpp"

namespace foodsem {

struct RetryPolicy {
  std::size_t max_attempts = 3;
  double backoff_base = 0.5;  // seconds; attempt i waits base * 2^(i-1)
};

struct GatewayConfig {
  std::string endpoint_url;
  std::string model_name = "default";
  std::string api_key;
  std::size_t max_new_tokens = 512;
  double temperature = 0.0;
  double request_timeout = 60.0;  // seconds
  std::size_t max_in_flight = 4;
  RetryPolicy retry;

  /// Fills unset fields from FOODSEM_ENDPOINT, FOODSEM_MODEL, FOODSEM_API_KEY.
  void apply_environment() {
    if (endpoint_url.empty())
      if (const char* v = std::getenv("FOODSEM_ENDPOINT")) endpoint_url = v;
    if (model_name == "default")
      if (const char* v = std::getenv("FOODSEM_MODEL")) model_name = v;
    if (api_key.empty())
      if (const char* v = std::getenv("FOODSEM_API_KEY")) api_key = v;
  }
};

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

inline Endpoint parse_endpoint(const std::string& url) {
  if (!url.starts_with("http://"))
    throw Error(ErrorKind::ConfigError, "endpoint must be an http:// URL, got '" + url + "'");
  const std::size_t host_start = 7;
  const std::size_t slash = url.find('/', host_start);
  Endpoint e;
  e.origin = url.substr(0, slash);
  e.path = slash == std::string::npos ? "" : url.substr(slash);
  if (e.origin.size() <= host_start) throw Error(ErrorKind::ConfigError, "endpoint '" + url + "' has no host");
  if (e.path.empty() || e.path == "/") e.path = "/v1/chat/completions";
  return e;
}

inline void validate(const GatewayConfig& c) {
  parse_endpoint(c.endpoint_url);
  if (c.max_in_flight < 1) throw Error(ErrorKind::ConfigError, "max_in_flight must be >= 1");
  if (c.retry.max_attempts < 1) throw Error(ErrorKind::ConfigError, "max_attempts must be >= 1");
  if (!(c.request_timeout > 0.0)) throw Error(ErrorKind::ConfigError, "request_timeout must be positive");
  if (!(c.temperature >= 0.0)) throw Error(ErrorKind::ConfigError, "temperature must be non-negative");
  if (c.retry.backoff_base < 0.0) throw Error(ErrorKind::ConfigError, "backoff_base must be non-negative");
}

struct PromptItem {
  std::string instance_id;
  std::string prompt;
};

struct Completion {
  std::string instance_id;
  std::string prompt;
  std::string response;
  double latency_ms = 0.0;
  std::size_t attempts = 0;
  bool transport_failure = false;
  std::string error;
};

inline nlohmann::json chat_request_body(const GatewayConfig& c, const std::string& prompt) {
  return {{"model", c.model_name},
          {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
          {"max_tokens", c.max_new_tokens},
          {"temperature", c.temperature}};
}

/// Text of the first choice, accepting both chat and plain completion shapes.
inline std::optional<std::string> extract_content(const std::string& body) {
  const auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) return std::nullopt;
  const auto& choice = j["choices"][0];
  if (choice.contains("message") && choice["message"].contains("content") && choice["message"]["content"].is_string())
    return choice["message"]["content"].get<std::string>();
  if (choice.contains("text") && choice["text"].is_string()) return choice["text"].get<std::string>();
  return std::nullopt;
}

/// One response per prompt, in input order.
inline std::vector<Completion> complete_batch(const std::vector<PromptItem>& prompts, const GatewayConfig& config) {
  validate(config);
  const Endpoint endpoint = parse_endpoint(config.endpoint_url);
  std::vector<Completion> results(prompts.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    httplib::Client client(endpoint.origin);
    const auto timeout = std::chrono::duration<double>(config.request_timeout);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    httplib::Headers headers;
    if (!config.api_key.empty()) headers.emplace("Authorization", "Bearer " + config.api_key);

    for (std::size_t i = next++; i < prompts.size(); i = next++) {
      Completion& out = results[i];
      out.instance_id = prompts[i].instance_id;
      out.prompt = prompts[i].prompt;
      const std::string body = chat_request_body(config, prompts[i].prompt).dump();
      const auto started = std::chrono::steady_clock::now();
      bool ok = false;
      for (std::size_t attempt = 1; attempt <= config.retry.max_attempts && !ok; ++attempt) {
        out.attempts = attempt;
        if (attempt > 1) {
          const double wait = config.retry.backoff_base * static_cast<double>(1ULL << (attempt - 2));
          std::this_thread::sleep_for(std::chrono::duration<double>(wait));
        }
        auto res = client.Post(endpoint.path, headers, body, "application/json");
        if (!res) {
          out.error = "transport: " + httplib::to_string(res.error());
          continue;
        }
        if (res->status != 200) {
          out.error = "http status " + std::to_string(res->status);
          continue;
        }
        if (auto content = extract_content(res->body)) {
          out.response = std::move(*content);
          out.error.clear();
          ok = true;
        } else {
          out.error = "response has no choices[0] content";
        }
      }
      out.transport_failure = !ok;
      if (!ok) out.response.clear();
      out.latency_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    }
  };

  const std::size_t workers = std::min(config.max_in_flight, prompts.size());
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  return results;
}

/// One transcript line.
inline nlohmann::ordered_json to_json(const Completion& c) {
  nlohmann::ordered_json j;
  j["instance_id"] = c.instance_id;
  j["prompt"] = c.prompt;
  j["response"] = c.response;
  j["latency_ms"] = c.latency_ms;
  j["attempts"] = c.attempts;
  if (c.transport_failure) {
    j["transport_failure"] = true;
    j["error"] = c.error;
  }
  return j;
}

}  // namespace foodsem

#endif  // FOODSEM_GATEWAY_HPP
