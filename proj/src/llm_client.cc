#include "termforge/llm_client.h"

#include <algorithm>
#include <cstdlib>
#include <atomic>
#include <iostream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "termforge/error.h"

namespace termforge {
namespace {

using nlohmann::json;

struct Endpoint {
  std::string scheme_host_port;  // "https://host:443"
  std::string path;              // "/v1/chat/completions"
};

Endpoint ParseBaseUrl(std::string_view base_url) {
  const std::size_t scheme_end = base_url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw ValidationError("base_url must start with http:// or https://");
  }
  const std::size_t path_start = base_url.find('/', scheme_end + 3);
  Endpoint ep;
  ep.scheme_host_port = std::string(base_url.substr(0, path_start));
  std::string prefix = path_start == std::string_view::npos
                           ? std::string()
                           : std::string(base_url.substr(path_start));
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  ep.path = prefix + "/chat/completions";
  return ep;
}

std::string ExtractContent(const std::string& body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error&) {
    throw MalformedResponseError("response body is not JSON");
  }
  try {
    const json& content = doc.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw MalformedResponseError("content is not a string");
    return content.get<std::string>();
  } catch (const json::exception&) {
    throw MalformedResponseError("response lacks choices[0].message.content");
  }
}

enum class Failure { kNone, kTimeout, kConnection, kRateLimit, kServer };

}  // namespace

void ClientConfig::Validate() const {
  if (timeout.count() <= 0) throw ValidationError("timeout must be positive");
  if (max_retries < 0) throw ValidationError("max_retries must be >= 0");
  if (max_concurrency < 1) throw ValidationError("max_concurrency must be >= 1");
  if (base_url.empty()) throw ValidationError("base_url is required");
  if (model_name.empty()) throw ValidationError("model_name is required");
}

LogSink DefaultLogSink() {
  if (std::getenv("TERMFORGE_LOG") == nullptr) return [](std::string_view) {};
  return [](std::string_view line) { std::cerr << "[termforge] " << line << '\n'; };
}

std::string Redact(std::string_view s, std::string_view secret) {
  std::string out(s);
  if (secret.empty()) return out;
  std::size_t pos = 0;
  while ((pos = out.find(secret, pos)) != std::string::npos) {
    out.replace(pos, secret.size(), "***");
    pos += 3;
  }
  return out;
}

HttpChatClient::HttpChatClient(ClientConfig cfg, LogSink log)
    : cfg_(std::move(cfg)),
      log_(log ? std::move(log) : DefaultLogSink()),
      slots_(std::clamp(cfg_.max_concurrency, 1, 1024)) {
  cfg_.Validate();
}

std::string HttpChatClient::Complete(const PromptSpec& prompt) {
  const char* key_env = std::getenv(cfg_.api_key_env.c_str());
  if (key_env == nullptr || *key_env == '\0') {
    throw AuthError("environment variable " + cfg_.api_key_env + " is not set");
  }
  const std::string key = key_env;
  const Endpoint ep = ParseBaseUrl(cfg_.base_url);
  const json body{{"model", cfg_.model_name},
                  {"messages", json::array({{{"role", "user"},
                                             {"content", prompt.rendered_text}}})}};
  const std::string payload = body.dump();

  slots_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{slots_};

  httplib::Client http(ep.scheme_host_port);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg_.timeout);
  const auto usecs =
      std::chrono::duration_cast<std::chrono::microseconds>(cfg_.timeout - secs);
  http.set_connection_timeout(secs.count(), usecs.count());
  http.set_read_timeout(secs.count(), usecs.count());
  http.set_write_timeout(secs.count(), usecs.count());
  const httplib::Headers headers{{"Authorization", "Bearer " + key}};

  auto backoff = cfg_.initial_backoff;
  Failure last = Failure::kNone;
  std::string last_detail;
  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    log_(Redact("POST " + ep.scheme_host_port + ep.path + " model=" +
                    cfg_.model_name + " template=" +
                    std::string(ToString(prompt.template_id)) +
                    " authorization=Bearer *** attempt=" + std::to_string(attempt + 1),
                key));
    auto res = http.Post(ep.path, headers, payload, "application/json");
    if (!res) {
      const auto err = res.error();
      last = (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout)
                 ? Failure::kTimeout
                 : Failure::kConnection;
      last_detail = httplib::to_string(err);
      log_("request failed: " + last_detail);
      continue;
    }
    log_(Redact("status=" + std::to_string(res->status) + " body=" + res->body, key));
    if (res->status == 401 || res->status == 403) {
      throw AuthError("endpoint rejected the API key (HTTP " +
                      std::to_string(res->status) + ")");
    }
    if (res->status == 429) {
      last = Failure::kRateLimit;
      continue;
    }
    if (res->status >= 500) {
      last = Failure::kServer;
      last_detail = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw HttpError("HTTP " + std::to_string(res->status) + ": " +
                      Redact(res->body, key));
    }
    return ExtractContent(res->body);
  }
  const std::string tries = " after " + std::to_string(cfg_.max_retries + 1) + " attempts";
  switch (last) {
    case Failure::kTimeout: throw TimeoutError("request timed out" + tries);
    case Failure::kRateLimit: throw RateLimitError("rate limited" + tries);
    case Failure::kServer: throw HttpError(last_detail + tries);
    default: throw HttpError("connection failed (" + last_detail + ")" + tries);
  }
}

std::vector<std::string> HttpChatClient::CompleteAll(
    const std::vector<PromptSpec>& prompts) {
  std::vector<std::string> out(prompts.size());
  std::vector<std::exception_ptr> errors(prompts.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < prompts.size(); i = next++) {
      try {
        out[i] = Complete(prompts[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_workers = std::min<std::size_t>(
      prompts.size(), static_cast<std::size_t>(cfg_.max_concurrency));
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < n_workers; ++w) workers.emplace_back(worker);
  for (std::thread& t : workers) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::string ChatComplete(const ClientConfig& cfg, const PromptSpec& prompt) {
  HttpChatClient client(cfg);
  return client.Complete(prompt);
}

}  // namespace termforge
