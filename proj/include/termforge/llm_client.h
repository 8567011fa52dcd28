#ifndef TERMFORGE_LLM_CLIENT_H_
#define TERMFORGE_LLM_CLIENT_H_

#include <chrono>
#include <functional>
#include <memory>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "termforge/prompts.h"

namespace termforge {

inline constexpr std::string_view kApiKeyEnv = "TERMFORGE_LLM_API_KEY";

struct ClientConfig {
  std::string base_url;  // e.g. "https://api.openai.com/v1"
  std::string model_name;
  std::string api_key_env = std::string(kApiKeyEnv);
  std::chrono::milliseconds timeout{60'000};
  int max_retries = 3;
  int max_concurrency = 4;
  std::chrono::milliseconds initial_backoff{500};  // doubled on every retry

  // Throws ValidationError unless timeout > 0, max_retries >= 0 and
  // max_concurrency >= 1.
  void Validate() const;
};

// Anything that turns a prompt into model text. Implementations used from
// several threads must be thread-safe.
class CompletionClient {
 public:
  virtual ~CompletionClient() = default;
  virtual std::string Complete(const PromptSpec& prompt) = 0;
};

using LogSink = std::function<void(std::string_view)>;

// Writes to stderr when TERMFORGE_LOG is set, otherwise discards.
LogSink DefaultLogSink();

// Chat-completion client: POST {base_url}/chat/completions with body
// {"model": ..., "messages": [{"role": "user", "content": ...}]} and bearer
// auth. Transient failures (timeouts, connection errors, 429, 5xx) are retried
// with exponential backoff; at most max_concurrency requests are in flight.
// The API key is read from the environment on every call and never logged.
class HttpChatClient : public CompletionClient {
 public:
  explicit HttpChatClient(ClientConfig cfg, LogSink log = DefaultLogSink());

  // Throws AuthError (missing key, 401/403), TimeoutError, RateLimitError,
  // HttpError, or MalformedResponseError.
  std::string Complete(const PromptSpec& prompt) override;

  // Completes every prompt concurrently; results keep input order.
  std::vector<std::string> CompleteAll(const std::vector<PromptSpec>& prompts);

  const ClientConfig& config() const { return cfg_; }

 private:
  ClientConfig cfg_;
  LogSink log_;
  std::counting_semaphore<1024> slots_;
};

std::string ChatComplete(const ClientConfig& cfg, const PromptSpec& prompt);

// Replaces every occurrence of secret in s with "***".
std::string Redact(std::string_view s, std::string_view secret);

}  // namespace termforge

#endif  // TERMFORGE_LLM_CLIENT_H_
