#pragma once

#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "aegis/llm/prompts.hpp"
#include "aegis/net/http.hpp"

namespace aegis::llm {

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string text;
};

struct CompletionRequest {
  std::vector<ChatMessage> messages;
  double temperature = 0.7;
  int max_output_tokens = 8192;
  std::string provider_model_id;
  /// Which template produced the prompt; mock providers key on it.
  std::optional<PromptKind> kind;
  /// Overrides the gateway's transport retry count for this request.
  std::optional<int> max_retries;

  /// Throws Error(BadInput) on an empty message list or negative temperature.
  void validate() const;
};

struct Completion {
  std::string text;
  std::vector<net::RetryRecord> retries;
};

/// A chat-completion backend. Implementations must be thread safe.
class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual std::string complete(const CompletionRequest& request) = 0;
  virtual std::string model_id() const = 0;
  /// False when the provider cannot possibly answer (e.g. no API key).
  virtual bool configured() const { return true; }
};

struct ProviderConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key;
  std::string model = "gpt-4o";

  /// AEGIS_LLM_BASE_URL, AEGIS_LLM_API_KEY, AEGIS_LLM_MODEL over the defaults.
  static ProviderConfig from_env();
};

/// OpenAI-compatible POST {base_url}/chat/completions.
class HttpChatProvider final : public ChatProvider {
 public:
  HttpChatProvider(std::shared_ptr<net::HttpClient> http, ProviderConfig config);
  std::string complete(const CompletionRequest& request) override;
  std::string model_id() const override { return config_.model; }
  bool configured() const override { return !config_.api_key.empty(); }

 private:
  std::shared_ptr<net::HttpClient> http_;
  ProviderConfig config_;
};

/// Canned responses from a directory: `<slug>.<n>.txt` answers the n-th
/// (1-based) call of that kind when present, otherwise `<slug>.txt`. With no
/// mitre_select file, the first candidate pattern id in the prompt is
/// echoed (the sentinel when the prompt offers none).
class FileMockProvider final : public ChatProvider {
 public:
  explicit FileMockProvider(std::filesystem::path dir);
  std::string complete(const CompletionRequest& request) override;
  std::string model_id() const override { return "mock-file"; }
  int calls(PromptKind kind) const;

 private:
  std::filesystem::path dir_;
  mutable std::mutex mu_;
  std::map<PromptKind, int> calls_;
};

/// Answers through a callback that receives the request and the 1-based
/// call index for its kind.
class ScriptedProvider final : public ChatProvider {
 public:
  using Script = std::function<std::string(const CompletionRequest&, int call_index)>;
  explicit ScriptedProvider(Script script);
  std::string complete(const CompletionRequest& request) override;
  std::string model_id() const override { return "mock-scripted"; }
  int calls(PromptKind kind) const;
  int total_calls() const;

 private:
  Script script_;
  mutable std::mutex mu_;
  std::map<PromptKind, int> calls_;
  int total_ = 0;
};

/// First non-sentinel attack-pattern id in `text`, or the sentinel.
std::string first_pattern_id(std::string_view text);

struct GatewayOptions {
  net::RetryPolicy retry;
  std::chrono::milliseconds min_interval{0};
};

/// Shared front door to a provider: transport retries with backoff and a
/// rate limiter that spaces calls across all concurrent users.
class Gateway {
 public:
  explicit Gateway(std::shared_ptr<ChatProvider> provider, GatewayOptions options = {});

  /// Throws Error(Transport | Timeout | RateLimited) once retries are
  /// exhausted, or the provider's final error (AuthFailed, ProviderRefused, ...).
  Completion complete(const CompletionRequest& request);
  std::future<Completion> submit(CompletionRequest request);

  std::string model_id() const { return provider_->model_id(); }
  ChatProvider& provider() { return *provider_; }

 private:
  std::shared_ptr<ChatProvider> provider_;
  GatewayOptions options_;
  net::RateLimiter limiter_;
};

}  // namespace aegis::llm
