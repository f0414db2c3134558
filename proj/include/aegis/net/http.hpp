#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "aegis/error.hpp"
#include "json.hpp"

namespace aegis::net {

using Headers = std::vector<std::pair<std::string, std::string>>;
using QueryParams = std::vector<std::pair<std::string, std::string>>;

struct HttpRequest {
  std::string method = "GET";
  std::string url;
  Headers headers;
  std::string body;
  std::string content_type = "application/json";
};

struct HttpResponse {
  int status = 0;
  std::string body;
  std::map<std::string, std::string> headers;
};

/// Blocking HTTP transport. Connection failures surface as
/// Error(Transport) or Error(Timeout); HTTP status codes are returned as-is.
class HttpClient {
 public:
  virtual ~HttpClient() = default;
  virtual HttpResponse send(const HttpRequest& request) = 0;
};

/// cpp-httplib backed client (http and https).
class HttplibClient final : public HttpClient {
 public:
  explicit HttplibClient(std::chrono::seconds timeout = std::chrono::seconds(60));
  HttpResponse send(const HttpRequest& request) override;

 private:
  std::chrono::seconds timeout_;
};

/// Replays recorded interactions from a JSON cassette:
///   [{"request": {"method": "GET", "url": "..."},
///     "response": {"status": 200, "body": "...", "headers": {...}}}, ...]
/// A response may instead be {"error": "transport" | "timeout"} to simulate a
/// connection failure. Interactions are consumed in order per (method, url);
/// the last matching one repeats once exhausted. In record mode every
/// request is forwarded to `inner` and appended; request headers are never
/// recorded, so credentials cannot leak into cassettes.
class CassetteClient final : public HttpClient {
 public:
  static std::shared_ptr<CassetteClient> replay(const std::filesystem::path& cassette);
  static std::shared_ptr<CassetteClient> replay(nlohmann::json interactions);
  static std::shared_ptr<CassetteClient> record(std::shared_ptr<HttpClient> inner,
                                                std::filesystem::path cassette);

  HttpResponse send(const HttpRequest& request) override;
  /// Writes the recorded interactions (record mode only).
  void save() const;
  std::size_t calls() const;

 private:
  CassetteClient() = default;

  mutable std::mutex mu_;
  nlohmann::json interactions_ = nlohmann::json::array();
  std::map<std::string, std::size_t> cursor_;
  std::shared_ptr<HttpClient> inner_;
  std::filesystem::path path_;
  std::size_t calls_ = 0;
};

std::string url_encode(std::string_view s);
std::string with_query(std::string url, const QueryParams& params);

/// Spaces successive acquisitions at least `min_interval` apart. Thread safe.
class RateLimiter {
 public:
  explicit RateLimiter(std::chrono::milliseconds min_interval = std::chrono::milliseconds(0))
      : min_interval_(min_interval) {}
  void acquire();

 private:
  std::mutex mu_;
  std::chrono::milliseconds min_interval_;
  std::chrono::steady_clock::time_point next_{};
};

struct RetryPolicy {
  int max_retries = 2;
  std::chrono::milliseconds base_delay{500};
  double backoff_factor = 2.0;
  /// Injected so tests can observe backoff without sleeping.
  std::function<void(std::chrono::milliseconds)> sleep;

  void pause(int attempt) const;
};

struct RetryRecord {
  int attempt = 0;
  Errc code = Errc::Transport;
  std::string message;
};

/// Runs `fn`, retrying retryable Errors (Transport, Timeout, RateLimited) up
/// to policy.max_retries times with exponential backoff. The last error is
/// rethrown unchanged.
template <typename Fn>
auto with_retry(const RetryPolicy& policy, Fn&& fn, std::vector<RetryRecord>* records = nullptr)
    -> decltype(fn()) {
  for (int attempt = 0;; ++attempt) {
    try {
      return fn();
    } catch (const Error& e) {
      if (!e.retryable() || attempt >= policy.max_retries) throw;
      if (records) records->push_back({attempt + 1, e.code(), e.detail()});
      policy.pause(attempt);
    }
  }
}

/// Maps an HTTP status to the error taxonomy (2xx -> nullopt).
std::optional<Errc> classify_status(int status);

}  // namespace aegis::net
