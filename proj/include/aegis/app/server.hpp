#pragma once

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <deque>
#include <functional>
#include <future>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "aegis/app/session.hpp"
#include "aegis/intel/intel.hpp"
#include "aegis/kb/attack_kb.hpp"
#include "aegis/llm/gateway.hpp"

namespace httplib {
class Server;
}

namespace aegis::app {

/// Fixed-size pool; tasks run in submission order.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t threads);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  template <typename Fn>
  auto submit(Fn fn) -> std::future<decltype(fn())> {
    auto task = std::make_shared<std::packaged_task<decltype(fn())()>>(std::move(fn));
    auto fut = task->get_future();
    enqueue([task] { (*task)(); });
    return fut;
  }

  std::size_t size() const noexcept { return threads_.size(); }

 private:
  void enqueue(std::function<void()> job);

  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::function<void()>> jobs_;
  std::vector<std::thread> threads_;
  bool stopping_ = false;
};

/// Builds the chat provider for a session from its keys.
using ProviderFactory = std::function<std::shared_ptr<llm::ChatProvider>(const ProviderKeys&)>;

struct ServerOptions {
  std::chrono::seconds session_ttl{std::chrono::minutes(60)};
  std::size_t workers = 4;
  PipelineConfig pipeline;
  /// Server-side defaults used when a session does not supply its own key.
  ProviderKeys default_keys;
  llm::GatewayOptions gateway;
  intel::IntelConfig intel;
  /// When set, every run is written to <dir>/run-<n>.json after each stage.
  std::optional<std::filesystem::path> persist_dir;
};

struct ServerDeps {
  std::shared_ptr<const kb::KnowledgeBase> kb;
  ProviderFactory provider_factory;
  /// Transport for NVD/OTX; null disables threat-intel context.
  std::shared_ptr<net::HttpClient> intel_http;
  kb::DatasetRules dataset_rules = kb::DatasetRules::defaults();
  SessionTable::Clock clock;
};

/// Provider factory for the OpenAI-compatible endpoint configured in `base`
/// with the session's LLM key.
ProviderFactory http_provider_factory(llm::ProviderConfig base, std::shared_ptr<net::HttpClient> http);

/// HTTP status for an error code.
int http_status(Errc code) noexcept;

/// The JSON API. Request and response bodies are the domain schemas;
/// failures are {"error": <code name>, "message": ...}. Request bodies and
/// headers are never logged.
class ApiServer {
 public:
  ApiServer(ServerOptions options, ServerDeps deps);
  ~ApiServer();

  /// Binds (port 0 picks a free port) and returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop(); bind() first.
  void listen();
  /// bind() then listen() on a background thread.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  void stop();

  SessionTable& sessions() noexcept { return sessions_; }

 private:
  void routes();

  ServerOptions options_;
  ServerDeps deps_;
  SessionTable sessions_;
  WorkerPool pool_;
  std::unique_ptr<httplib::Server> http_;
  std::thread thread_;
  std::atomic<int> persisted_runs_{0};
};

}  // namespace aegis::app
