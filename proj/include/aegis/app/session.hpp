#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "aegis/domain/types.hpp"
#include "aegis/pipeline/pipeline.hpp"

namespace aegis::app {

/// Provider credentials for one session. Held in memory only; the
/// destructor and erase() overwrite the bytes before releasing them.
class ProviderKeys {
 public:
  ProviderKeys() = default;
  ProviderKeys(std::string llm, std::string nvd, std::string otx);
  ProviderKeys(const ProviderKeys& other) = default;
  ProviderKeys& operator=(const ProviderKeys& other) = default;
  ~ProviderKeys();

  const std::string& llm() const noexcept { return llm_; }
  const std::string& nvd() const noexcept { return nvd_; }
  const std::string& otx() const noexcept { return otx_; }
  bool empty() const noexcept { return llm_.empty() && nvd_.empty() && otx_.empty(); }

  void erase() noexcept;

 private:
  std::string llm_;
  std::string nvd_;
  std::string otx_;
};

/// Everything a run needs between the threat-model call and the later
/// stage calls of the same session.
struct RunState {
  ThreatModelRun run;
  pipeline::RunContext context;
  pipeline::Handles handles;
  pipeline::RunLog log;
  std::string persist_name;  // file name under the persist dir, if any
  std::mutex mu;  // serializes stage calls on this run
};

class Session {
 public:
  using TimePoint = std::chrono::steady_clock::time_point;

  Session(std::string id, ProviderKeys keys, TimePoint created_at, std::chrono::seconds ttl);

  const std::string& id() const noexcept { return id_; }
  TimePoint created_at() const noexcept { return created_at_; }
  TimePoint expires_at() const noexcept { return created_at_ + ttl_; }

  /// Copy of the keys; empty once the session has been destroyed.
  ProviderKeys keys() const;
  bool keys_erased() const;

  std::string add_run(std::shared_ptr<RunState> state);
  /// Throws Error(NotFound).
  std::shared_ptr<RunState> run(const std::string& run_id) const;

  void erase_keys();

 private:
  std::string id_;
  TimePoint created_at_;
  std::chrono::seconds ttl_;
  mutable std::mutex mu_;
  ProviderKeys keys_;
  std::map<std::string, std::shared_ptr<RunState>> runs_;
  int next_run_ = 1;
};

/// Internally synchronized session registry with an absolute TTL per
/// session. Expired sessions have their keys erased on first touch.
class SessionTable {
 public:
  using Clock = std::function<Session::TimePoint()>;

  explicit SessionTable(std::chrono::seconds ttl = std::chrono::minutes(60), Clock clock = {});

  /// Throws Error(MissingLlmKey) when `keys` has no LLM key.
  std::string create(ProviderKeys keys);
  /// Throws Error(SessionExpired) for expired, destroyed or unknown ids.
  std::shared_ptr<Session> get(const std::string& id);
  /// Erases the keys and forgets the session. False when unknown.
  bool destroy(const std::string& id);
  /// Erases and drops every expired session; returns how many.
  std::size_t purge_expired();
  std::size_t size() const;
  std::chrono::seconds ttl() const noexcept { return ttl_; }

 private:
  Session::TimePoint now() const;

  std::chrono::seconds ttl_;
  Clock clock_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

/// 32 random bytes, hex encoded.
std::string new_session_token();

}  // namespace aegis::app
