#include "aegis/app/session.hpp"

#include <openssl/crypto.h>
#include <openssl/rand.h>

#include "aegis/error.hpp"

namespace aegis::app {

namespace {

void wipe(std::string& s) noexcept {
  if (!s.empty()) OPENSSL_cleanse(s.data(), s.size());
  s.clear();
  s.shrink_to_fit();
}

}  // namespace

ProviderKeys::ProviderKeys(std::string llm, std::string nvd, std::string otx)
    : llm_(std::move(llm)), nvd_(std::move(nvd)), otx_(std::move(otx)) {}

ProviderKeys::~ProviderKeys() { erase(); }

void ProviderKeys::erase() noexcept {
  wipe(llm_);
  wipe(nvd_);
  wipe(otx_);
}

Session::Session(std::string id, ProviderKeys keys, TimePoint created_at, std::chrono::seconds ttl)
    : id_(std::move(id)), created_at_(created_at), ttl_(ttl), keys_(std::move(keys)) {}

ProviderKeys Session::keys() const {
  std::lock_guard lock(mu_);
  return keys_;
}

bool Session::keys_erased() const {
  std::lock_guard lock(mu_);
  return keys_.empty();
}

std::string Session::add_run(std::shared_ptr<RunState> state) {
  std::lock_guard lock(mu_);
  std::string id = std::to_string(next_run_++);
  runs_[id] = std::move(state);
  return id;
}

std::shared_ptr<RunState> Session::run(const std::string& run_id) const {
  std::lock_guard lock(mu_);
  auto it = runs_.find(run_id);
  if (it == runs_.end()) throw Error(Errc::NotFound, "no run '" + run_id + "' in this session");
  return it->second;
}

void Session::erase_keys() {
  std::lock_guard lock(mu_);
  keys_.erase();
  runs_.clear();  // runs hold provider handles built from the keys
}

std::string new_session_token() {
  unsigned char buf[32];
  if (RAND_bytes(buf, sizeof buf) != 1) throw Error(Errc::IoError, "no randomness available");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned char c : buf) {
    out.push_back(kHex[c >> 4]);
    out.push_back(kHex[c & 0xF]);
  }
  return out;
}

SessionTable::SessionTable(std::chrono::seconds ttl, Clock clock)
    : ttl_(ttl), clock_(std::move(clock)) {}

Session::TimePoint SessionTable::now() const {
  return clock_ ? clock_() : std::chrono::steady_clock::now();
}

std::string SessionTable::create(ProviderKeys keys) {
  if (keys.llm().empty()) throw Error(Errc::MissingLlmKey, "an LLM API key is required");
  purge_expired();
  std::string id = new_session_token();
  auto s = std::make_shared<Session>(id, std::move(keys), now(), ttl_);
  std::lock_guard lock(mu_);
  sessions_[id] = std::move(s);
  return id;
}

std::shared_ptr<Session> SessionTable::get(const std::string& id) {
  std::shared_ptr<Session> s;
  {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(Errc::SessionExpired, "unknown or closed session");
    s = it->second;
    if (now() < s->expires_at()) return s;
    sessions_.erase(it);
  }
  s->erase_keys();
  throw Error(Errc::SessionExpired, "session expired");
}

bool SessionTable::destroy(const std::string& id) {
  std::shared_ptr<Session> s;
  {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) return false;
    s = std::move(it->second);
    sessions_.erase(it);
  }
  s->erase_keys();
  return true;
}

std::size_t SessionTable::purge_expired() {
  std::vector<std::shared_ptr<Session>> expired;
  {
    std::lock_guard lock(mu_);
    const auto t = now();
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      if (t >= it->second->expires_at()) {
        expired.push_back(std::move(it->second));
        it = sessions_.erase(it);
      } else {
        ++it;
      }
    }
  }
  for (auto& s : expired) s->erase_keys();
  return expired.size();
}

std::size_t SessionTable::size() const {
  std::lock_guard lock(mu_);
  return sessions_.size();
}

}  // namespace aegis::app
