#include "aegis/net/http.hpp"

#include <cmath>
#include <fstream>
#include <regex>
#include <thread>

#include "aegis/util.hpp"
#include "httplib.h"

namespace aegis::net {

using nlohmann::json;

namespace {

struct UrlParts {
  std::string origin;  // scheme://host[:port]
  std::string target;  // /path?query
};

UrlParts split_url(const std::string& url) {
  static const std::regex re(R"(^(https?://[^/?#]+)([^#]*))");
  std::smatch m;
  if (!std::regex_search(url, m, re)) throw Error(Errc::Transport, "unsupported url " + url);
  UrlParts parts{m[1].str(), m[2].str()};
  if (parts.target.empty()) parts.target = "/";
  return parts;
}

}  // namespace

HttplibClient::HttplibClient(std::chrono::seconds timeout) : timeout_(timeout) {}

HttpResponse HttplibClient::send(const HttpRequest& request) {
  const UrlParts parts = split_url(request.url);
  httplib::Client cli(parts.origin);
  cli.set_connection_timeout(timeout_);
  cli.set_read_timeout(timeout_);
  cli.set_write_timeout(timeout_);
  cli.set_follow_location(true);

  httplib::Headers headers;
  for (const auto& [k, v] : request.headers) headers.emplace(k, v);

  httplib::Result res;
  if (request.method == "GET") {
    res = cli.Get(parts.target, headers);
  } else if (request.method == "POST") {
    res = cli.Post(parts.target, headers, request.body, request.content_type);
  } else if (request.method == "DELETE") {
    res = cli.Delete(parts.target, headers);
  } else {
    throw Error(Errc::Transport, "unsupported method " + request.method);
  }

  if (!res) {
    const auto err = res.error();
    const std::string what = httplib::to_string(err) + " (" + parts.origin + ")";
    if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read)
      throw Error(Errc::Timeout, what);
    throw Error(Errc::Transport, what);
  }
  HttpResponse out;
  out.status = res->status;
  out.body = res->body;
  for (const auto& [k, v] : res->headers) out.headers[k] = v;
  return out;
}

std::shared_ptr<CassetteClient> CassetteClient::replay(const std::filesystem::path& cassette) {
  if (!std::filesystem::exists(cassette)) throw Error(Errc::FileMissing, cassette.string());
  return replay(json::parse(util::read_file(cassette.string())));
}

std::shared_ptr<CassetteClient> CassetteClient::replay(json interactions) {
  if (!interactions.is_array()) throw Error(Errc::SchemaViolation, "cassette must be an array");
  std::shared_ptr<CassetteClient> c(new CassetteClient());
  c->interactions_ = std::move(interactions);
  return c;
}

std::shared_ptr<CassetteClient> CassetteClient::record(std::shared_ptr<HttpClient> inner,
                                                       std::filesystem::path cassette) {
  std::shared_ptr<CassetteClient> c(new CassetteClient());
  c->inner_ = std::move(inner);
  c->path_ = std::move(cassette);
  return c;
}

HttpResponse CassetteClient::send(const HttpRequest& request) {
  std::lock_guard lock(mu_);
  ++calls_;
  if (inner_) {
    HttpResponse resp = inner_->send(request);
    interactions_.push_back(
        {{"request", {{"method", request.method}, {"url", request.url}, {"body", request.body}}},
         {"response", {{"status", resp.status}, {"body", resp.body}}}});
    return resp;
  }

  const std::string key = request.method + " " + request.url;
  std::vector<std::size_t> matches;
  for (std::size_t i = 0; i < interactions_.size(); ++i) {
    const json& req = interactions_[i].at("request");
    if (req.value("method", "GET") == request.method && req.value("url", "") == request.url)
      matches.push_back(i);
  }
  if (matches.empty()) throw Error(Errc::Transport, "no cassette interaction for " + key);

  std::size_t& cur = cursor_[key];
  const json& resp = interactions_[matches[std::min(cur, matches.size() - 1)]].at("response");
  ++cur;

  if (resp.contains("error")) {
    const std::string kind = resp["error"].get<std::string>();
    if (kind == "timeout") throw Error(Errc::Timeout, "simulated timeout for " + key);
    throw Error(Errc::Transport, "simulated transport failure for " + key);
  }
  HttpResponse out;
  out.status = resp.value("status", 200);
  const json& body = resp.contains("body") ? resp["body"] : json("");
  out.body = body.is_string() ? body.get<std::string>() : body.dump();
  if (resp.contains("headers"))
    for (const auto& [k, v] : resp["headers"].items()) out.headers[k] = v.get<std::string>();
  return out;
}

void CassetteClient::save() const {
  std::lock_guard lock(mu_);
  if (path_.empty()) return;
  util::write_file(path_.string(), interactions_.dump(2));
}

std::size_t CassetteClient::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::string url_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

std::string with_query(std::string url, const QueryParams& params) {
  char sep = url.find('?') == std::string::npos ? '?' : '&';
  for (const auto& [k, v] : params) {
    url.push_back(sep);
    url += url_encode(k);
    if (!v.empty()) {
      url.push_back('=');
      url += url_encode(v);
    }
    sep = '&';
  }
  return url;
}

void RateLimiter::acquire() {
  if (min_interval_.count() <= 0) return;
  std::unique_lock lock(mu_);
  const auto now = std::chrono::steady_clock::now();
  const auto slot = std::max(now, next_);
  next_ = slot + min_interval_;
  lock.unlock();
  std::this_thread::sleep_until(slot);
}

void RetryPolicy::pause(int attempt) const {
  const auto delay = std::chrono::milliseconds(static_cast<long long>(
      static_cast<double>(base_delay.count()) * std::pow(backoff_factor, attempt)));
  if (sleep) sleep(delay);
  else std::this_thread::sleep_for(delay);
}

std::optional<Errc> classify_status(int status) {
  if (status >= 200 && status < 300) return std::nullopt;
  if (status == 401) return Errc::AuthFailed;
  if (status == 403) return Errc::AuthFailed;
  if (status == 408 || status == 504) return Errc::Timeout;
  if (status == 429) return Errc::RateLimited;
  return Errc::Transport;
}

}  // namespace aegis::net
