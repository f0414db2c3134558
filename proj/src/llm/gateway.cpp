#include "aegis/llm/gateway.hpp"

#include <cstdlib>
#include <regex>

#include "aegis/util.hpp"

namespace aegis::llm {

using nlohmann::json;

void CompletionRequest::validate() const {
  if (messages.empty()) throw Error(Errc::BadInput, "completion request has no messages");
  if (!(temperature >= 0.0)) throw Error(Errc::BadInput, "temperature must be >= 0");
  if (max_output_tokens < 1) throw Error(Errc::BadInput, "max_output_tokens must be >= 1");
}

ProviderConfig ProviderConfig::from_env() {
  ProviderConfig c;
  if (const char* v = std::getenv("AEGIS_LLM_BASE_URL"); v && *v) c.base_url = v;
  if (const char* v = std::getenv("AEGIS_LLM_API_KEY"); v && *v) c.api_key = v;
  if (const char* v = std::getenv("AEGIS_LLM_MODEL"); v && *v) c.model = v;
  return c;
}

HttpChatProvider::HttpChatProvider(std::shared_ptr<net::HttpClient> http, ProviderConfig config)
    : http_(std::move(http)), config_(std::move(config)) {}

std::string HttpChatProvider::complete(const CompletionRequest& request) {
  if (config_.api_key.empty()) throw Error(Errc::AuthFailed, "no LLM API key configured");
  json messages = json::array();
  for (const auto& m : request.messages) messages.push_back({{"role", m.role}, {"content", m.text}});
  json body = {{"model", request.provider_model_id.empty() ? config_.model : request.provider_model_id},
               {"messages", std::move(messages)},
               {"temperature", request.temperature},
               {"max_tokens", request.max_output_tokens}};

  std::string base = config_.base_url;
  while (!base.empty() && base.back() == '/') base.pop_back();
  net::HttpRequest req;
  req.method = "POST";
  req.url = base + "/chat/completions";
  req.body = body.dump();
  req.headers.emplace_back("Authorization", "Bearer " + config_.api_key);

  const net::HttpResponse resp = http_->send(req);
  const json parsed = json::parse(resp.body, nullptr, false);
  std::string provider_message;
  if (parsed.is_object() && parsed.contains("error") && parsed["error"].is_object())
    provider_message = parsed["error"].value("message", "");

  if (resp.status == 429) {
    const std::string code = parsed.is_object() && parsed.contains("error") && parsed["error"].is_object()
                                 ? parsed["error"].value("code", "")
                                 : "";
    if (code == "insufficient_quota") throw Error(Errc::QuotaExceeded, provider_message);
    throw Error(Errc::RateLimited, provider_message.empty() ? "HTTP 429" : provider_message);
  }
  if (resp.status == 400 || resp.status == 404 || resp.status == 422)
    throw Error(Errc::ProviderRefused, "HTTP " + std::to_string(resp.status) + " " + provider_message);
  if (auto code = net::classify_status(resp.status))
    throw Error(*code, "HTTP " + std::to_string(resp.status) + " " + provider_message);

  if (parsed.is_discarded()) throw Error(Errc::Transport, "provider returned invalid JSON");
  const json choices = parsed.value("choices", json::array());
  if (choices.empty()) throw Error(Errc::ProviderRefused, "provider returned no choices");
  const json& choice = choices[0];
  if (choice.value("finish_reason", "") == "content_filter")
    throw Error(Errc::ProviderRefused, "response withheld by content filter");
  const json message = choice.value("message", json::object());
  if (message.contains("refusal") && message["refusal"].is_string())
    throw Error(Errc::ProviderRefused, message["refusal"].get<std::string>());
  if (!message.contains("content") || !message["content"].is_string())
    throw Error(Errc::ProviderRefused, "provider returned no content");
  return message["content"].get<std::string>();
}

std::string first_pattern_id(std::string_view text) {
  static const std::regex re(
      R"(attack-pattern--[0-9a-fA-F]{8}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}-[0-9a-fA-F]{12})");
  const std::string s(text);
  for (std::sregex_iterator it(s.begin(), s.end(), re), end; it != end; ++it) {
    if (it->str() != kSentinelPatternId) return it->str();
  }
  return std::string(kSentinelPatternId);
}

FileMockProvider::FileMockProvider(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!std::filesystem::is_directory(dir_)) throw Error(Errc::FileMissing, dir_.string());
}

std::string FileMockProvider::complete(const CompletionRequest& request) {
  if (!request.kind) throw Error(Errc::ProviderRefused, "mock provider needs a prompt kind");
  const PromptKind kind = *request.kind;
  int n;
  {
    std::lock_guard lock(mu_);
    n = ++calls_[kind];
  }
  const std::string slug(kind_slug(kind));
  const auto numbered = dir_ / (slug + "." + std::to_string(n) + ".txt");
  if (std::filesystem::exists(numbered)) return util::read_file(numbered.string());
  const auto plain = dir_ / (slug + ".txt");
  if (std::filesystem::exists(plain)) return util::read_file(plain.string());
  if (kind == PromptKind::MitreSelect) {
    const std::string& prompt = request.messages.back().text;
    return "[\"" + first_pattern_id(prompt) + "\"]";
  }
  throw Error(Errc::ProviderRefused, "mock has no response for " + slug);
}

int FileMockProvider::calls(PromptKind kind) const {
  std::lock_guard lock(mu_);
  auto it = calls_.find(kind);
  return it == calls_.end() ? 0 : it->second;
}

ScriptedProvider::ScriptedProvider(Script script) : script_(std::move(script)) {}

std::string ScriptedProvider::complete(const CompletionRequest& request) {
  int n;
  {
    std::lock_guard lock(mu_);
    ++total_;
    n = request.kind ? ++calls_[*request.kind] : total_;
  }
  return script_(request, n);
}

int ScriptedProvider::calls(PromptKind kind) const {
  std::lock_guard lock(mu_);
  auto it = calls_.find(kind);
  return it == calls_.end() ? 0 : it->second;
}

int ScriptedProvider::total_calls() const {
  std::lock_guard lock(mu_);
  return total_;
}

Gateway::Gateway(std::shared_ptr<ChatProvider> provider, GatewayOptions options)
    : provider_(std::move(provider)), options_(std::move(options)), limiter_(options_.min_interval) {
  if (!provider_) throw Error(Errc::Precondition, "gateway needs a provider");
}

Completion Gateway::complete(const CompletionRequest& request) {
  request.validate();
  Completion out;
  net::RetryPolicy policy = options_.retry;
  if (request.max_retries) policy.max_retries = *request.max_retries;
  out.text = net::with_retry(
      policy,
      [&] {
        limiter_.acquire();
        return provider_->complete(request);
      },
      &out.retries);
  return out;
}

std::future<Completion> Gateway::submit(CompletionRequest request) {
  return std::async(std::launch::async,
                    [this, req = std::move(request)] { return complete(req); });
}

}  // namespace aegis::llm
