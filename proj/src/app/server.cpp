#include "aegis/app/server.hpp"

#include "aegis/app/persist.hpp"
#include "aegis/domain/json_io.hpp"
#include "aegis/domain/validate.hpp"
#include "aegis/report/report.hpp"
#include "httplib.h"

namespace aegis::app {

using nlohmann::json;

WorkerPool::WorkerPool(std::size_t threads) {
  if (threads == 0) threads = 1;
  for (std::size_t i = 0; i < threads; ++i) {
    threads_.emplace_back([this] {
      for (;;) {
        std::function<void()> job;
        {
          std::unique_lock lock(mu_);
          cv_.wait(lock, [this] { return stopping_ || !jobs_.empty(); });
          if (jobs_.empty()) return;
          job = std::move(jobs_.front());
          jobs_.pop_front();
        }
        job();
      }
    });
  }
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  for (auto& t : threads_) t.join();
}

void WorkerPool::enqueue(std::function<void()> job) {
  {
    std::lock_guard lock(mu_);
    jobs_.push_back(std::move(job));
  }
  cv_.notify_one();
}

ProviderFactory http_provider_factory(llm::ProviderConfig base, std::shared_ptr<net::HttpClient> http) {
  return [base = std::move(base), http = std::move(http)](const ProviderKeys& keys) {
    llm::ProviderConfig cfg = base;
    cfg.api_key = keys.llm();
    return std::make_shared<llm::HttpChatProvider>(http, std::move(cfg));
  };
}

int http_status(Errc code) noexcept {
  switch (code) {
    case Errc::MissingLlmKey:
    case Errc::BadInput: return 400;
    case Errc::SessionExpired: return 401;
    case Errc::NotFound: return 404;
    case Errc::Precondition: return 409;
    case Errc::InvalidEnum:
    case Errc::EmptyDescription:
    case Errc::BadVersionPattern:
    case Errc::MissingKey: return 422;
    case Errc::RateLimited: return 503;
    case Errc::Timeout: return 504;
    case Errc::GenerationFailed:
    case Errc::NotMermaid:
    case Errc::OutOfRange:
    case Errc::NoParsableObject:
    case Errc::SchemaViolation:
    case Errc::ProviderRefused:
    case Errc::AuthFailed:
    case Errc::QuotaExceeded:
    case Errc::Transport: return 502;
    default: return 500;
  }
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, Errc code, const std::string& message, json extra = json::object()) {
  extra["error"] = std::string(errc_name(code));
  extra["message"] = message;
  send_json(res, http_status(code), extra);
}

// Runs a handler body, translating failures into error responses.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    send_error(res, e.code(), e.detail());
  } catch (const json::exception& e) {
    send_error(res, Errc::BadInput, e.what());
  } catch (const std::exception&) {
    send_json(res, 500, {{"error", "Internal"}, {"message", "internal error"}});
  }
}

json parse_body(const httplib::Request& req, bool allow_empty) {
  if (req.body.empty()) {
    if (allow_empty) return json::object();
    throw Error(Errc::BadInput, "request body is empty");
  }
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) throw Error(Errc::BadInput, "request body must be a JSON object");
  return body;
}

std::string key_field(const json& body, const char* name, const std::string& fallback) {
  auto it = body.find(name);
  if (it == body.end() || it->is_null()) return fallback;
  if (!it->is_string()) throw Error(Errc::BadInput, std::string(name) + " must be a string");
  return it->get<std::string>().empty() ? fallback : it->get<std::string>();
}

json dread_json(const ThreatModelRun& run) {
  json out = json::array();
  for (std::size_t i = 0; i < run.threats.size(); ++i) {
    const auto& slot = (*run.dread)[i];
    out.push_back(slot ? dread_entry_json(run.threats[i], *slot) : json(nullptr));
  }
  return out;
}

}  // namespace

ApiServer::ApiServer(ServerOptions options, ServerDeps deps)
    : options_(std::move(options)),
      deps_(std::move(deps)),
      sessions_(options_.session_ttl, deps_.clock),
      pool_(options_.workers),
      http_(std::make_unique<httplib::Server>()) {
  if (!deps_.kb) throw Error(Errc::Precondition, "server needs a loaded knowledge base");
  if (!deps_.provider_factory) throw Error(Errc::Precondition, "server needs a provider factory");
  options_.pipeline.validate();
  routes();
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? http_->bind_to_any_port(host) : (http_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(Errc::IoError, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void ApiServer::listen() { http_->listen_after_bind(); }

int ApiServer::start(const std::string& host, int port) {
  const int bound = bind(host, port);
  thread_ = std::thread([this] { listen(); });
  http_->wait_until_ready();
  return bound;
}

void ApiServer::stop() {
  if (http_) http_->stop();
  if (thread_.joinable()) thread_.join();
}

void ApiServer::routes() {
  static const std::string kSession = R"(/api/session/([0-9a-f]+))";
  static const std::string kRun = kSession + R"(/run/([0-9]+))";

  http_->Get("/api/health", [this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"}, {"attack_patterns", deps_.kb->size()}, {"sessions", sessions_.size()}});
  });

  http_->Post("/api/session", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = parse_body(req, true);
      const ProviderKeys& d = options_.default_keys;
      ProviderKeys keys(key_field(body, "llm_api_key", d.llm()), key_field(body, "nvd_api_key", d.nvd()),
                        key_field(body, "otx_api_key", d.otx()));
      const std::string id = sessions_.create(std::move(keys));
      send_json(res, 201, {{"session_id", id}, {"expires_in_seconds", sessions_.ttl().count()}});
    });
  });

  http_->Delete(kSession, [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      if (!sessions_.destroy(req.matches[1])) throw Error(Errc::SessionExpired, "unknown or closed session");
      res.status = 204;
    });
  });

  http_->Post(kSession + "/threat-model", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto session = sessions_.get(req.matches[1]);
      const json body = parse_body(req, false);
      const ProfileResult profile = validate_profile(body);
      if (!profile.ok()) {
        json fields = json::array();
        for (const auto& e : profile.errors)
          fields.push_back({{"field", e.field}, {"error", std::string(errc_name(e.kind))}, {"message", e.message}});
        const auto& first = profile.errors.front();
        send_error(res, first.kind, first.field + ": " + first.message, {{"fields", fields}});
        return;
      }

      auto state = pool_.submit([&, session] {
        const ProviderKeys keys = session->keys();
        auto st = std::make_shared<RunState>();
        st->handles.kb = deps_.kb;
        st->handles.gateway = std::make_shared<llm::Gateway>(deps_.provider_factory(keys), options_.gateway);
        st->handles.dataset_rules = deps_.dataset_rules;
        if (deps_.intel_http) {
          intel::IntelConfig ic = options_.intel;
          ic.nvd_api_key = keys.nvd();
          ic.otx_api_key = keys.otx();
          st->handles.nvd = std::make_shared<intel::NvdClient>(*deps_.intel_http, ic);
          if (!ic.otx_api_key.empty()) st->handles.otx = std::make_shared<intel::OtxClient>(*deps_.intel_http, ic);
        }
        st->context = pipeline::prepare_context(*profile.profile, options_.pipeline, st->handles, st->log);
        st->run = pipeline::run_threat_model(st->context, st->log);
        pipeline::finish_metadata(st->run, st->context, st->handles, st->log, 1);
        if (options_.persist_dir) {
          st->persist_name = "run-" + std::to_string(++persisted_runs_) + ".json";
          persist_run(st->run, *options_.persist_dir / st->persist_name);
        }
        return st;
      }).get();

      const std::string run_id = session->add_run(state);
      send_json(res, 201, {{"run_id", run_id},
                           {"threats", state->run.threats},
                           {"mappings", state->run.mappings},
                           {"improvement_suggestions", state->run.improvement_suggestions},
                           {"warnings", state->run.metadata.warnings}});
    });
  });

  // One handler per later stage; each runs on the pool under the run's lock.
  using Stage = std::function<json(RunState&)>;
  auto stage = [this](const std::string& suffix, Stage fn) {
    http_->Post(kRun + suffix, [this, fn](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        auto session = sessions_.get(req.matches[1]);
        auto state = session->run(req.matches[2]);
        const json body = pool_.submit([&] {
          std::lock_guard lock(state->mu);
          json out = fn(*state);
          pipeline::finish_metadata(state->run, state->context, state->handles, state->log,
                                    state->run.metadata.run_index);
          out["warnings"] = state->run.metadata.warnings;
          if (options_.persist_dir) persist_run(state->run, *options_.persist_dir / state->persist_name);
          return out;
        }).get();
        send_json(res, 200, body);
      });
    });
  };

  stage("/dread", [](RunState& s) {
    s.run.dread = pipeline::assess_dread(s.context, s.run.threats, s.run.mappings, s.log);
    return json{{"dread", dread_json(s.run)}};
  });
  stage("/mitigations", [](RunState& s) {
    s.run.mitigations = pipeline::generate_mitigations(s.context, s.run.threats, s.run.mappings, s.log);
    return json{{"mitigations", *s.run.mitigations}};
  });
  stage("/test-cases", [](RunState& s) {
    s.run.test_cases = pipeline::generate_test_cases(s.context, s.run.threats, s.log);
    return json{{"test_cases", *s.run.test_cases}};
  });
  stage("/attack-tree", [](RunState& s) {
    s.run.attack_tree = pipeline::generate_attack_tree(s.context, s.run.threats, s.run.mappings, s.log);
    return json{{"attack_tree", s.run.attack_tree->mermaid_source}};
  });

  auto report = [this](bool pdf) {
    return [this, pdf](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        auto session = sessions_.get(req.matches[1]);
        auto state = session->run(req.matches[2]);
        std::string md;
        {
          std::lock_guard lock(state->mu);
          md = report::render_markdown(state->run);
        }
        res.status = 200;
        if (pdf) {
          res.set_content(report::render_pdf(md), "application/pdf");
          res.set_header("Content-Disposition", "attachment; filename=\"report.pdf\"");
        } else {
          res.set_content(md, "text/markdown; charset=utf-8");
        }
      });
    };
  };
  http_->Get(kRun + "/report.md", report(false));
  http_->Get(kRun + "/report.pdf", report(true));
}

}  // namespace aegis::app
