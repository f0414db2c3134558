#include <gtest/gtest.h>

#include <atomic>

#include "aegis/app/persist.hpp"
#include "aegis/app/server.hpp"
#include "aegis/report/report.hpp"
#include "httplib.h"
#include "mock_pipeline.hpp"

namespace aegis::app {
namespace {

using nlohmann::json;

constexpr const char* kFakeKey = "sk-session-test-7f3a9c";

struct ManualClock {
  std::atomic<long long> offset_s{0};
  Session::TimePoint base = std::chrono::steady_clock::now();
  SessionTable::Clock fn() {
    return [this] { return base + std::chrono::seconds(offset_s.load()); };
  }
};

class ServerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    ServerDeps deps;
    deps.kb = fixtures::fixture_kb();
    deps.provider_factory = [](const ProviderKeys&) {
      return std::make_shared<llm::FileMockProvider>(fixtures::fixture("mock_provider"));
    };
    deps.clock = clock.fn();
    ServerOptions opt;
    opt.workers = 2;
    opt.gateway = fixtures::no_wait_options();
    server = std::make_unique<ApiServer>(opt, deps);
    port = server->start();
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
  }
  void TearDown() override { server->stop(); }

  std::string open_session() {
    auto r = client->Post("/api/session", json{{"llm_api_key", kFakeKey}}.dump(), "application/json");
    EXPECT_EQ(r->status, 201);
    return json::parse(r->body).at("session_id");
  }

  std::string new_run(const std::string& sid) {
    auto r = client->Post("/api/session/" + sid + "/threat-model",
                          fixtures::load_json_fixture("profile.json").dump(), "application/json");
    EXPECT_EQ(r->status, 201) << r->body;
    return json::parse(r->body).at("run_id");
  }

  ManualClock clock;
  std::unique_ptr<ApiServer> server;
  std::unique_ptr<httplib::Client> client;
  int port = 0;
};

TEST_F(ServerTest, Health) {
  auto r = client->Get("/api/health");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  const json body = json::parse(r->body);
  EXPECT_EQ(body["status"], "ok");
  EXPECT_EQ(body["attack_patterns"], 33);
}

TEST_F(ServerTest, SessionWithoutLlmKeyIs400) {
  auto r = client->Post("/api/session", R"({"nvd_api_key": "x"})", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);
  EXPECT_EQ(json::parse(r->body)["error"], "MissingLlmKey");
  r = client->Post("/api/session", "not json", "application/json");
  EXPECT_EQ(r->status, 400);
}

TEST_F(ServerTest, FullWizardFlow) {
  const std::string sid = open_session();
  EXPECT_EQ(sid.size(), 64u);
  auto r = client->Post("/api/session/" + sid + "/threat-model",
                        fixtures::load_json_fixture("profile.json").dump(), "application/json");
  ASSERT_EQ(r->status, 201) << r->body;
  const json tm = json::parse(r->body);
  EXPECT_EQ(tm["threats"].size(), 18u);
  EXPECT_EQ(tm["mappings"].size(), 18u);
  EXPECT_EQ(tm["improvement_suggestions"].size(), 2u);
  const std::string base = "/api/session/" + sid + "/run/" + tm["run_id"].get<std::string>();

  // report before any later stage: placeholders
  r = client->Get(base + "/report.md");
  ASSERT_EQ(r->status, 200);
  EXPECT_EQ(util::count_occurrences(r->body, report::kNotGenerated), 4u);

  r = client->Post(base + "/dread", "", "application/json");
  ASSERT_EQ(r->status, 200) << r->body;
  const json dread = json::parse(r->body)["dread"];
  ASSERT_EQ(dread.size(), 18u);
  EXPECT_EQ(dread[0]["Damage Potential"], 9);
  for (const char* s : {"/mitigations", "/test-cases", "/attack-tree"}) {
    r = client->Post(base + s, "", "application/json");
    EXPECT_EQ(r->status, 200) << s << r->body;
  }
  r = client->Get(base + "/report.md");
  EXPECT_EQ(r->get_header_value("Content-Type").rfind("text/markdown", 0), 0u);
  EXPECT_EQ(r->body.find(report::kNotGenerated), std::string::npos);
  std::size_t pos = 0;
  for (auto h : report::kSectionHeadings) {
    pos = r->body.find("## " + std::string(h) + "\n", pos);
    EXPECT_NE(pos, std::string::npos) << h;
  }
  r = client->Get(base + "/report.pdf");
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(r->body.rfind("%PDF-", 0), 0u);
  EXPECT_EQ(r->get_header_value("Content-Type"), "application/pdf");
}

TEST_F(ServerTest, InvalidProfileListsEveryField) {
  const std::string sid = open_session();
  json profile = fixtures::load_json_fixture("profile.json");
  profile["description"] = "";
  profile["technical_ability"] = "Wizard";
  auto r = client->Post("/api/session/" + sid + "/threat-model", profile.dump(), "application/json");
  EXPECT_EQ(r->status, 422);
  EXPECT_EQ(json::parse(r->body)["fields"].size(), 2u);
}

TEST_F(ServerTest, UnknownRunAndSession) {
  const std::string sid = open_session();
  auto r = client->Post("/api/session/" + sid + "/run/99/dread", "", "application/json");
  EXPECT_EQ(r->status, 404);
  r = client->Post("/api/session/abcdef/threat-model", "{}", "application/json");
  EXPECT_EQ(r->status, 401);
}

TEST_F(ServerTest, DeleteErasesKeysAndInvalidates) {
  const std::string sid = open_session();
  auto session = server->sessions().get(sid);
  EXPECT_EQ(session->keys().llm(), kFakeKey);
  auto r = client->Delete("/api/session/" + sid);
  EXPECT_EQ(r->status, 204);
  EXPECT_TRUE(session->keys_erased());
  r = client->Post("/api/session/" + sid + "/threat-model", "{}", "application/json");
  EXPECT_EQ(r->status, 401);
  r = client->Delete("/api/session/" + sid);
  EXPECT_EQ(r->status, 401);
}

TEST_F(ServerTest, ExpiredSessionIs401WithKeysErased) {
  const std::string sid = open_session();
  const std::string rid = new_run(sid);
  auto session = server->sessions().get(sid);
  clock.offset_s = 59 * 60;
  EXPECT_EQ(client->Get("/api/session/" + sid + "/run/" + rid + "/report.md")->status, 200);
  clock.offset_s = 60 * 60;
  auto r = client->Get("/api/session/" + sid + "/run/" + rid + "/report.md");
  EXPECT_EQ(r->status, 401);
  EXPECT_EQ(json::parse(r->body)["error"], "SessionExpired");
  EXPECT_TRUE(session->keys_erased());
  EXPECT_EQ(server->sessions().size(), 0u);
}

TEST_F(ServerTest, ConcurrentSessionsRunIndependently) {
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (int i = 0; i < 4; ++i) {
    threads.emplace_back([&] {
      httplib::Client c("127.0.0.1", port);
      auto s = c.Post("/api/session", json{{"llm_api_key", kFakeKey}}.dump(), "application/json");
      const std::string sid = json::parse(s->body)["session_id"];
      auto r = c.Post("/api/session/" + sid + "/threat-model",
                      fixtures::load_json_fixture("profile.json").dump(), "application/json");
      if (r && r->status == 201 && json::parse(r->body)["threats"].size() == 18) ++ok;
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(ok, 4);
}

TEST(ServerPersistence, RunsWrittenAfterEachStageWithoutKeys) {
  fixtures::TempDir tmp("persist");
  ServerDeps deps;
  deps.kb = fixtures::fixture_kb();
  deps.provider_factory = [](const ProviderKeys&) {
    return std::make_shared<llm::FileMockProvider>(fixtures::fixture("mock_provider"));
  };
  ServerOptions opt;
  opt.workers = 1;
  opt.persist_dir = tmp.path();
  ApiServer server(opt, deps);
  httplib::Client c("127.0.0.1", server.start());
  auto s = c.Post("/api/session", json{{"llm_api_key", kFakeKey}, {"otx_api_key", "otx-secret-91ab"}}.dump(),
                  "application/json");
  const std::string sid = json::parse(s->body)["session_id"];
  auto r = c.Post("/api/session/" + sid + "/threat-model", fixtures::load_json_fixture("profile.json").dump(),
                  "application/json");
  ASSERT_EQ(r->status, 201);
  const auto file = tmp.path() / "run-1.json";
  ASSERT_TRUE(std::filesystem::exists(file));
  EXPECT_FALSE(load_run(file).dread.has_value());
  c.Post("/api/session/" + sid + "/run/1/dread", "", "application/json");
  EXPECT_EQ(load_run(file).dread->size(), 18u);
  server.stop();
  const std::string bytes = util::read_file(file.string());
  EXPECT_EQ(bytes.find(kFakeKey), std::string::npos);
  EXPECT_EQ(bytes.find("otx-secret-91ab"), std::string::npos);
  EXPECT_EQ(bytes.find(sid), std::string::npos);
}

TEST(SessionTable, TtlPurgeAndTokens) {
  ManualClock clock;
  SessionTable table(std::chrono::minutes(60), clock.fn());
  try {
    table.create(ProviderKeys("", "nvd", ""));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MissingLlmKey);
  }
  const auto a = table.create(ProviderKeys("k1", "", ""));
  clock.offset_s = 30 * 60;
  const auto b = table.create(ProviderKeys("k2", "", ""));
  EXPECT_NE(a, b);
  auto sa = table.get(a);
  clock.offset_s = 61 * 60;
  EXPECT_EQ(table.purge_expired(), 1u);
  EXPECT_TRUE(sa->keys_erased());
  EXPECT_EQ(table.get(b)->keys().llm(), "k2");
  EXPECT_THROW(table.get(a), Error);
}

TEST(WorkerPool, RunsEverySubmittedTask) {
  WorkerPool pool(3);
  std::vector<std::future<int>> f;
  for (int i = 0; i < 20; ++i) f.push_back(pool.submit([i] { return i * i; }));
  int sum = 0;
  for (auto& x : f) sum += x.get();
  EXPECT_EQ(sum, 2470);
  auto thrower = pool.submit([]() -> int { throw Error(Errc::BadInput, "x"); });
  EXPECT_THROW(thrower.get(), Error);
}

TEST(HttpStatus, Mapping) {
  EXPECT_EQ(http_status(Errc::MissingLlmKey), 400);
  EXPECT_EQ(http_status(Errc::SessionExpired), 401);
  EXPECT_EQ(http_status(Errc::EmptyDescription), 422);
  EXPECT_EQ(http_status(Errc::GenerationFailed), 502);
}

}  // namespace
}  // namespace aegis::app
