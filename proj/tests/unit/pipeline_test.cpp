#include <gtest/gtest.h>

#include <chrono>

#include "aegis/app/persist.hpp"
#include "aegis/report/report.hpp"
#include "mock_pipeline.hpp"

namespace aegis::pipeline {
namespace {

using fixtures::fixture_kb;
using fixtures::fixture_profile;
using fixtures::handles_for;
using fixtures::mock_handles;
using fixtures::mock_text;
using llm::PromptKind;

// Answers each kind from the mock directory, except the hooks given.
std::shared_ptr<llm::ScriptedProvider> scripted(
    std::function<std::optional<std::string>(const llm::CompletionRequest&, int)> hook) {
  return std::make_shared<llm::ScriptedProvider>([hook](const llm::CompletionRequest& r, int n) {
    if (auto s = hook(r, n)) return *s;
    if (*r.kind == PromptKind::MitreSelect)
      return "[\"" + llm::first_pattern_id(r.messages.front().text) + "\"]";
    return mock_text(std::string(llm::kind_slug(*r.kind)));
  });
}

RunContext context_for(const Handles& h) {
  RunLog log;
  return prepare_context(fixture_profile(), PipelineConfig{}, h, log);
}

ThreatScenario threat_with(std::vector<std::string> keywords) {
  ThreatScenario t;
  t.threat_type = StrideCategory::Tampering;
  t.scenario = "Firmware on the flight controller is modified.";
  t.keywords = std::move(keywords);
  return t;
}

TEST(MapThreat, MemberIdIsMapped) {
  const auto h = mock_handles();
  const auto ctx = context_for(h);
  RunLog log;
  const auto m = map_threat(ctx, threat_with({"firmware"}), log);
  EXPECT_TRUE(m.mapped);
  EXPECT_FALSE(m.hallucinated);
  EXPECT_TRUE(fixture_kb()->contains(m.stix_id));
  EXPECT_EQ(fixture_kb()->resolve(m.stix_id).technique_id, m.technique_id);
  EXPECT_GT(m.candidate_count, 1u);
}

TEST(MapThreat, FabricatedIdBecomesFlaggedSentinel) {
  const std::string fake = "attack-pattern--deadbeef-0000-4000-8000-000000000001";
  auto provider = scripted([&](const llm::CompletionRequest& r, int) -> std::optional<std::string> {
    if (*r.kind == PromptKind::MitreSelect) return "```json\n[\"" + fake + "\"]\n```";
    return std::nullopt;
  });
  const auto h = handles_for(provider);
  const auto ctx = context_for(h);
  RunLog log;
  const auto m = map_threat(ctx, threat_with({"firmware"}), log);
  EXPECT_FALSE(m.mapped);
  EXPECT_TRUE(m.hallucinated);
  EXPECT_EQ(m.proposed_id, fake);
  EXPECT_EQ(m.stix_id, kSentinelPatternId);
  EXPECT_EQ(m.technique_id, "N/A");
  EXPECT_FALSE(log.warnings.empty());
}

TEST(MapThreat, ExplicitSentinelIsNotAHallucination) {
  auto provider = scripted([](const llm::CompletionRequest& r, int) -> std::optional<std::string> {
    if (*r.kind == PromptKind::MitreSelect) return "[\"" + std::string(kSentinelPatternId) + "\"]";
    return std::nullopt;
  });
  const auto h = handles_for(provider);
  RunLog log;
  const auto m = map_threat(context_for(h), threat_with({"firmware"}), log);
  EXPECT_FALSE(m.mapped);
  EXPECT_FALSE(m.hallucinated);
}

TEST(MapThreat, NoCandidatesMeansNoProviderCall) {
  auto provider = scripted([](const llm::CompletionRequest&, int) { return std::nullopt; });
  const auto h = handles_for(provider);
  const auto ctx = context_for(h);
  RunLog log;
  const auto m = map_threat(ctx, threat_with({"zzqx unmatched keyword"}), log);
  EXPECT_EQ(m.stix_id, kSentinelPatternId);
  EXPECT_EQ(m.candidate_count, 0u);
  EXPECT_FALSE(m.hallucinated);
  EXPECT_EQ(provider->calls(PromptKind::MitreSelect), 0);
  const auto none = map_threat(ctx, threat_with({}), log);
  EXPECT_EQ(none.candidate_count, 0u);
  EXPECT_EQ(provider->total_calls(), 0);
}

TEST(MapThreat, CandidatePromptCarriesTruncatedDescriptions) {
  std::string seen;
  auto provider = scripted([&](const llm::CompletionRequest& r, int) -> std::optional<std::string> {
    if (*r.kind == PromptKind::MitreSelect) seen = r.messages.front().text;
    return std::nullopt;
  });
  const auto h = handles_for(provider);
  RunLog log;
  map_threat(context_for(h), threat_with({"firmware"}), log);
  EXPECT_NE(seen.find("T1495"), std::string::npos);
  EXPECT_NE(seen.find("T0839"), std::string::npos);  // IoT profile searches ICS too
}

TEST(RunFull, MockRunProducesCompleteArtifacts) {
  const auto h = mock_handles();
  const auto run = run_full(fixture_profile(), PipelineConfig{}, h, 7);
  ASSERT_EQ(run.threats.size(), 18u);
  std::array<int, 6> per{};
  for (const auto& t : run.threats) ++per[stride_index(t.threat_type)];
  for (int n : per) EXPECT_EQ(n, 3);
  ASSERT_EQ(run.mappings.size(), 18u);
  ASSERT_TRUE(run.dread);
  ASSERT_EQ(run.dread->size(), 18u);
  for (const auto& d : *run.dread) EXPECT_TRUE(d.has_value());
  EXPECT_EQ((*run.dread)[0]->risk_text(), "7.60");
  EXPECT_EQ((*run.dread)[1]->risk_text(), "7.00");
  ASSERT_TRUE(run.mitigations);
  EXPECT_EQ(run.mitigations->entries.size(), 18u);
  ASSERT_TRUE(run.test_cases);
  EXPECT_EQ(run.test_cases->suites.size(), 6u);
  ASSERT_TRUE(run.attack_tree);
  EXPECT_EQ(run.attack_tree->mermaid_source.rfind("graph TD", 0), 0u);
  EXPECT_EQ(run.metadata.run_index, 7);
  EXPECT_EQ(run.metadata.model_id, "mock-file");
  EXPECT_EQ(run.metadata.timestamp, "2026-01-01T00:00:00Z");

  // with an echoing selector a threat is mapped exactly when it has candidates
  const auto datasets = kb::select_datasets(run.profile.app_type);
  int unmapped = 0;
  for (std::size_t i = 0; i < run.threats.size(); ++i) {
    const bool has = !fixture_kb()->keyword_search(datasets, run.threats[i].keywords, 25).empty();
    EXPECT_EQ(run.mappings[i].mapped, has) << i;
    unmapped += run.mappings[i].mapped ? 0 : 1;
  }
  EXPECT_EQ(unmapped, 2);
}

TEST(RunFull, ReportHasAllSectionsInOrder) {
  const auto run = run_full(fixture_profile(), PipelineConfig{}, mock_handles());
  const std::string md = report::render_markdown(run);
  std::size_t pos = md.find("## Table of Contents");
  ASSERT_NE(pos, std::string::npos);
  for (auto h : report::kSectionHeadings) {
    const auto at = md.find("## " + std::string(h) + "\n", pos);
    ASSERT_NE(at, std::string::npos) << h;
    pos = at;
  }
  EXPECT_EQ(md.find(report::kNotGenerated), std::string::npos);
}

TEST(RunFull, CorrectiveReaskRecoversFromMalformedOutput) {
  int threat_calls = 0;
  std::vector<llm::ChatMessage> second_messages;
  auto provider = scripted([&](const llm::CompletionRequest& r, int n) -> std::optional<std::string> {
    if (*r.kind != PromptKind::ThreatModel) return std::nullopt;
    ++threat_calls;
    if (n == 1) return std::string("I think the threats are mostly spoofing related.");
    second_messages = r.messages;
    return std::nullopt;
  });
  const auto run = run_full(fixture_profile(), PipelineConfig{}, handles_for(provider));
  EXPECT_EQ(threat_calls, 2);
  EXPECT_EQ(run.threats.size(), 18u);
  ASSERT_EQ(second_messages.size(), 3u);
  EXPECT_EQ(second_messages[1].role, "assistant");
  EXPECT_EQ(second_messages[2].role, "system");
  EXPECT_GE(run.metadata.retries, 1);
  bool warned = false;
  for (const auto& w : run.metadata.warnings) warned |= w.find("corrective") != std::string::npos;
  EXPECT_TRUE(warned);
}

TEST(RunFull, SecondMalformedAnswerFailsGeneration) {
  auto provider = scripted([](const llm::CompletionRequest& r, int) -> std::optional<std::string> {
    if (*r.kind == PromptKind::ThreatModel) return std::string("no json here");
    return std::nullopt;
  });
  try {
    run_full(fixture_profile(), PipelineConfig{}, handles_for(provider));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::GenerationFailed);
  }
  EXPECT_EQ(provider->calls(PromptKind::ThreatModel), 2);
}

TEST(RunFull, WrongThreatCountTriggersReask) {
  auto provider = scripted([](const llm::CompletionRequest& r, int n) -> std::optional<std::string> {
    if (*r.kind != PromptKind::ThreatModel || n > 1) return std::nullopt;
    auto doc = nlohmann::json::parse(mock_text("threat_model").substr(mock_text("threat_model").find('{'),
                                                                      mock_text("threat_model").rfind('}') -
                                                                          mock_text("threat_model").find('{') + 1));
    doc["threat_model"].erase(doc["threat_model"].begin());
    return doc.dump();
  });
  const auto run = run_full(fixture_profile(), PipelineConfig{}, handles_for(provider));
  EXPECT_EQ(run.threats.size(), 18u);
  EXPECT_EQ(provider->calls(PromptKind::ThreatModel), 2);
}

TEST(Preconditions, MissingKeyBadProfileAndNoKb) {
  struct Unconfigured final : llm::ChatProvider {
    std::string complete(const llm::CompletionRequest&) override { return {}; }
    std::string model_id() const override { return "none"; }
    bool configured() const override { return false; }
  };
  try {
    run_full(fixture_profile(), PipelineConfig{}, handles_for(std::make_shared<Unconfigured>()));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::Precondition);
  }
  auto h = mock_handles();
  auto p = fixture_profile();
  p.description.clear();
  try {
    run_full(p, PipelineConfig{}, h);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptyDescription);
  }
  h.kb.reset();
  EXPECT_THROW(run_full(fixture_profile(), PipelineConfig{}, h), Error);
}

TEST(Dread, PairsByScenarioThenPositionally) {
  const auto h = mock_handles();
  const auto ctx = context_for(h);
  RunLog log;
  const auto set = generate_threats(ctx, log);
  auto threats = set.threats;
  std::swap(threats[0], threats[1]);  // exact pairing must follow the scenario, not the slot
  const std::vector<MitreMapping> maps(threats.size());
  const auto scores = assess_dread(ctx, threats, maps, log);
  EXPECT_EQ(scores[0]->risk_text(), "7.00");
  EXPECT_EQ(scores[1]->risk_text(), "7.60");
}

TEST(Dread, MissingEntriesLeaveEmptySlots) {
  auto provider = scripted([](const llm::CompletionRequest& r, int) -> std::optional<std::string> {
    if (*r.kind != PromptKind::Dread) return std::nullopt;
    return std::string(R"({"Risk Assessment": [{"Threat Type": "Spoofing", "Scenario": "unrelated",
      "Damage Potential": 9, "Reproducibility": 6, "Exploitability": 8, "Affected Users": 8, "Discoverability": 7}]})");
  });
  const auto h = handles_for(provider);
  const auto ctx = context_for(h);
  RunLog log;
  const auto threats = generate_threats(ctx, log).threats;
  const auto scores = assess_dread(ctx, threats, std::vector<MitreMapping>(threats.size()), log);
  ASSERT_EQ(scores.size(), 18u);
  EXPECT_TRUE(scores[0].has_value());
  for (std::size_t i = 1; i < scores.size(); ++i) EXPECT_FALSE(scores[i].has_value());
}

TEST(Dread, OutOfRangeScoresAreRejected) {
  auto provider = scripted([](const llm::CompletionRequest& r, int) -> std::optional<std::string> {
    if (*r.kind != PromptKind::Dread) return std::nullopt;
    return std::string(R"({"Risk Assessment": [{"Threat Type": "Spoofing", "Scenario": "x",
      "Damage Potential": 12, "Reproducibility": 6, "Exploitability": 8, "Affected Users": 8, "Discoverability": 7}]})");
  });
  const auto h = handles_for(provider);
  const auto ctx = context_for(h);
  RunLog log;
  const auto threats = generate_threats(ctx, log).threats;
  try {
    assess_dread(ctx, threats, std::vector<MitreMapping>(threats.size()), log);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::OutOfRange);
  }
}

TEST(Parsers, MitigationTable) {
  std::vector<std::string> warnings;
  const auto rows = parse_mitigation_table(
      "Intro\n\n| Threat Type | Scenario | Suggested Mitigation(s) |\n|:---|---|---:|\n"
      "| Spoofing | Stolen creds | MFA<br>rotation |\n| Tampering | a \\| b | signed firmware | extra |\n| short |\n",
      &warnings);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].threat_type, "Spoofing");
  EXPECT_EQ(rows[1].scenario, "a | b");
  EXPECT_EQ(rows[1].mitigation, "signed firmware | extra");
  EXPECT_EQ(warnings.size(), 2u);
}

TEST(Parsers, GherkinTitles) {
  const auto suites = parse_gherkin_suites(
      "### Test Case 1: Login lockout\n```gherkin\nFeature: a\n  Scenario: x\n```\n"
      "```gherkin\nFeature: b\n  Scenario: From body\n```\n```\n\n```\n");
  ASSERT_EQ(suites.size(), 2u);
  EXPECT_EQ(suites[0].title, "Login lockout");
  EXPECT_EQ(suites[1].title, "b");
}

TEST(Parsers, Mermaid) {
  EXPECT_EQ(parse_mermaid("```mermaid\nflowchart LR\n A-->B\n```"), "flowchart LR\n A-->B");
  EXPECT_EQ(parse_mermaid("%% comment\ngraph TD\nA-->B").rfind("%% comment", 0), 0u);
  try {
    parse_mermaid("```mermaid\nsequenceDiagram\nA->>B: hi\n```");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotMermaid);
  }
}

TEST(RunBatch, ThirtyRunsWriteThirtyFilesAndManifest) {
  fixtures::TempDir tmp("batch");
  BatchOptions opt;
  opt.case_id = "12";
  opt.parallelism = 4;
  const auto start = std::chrono::steady_clock::now();
  const auto m = run_batch(fixture_profile(), 30, tmp.path(), PipelineConfig{}, mock_handles(), opt);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(secs, 60.0);
  EXPECT_EQ(m.succeeded.size(), 30u);
  EXPECT_TRUE(m.failures.empty());
  EXPECT_EQ(m.total_threats, 540u);
  const auto files = app::enumerate_batch(tmp.path() / "case-12");
  ASSERT_EQ(files.size(), 30u);
  for (int k = 1; k <= 30; ++k) {
    EXPECT_EQ(files[k - 1].filename(), "batch-" + std::to_string(k) + ".json");
    EXPECT_EQ(app::load_run(files[k - 1]).metadata.run_index, k);
  }
  const auto manifest = manifest_from_json(
      nlohmann::json::parse(util::read_file((tmp.path() / "case-12" / "manifest.json").string())));
  EXPECT_EQ(manifest.files, m.files);
  EXPECT_EQ(manifest.total_threats, 540u);
}

TEST(RunBatch, FailuresStopOrContinue) {
  auto fail_third = [] {
    return scripted([](const llm::CompletionRequest& r, int n) -> std::optional<std::string> {
      if (*r.kind == PromptKind::AttackTree && n == 3) throw Error(Errc::AuthFailed, "revoked");
      return std::nullopt;
    });
  };
  fixtures::TempDir tmp("batchfail");
  BatchOptions opt;
  opt.continue_on_error = true;
  const auto m = run_batch(fixture_profile(), 5, tmp.path(), PipelineConfig{}, handles_for(fail_third()), opt);
  EXPECT_EQ(m.succeeded, (std::vector<int>{1, 2, 4, 5}));
  ASSERT_EQ(m.failures.size(), 1u);
  EXPECT_EQ(m.failures[0].run_index, 3);

  opt.continue_on_error = false;
  opt.case_id = "2";
  EXPECT_THROW(run_batch(fixture_profile(), 5, tmp.path(), PipelineConfig{}, handles_for(fail_third()), opt),
               Error);
  const auto manifest = manifest_from_json(
      nlohmann::json::parse(util::read_file((tmp.path() / "case-2" / "manifest.json").string())));
  EXPECT_EQ(manifest.succeeded, (std::vector<int>{1, 2}));
  EXPECT_EQ(manifest.failures.size(), 1u);
}

}  // namespace
}  // namespace aegis::pipeline
