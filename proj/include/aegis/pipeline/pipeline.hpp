#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "aegis/domain/types.hpp"
#include "aegis/intel/intel.hpp"
#include "aegis/kb/attack_kb.hpp"
#include "aegis/llm/gateway.hpp"

namespace aegis::pipeline {

/// Long-lived collaborators shared by every run. `nvd` and `otx` are
/// optional; without them the corresponding context block stays empty.
struct Handles {
  std::shared_ptr<const kb::KnowledgeBase> kb;
  std::shared_ptr<llm::Gateway> gateway;
  std::shared_ptr<intel::NvdClient> nvd;
  std::shared_ptr<intel::OtxClient> otx;
  kb::DatasetRules dataset_rules = kb::DatasetRules::defaults();
  /// Run timestamp source; defaults to the wall clock.
  std::function<std::string()> clock;
};

/// Everything a stage reads. Never mutated once built.
struct RunContext {
  ApplicationProfile profile;
  std::string cve_context;
  std::string otx_context;
  const kb::KnowledgeBase* kb = nullptr;
  llm::Gateway* gateway = nullptr;
  PipelineConfig config;
  kb::DatasetRules dataset_rules = kb::DatasetRules::defaults();
};

/// Per-run accumulator of warnings and retry counts.
struct RunLog {
  std::vector<std::string> warnings;
  int retries = 0;

  void warn(std::string message) { warnings.push_back(std::move(message)); }
};

/// Fetches NVD/OTX context (failures become warnings) and assembles the
/// context. Throws Error(Precondition) without a usable gateway or KB and
/// the profile's first validation error for an invalid profile.
RunContext prepare_context(const ApplicationProfile& profile, const PipelineConfig& config,
                           const Handles& handles, RunLog& log);

struct ThreatSet {
  std::vector<ThreatScenario> threats;
  std::vector<std::string> improvement_suggestions;
};

/// Throws Error(GenerationFailed).
ThreatSet generate_threats(const RunContext& ctx, RunLog& log);

/// Never calls the provider when the keyword search finds no candidates.
/// Throws Error(GenerationFailed) only when transport or schema retries are
/// exhausted; an id outside the candidates yields a flagged sentinel mapping.
MitreMapping map_threat(const RunContext& ctx, const ThreatScenario& threat, RunLog& log);

/// One slot per threat. Entries pair by exact (type, scenario) first, then
/// positionally; threats left over get nullopt.
/// Throws Error(GenerationFailed | OutOfRange).
std::vector<std::optional<DreadScore>> assess_dread(const RunContext& ctx,
                                                    const std::vector<ThreatScenario>& threats,
                                                    const std::vector<MitreMapping>& mappings,
                                                    RunLog& log);

MitigationSet generate_mitigations(const RunContext& ctx, const std::vector<ThreatScenario>& threats,
                                   const std::vector<MitreMapping>& mappings, RunLog& log);

GherkinSuiteList generate_test_cases(const RunContext& ctx,
                                     const std::vector<ThreatScenario>& threats, RunLog& log);

/// Throws Error(NotMermaid).
AttackTree generate_attack_tree(const RunContext& ctx, const std::vector<ThreatScenario>& threats,
                                const std::vector<MitreMapping>& mappings, RunLog& log);

/// Lenient parsers behind the stages, exposed for tests.
std::vector<MitigationEntry> parse_mitigation_table(std::string_view markdown,
                                                    std::vector<std::string>* warnings = nullptr);
std::vector<GherkinSuite> parse_gherkin_suites(std::string_view text);
/// Throws Error(NotMermaid).
std::string parse_mermaid(std::string_view text);

/// Threats plus mappings only: the first half of a run.
ThreatModelRun run_threat_model(const RunContext& ctx, RunLog& log);

/// Context, threats, mappings, DREAD, mitigations, test cases, attack tree.
ThreatModelRun run_full(const ApplicationProfile& profile, const PipelineConfig& config,
                        const Handles& handles, int run_index = 1);

/// Stamps metadata (timestamp, model, temperature, warnings, retries).
void finish_metadata(ThreatModelRun& run, const RunContext& ctx, const Handles& handles,
                     const RunLog& log, int run_index);

struct BatchOptions {
  std::string case_id = "1";
  bool continue_on_error = false;
  int parallelism = 1;
};

struct BatchFailure {
  int run_index = 0;
  std::string error;
};

struct BatchManifest {
  std::string case_id;
  int requested = 0;
  std::vector<int> succeeded;         // run indices, ascending
  std::vector<BatchFailure> failures; // ascending by run index
  std::size_t total_threats = 0;
  std::vector<std::string> files;     // relative to the case directory, run order
};

nlohmann::json manifest_json(const BatchManifest& m);
BatchManifest manifest_from_json(const nlohmann::json& j);

/// Runs run_full n times writing `<out_dir>/case-<id>/batch-<k>.json`
/// (k from 1) and `manifest.json`. Without continue_on_error the first
/// failure stops scheduling, the manifest is still written, and the error
/// is rethrown.
BatchManifest run_batch(const ApplicationProfile& profile, int n,
                        const std::filesystem::path& out_dir, const PipelineConfig& config,
                        const Handles& handles, const BatchOptions& options = {});

}  // namespace aegis::pipeline
