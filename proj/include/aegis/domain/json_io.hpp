#pragma once

// Canonical JSON shapes for the domain types. Threat and DREAD entries use the
// exact key spelling of the provider contracts ("Threat Type", "Scenario",
// "Potential Impact", "MITRE ATT&CK Keywords", "Damage Potential", ...).

#include "aegis/domain/types.hpp"
#include "json.hpp"

namespace aegis {

void to_json(nlohmann::json& j, const TechnologySelection& t);
void to_json(nlohmann::json& j, const ApplicationProfile& p);
void to_json(nlohmann::json& j, const Assumption& a);
void to_json(nlohmann::json& j, const ThreatScenario& t);
void to_json(nlohmann::json& j, const MitreMapping& m);
void to_json(nlohmann::json& j, const MitigationSet& m);
void to_json(nlohmann::json& j, const GherkinSuiteList& g);
void to_json(nlohmann::json& j, const RunMetadata& m);
void to_json(nlohmann::json& j, const ThreatModelRun& run);

/// DREAD entry paired with the threat it scores.
nlohmann::json dread_entry_json(const ThreatScenario& threat, const DreadScore& score);

/// Strict readers; throw Error(MissingKey | InvalidEnum | OutOfRange).
ApplicationProfile profile_from_json(const nlohmann::json& j);
MitreMapping mapping_from_json(const nlohmann::json& j);
ThreatModelRun run_from_json(const nlohmann::json& j);

/// {"threat_model": [...], "improvement_suggestions": [...]}
nlohmann::json threat_doc_json(const std::vector<ThreatScenario>& threats,
                               const std::vector<std::string>& suggestions);

/// Plain-text list of threats as substituted into the downstream prompts.
std::string threats_prompt_text(const std::vector<ThreatScenario>& threats);
std::string mappings_prompt_text(const std::vector<ThreatScenario>& threats,
                                 const std::vector<MitreMapping>& mappings);

}  // namespace aegis
