#include "aegis/domain/json_io.hpp"

#include "aegis/domain/validate.hpp"
#include "aegis/error.hpp"

namespace aegis {

using nlohmann::json;

namespace {

const json& need(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(Errc::MissingKey, key);
  return *it;
}

template <typename T>
T need_as(const json& j, const char* key) {
  try {
    return need(j, key).get<T>();
  } catch (const json::exception& e) {
    throw Error(Errc::SchemaViolation, std::string(key) + ": " + e.what());
  }
}

template <typename Opt>
auto need_enum(const json& j, const char* key, Opt (*parse)(std::string_view)) {
  auto v = parse(need_as<std::string>(j, key));
  if (!v) throw Error(Errc::InvalidEnum, key);
  return *v;
}

}  // namespace

void to_json(json& j, const TechnologySelection& t) {
  j = json{{"category", to_string(t.category)}, {"name", t.name}, {"version", t.version_pattern}};
}

void to_json(json& j, const ApplicationProfile& p) {
  j = json{{"description", p.description},
           {"app_type", p.app_type},
           {"industry_sector", p.industry_sector},
           {"data_sensitivity", to_string(p.data_sensitivity)},
           {"internet_facing", p.internet_facing},
           {"employee_range", to_string(p.employee_range)},
           {"compliance", p.compliance},
           {"auth_methods", p.auth_methods},
           {"technical_ability", to_string(p.technical_ability)},
           {"technologies", p.technologies}};
}

void to_json(json& j, const Assumption& a) {
  j = json{{"Assumption", a.assumption}, {"Role", a.role}, {"Condition", a.condition}};
}

void to_json(json& j, const ThreatScenario& t) {
  j = json{{"Threat Type", to_string(t.threat_type)},
           {"Scenario", t.scenario},
           {"Assumptions", t.assumptions},
           {"Potential Impact", t.potential_impact},
           {"MITRE ATT&CK Keywords", t.keywords}};
}

void to_json(json& j, const MitreMapping& m) {
  j = json{{"stix_id", m.stix_id},          {"technique_id", m.technique_id},
           {"name", m.name},                {"url", m.url},
           {"mapped", m.mapped},            {"hallucinated", m.hallucinated},
           {"proposed_id", m.proposed_id},  {"candidate_count", m.candidate_count}};
}

void to_json(json& j, const MitigationSet& m) {
  json entries = json::array();
  for (const auto& e : m.entries) {
    entries.push_back({{"Threat Type", e.threat_type},
                       {"Scenario", e.scenario},
                       {"Suggested Mitigation(s)", e.mitigation}});
  }
  j = json{{"raw_markdown", m.raw_markdown}, {"entries", entries}};
}

void to_json(json& j, const GherkinSuiteList& g) {
  j = json::array();
  for (const auto& s : g.suites) j.push_back({{"title", s.title}, {"gherkin", s.gherkin_source}});
}

void to_json(json& j, const RunMetadata& m) {
  j = json{{"timestamp", m.timestamp},     {"model_id", m.model_id},
           {"run_index", m.run_index},     {"temperature", m.temperature},
           {"retries", m.retries},         {"warnings", m.warnings}};
}

json dread_entry_json(const ThreatScenario& threat, const DreadScore& s) {
  return json{{"Threat Type", to_string(threat.threat_type)},
              {"Scenario", threat.scenario},
              {"Damage Potential", s.damage()},
              {"Reproducibility", s.reproducibility()},
              {"Exploitability", s.exploitability()},
              {"Affected Users", s.affected_users()},
              {"Discoverability", s.discoverability()},
              {"Risk Score", s.risk_score()}};
}

void to_json(json& j, const ThreatModelRun& run) {
  j = json::object();
  j["profile"] = run.profile;
  j["threat_model"] = run.threats;
  j["improvement_suggestions"] = run.improvement_suggestions;
  j["mitre_mappings"] = run.mappings;
  if (run.dread) {
    json entries = json::array();
    for (std::size_t i = 0; i < run.dread->size() && i < run.threats.size(); ++i) {
      const auto& slot = (*run.dread)[i];
      if (slot) {
        entries.push_back(dread_entry_json(run.threats[i], *slot));
      } else {
        entries.push_back(json{{"Threat Type", to_string(run.threats[i].threat_type)},
                               {"Scenario", run.threats[i].scenario},
                               {"Risk Score", nullptr},
                               {"unmatched", true}});
      }
    }
    j["dread"] = json{{"Risk Assessment", entries}};
  } else {
    j["dread"] = nullptr;
  }
  j["mitigations"] = run.mitigations ? json(*run.mitigations) : json(nullptr);
  j["test_cases"] = run.test_cases ? json(*run.test_cases) : json(nullptr);
  j["attack_tree"] =
      run.attack_tree ? json{{"mermaid", run.attack_tree->mermaid_source}} : json(nullptr);
  j["metadata"] = run.metadata;
}

json threat_doc_json(const std::vector<ThreatScenario>& threats,
                     const std::vector<std::string>& suggestions) {
  return json{{"threat_model", threats}, {"improvement_suggestions", suggestions}};
}

ApplicationProfile profile_from_json(const json& j) {
  auto result = validate_profile(j);
  if (!result.ok()) {
    const auto& e = result.errors.front();
    throw Error(e.kind, e.field + ": " + e.message);
  }
  return *result.profile;
}

MitreMapping mapping_from_json(const json& j) {
  MitreMapping m;
  m.stix_id = need_as<std::string>(j, "stix_id");
  m.technique_id = need_as<std::string>(j, "technique_id");
  m.name = need_as<std::string>(j, "name");
  m.url = need_as<std::string>(j, "url");
  m.mapped = need_as<bool>(j, "mapped");
  m.hallucinated = j.value("hallucinated", false);
  m.proposed_id = j.value("proposed_id", std::string{});
  m.candidate_count = j.value("candidate_count", std::size_t{0});
  if (m.mapped != is_mapped(m.stix_id, m.technique_id))
    throw Error(Errc::SchemaViolation, "mapped flag disagrees with ids for " + m.stix_id);
  return m;
}

namespace {

ThreatScenario threat_from_json(const json& e) {
  ThreatScenario t;
  t.threat_type = need_enum(e, "Threat Type", parse_stride);
  t.scenario = need_as<std::string>(e, "Scenario");
  t.potential_impact = need_as<std::string>(e, "Potential Impact");
  t.keywords = need_as<std::vector<std::string>>(e, "MITRE ATT&CK Keywords");
  for (const auto& a : e.value("Assumptions", json::array())) {
    t.assumptions.push_back({need_as<std::string>(a, "Assumption"), need_as<std::string>(a, "Role"),
                             need_as<std::string>(a, "Condition")});
  }
  return t;
}

}  // namespace

ThreatModelRun run_from_json(const json& j) {
  ThreatModelRun run;
  run.profile = profile_from_json(need(j, "profile"));
  for (const auto& e : need(j, "threat_model")) run.threats.push_back(threat_from_json(e));
  run.improvement_suggestions = need_as<std::vector<std::string>>(j, "improvement_suggestions");
  for (const auto& m : need(j, "mitre_mappings")) run.mappings.push_back(mapping_from_json(m));

  if (const json& d = need(j, "dread"); !d.is_null()) {
    std::vector<std::optional<DreadScore>> scores;
    for (const auto& e : need(d, "Risk Assessment")) {
      if (e.value("unmatched", false)) {
        scores.emplace_back(std::nullopt);
        continue;
      }
      scores.emplace_back(std::in_place, need_as<int>(e, "Damage Potential"), need_as<int>(e, "Reproducibility"),
                          need_as<int>(e, "Exploitability"), need_as<int>(e, "Affected Users"),
                          need_as<int>(e, "Discoverability"));
    }
    run.dread = std::move(scores);
  }
  if (const json& m = need(j, "mitigations"); !m.is_null()) {
    MitigationSet set;
    set.raw_markdown = need_as<std::string>(m, "raw_markdown");
    for (const auto& e : need(m, "entries")) {
      set.entries.push_back({need_as<std::string>(e, "Threat Type"), need_as<std::string>(e, "Scenario"),
                             need_as<std::string>(e, "Suggested Mitigation(s)")});
    }
    run.mitigations = std::move(set);
  }
  if (const json& t = need(j, "test_cases"); !t.is_null()) {
    GherkinSuiteList list;
    for (const auto& s : t)
      list.suites.push_back({need_as<std::string>(s, "title"), need_as<std::string>(s, "gherkin")});
    run.test_cases = std::move(list);
  }
  if (const json& a = need(j, "attack_tree"); !a.is_null())
    run.attack_tree = AttackTree{need_as<std::string>(a, "mermaid")};

  const json& md = need(j, "metadata");
  run.metadata.timestamp = need_as<std::string>(md, "timestamp");
  run.metadata.model_id = need_as<std::string>(md, "model_id");
  run.metadata.run_index = md.value("run_index", 0);
  run.metadata.temperature = md.value("temperature", 0.7);
  run.metadata.retries = md.value("retries", 0);
  run.metadata.warnings = md.value("warnings", std::vector<std::string>{});
  return run;
}

std::string threats_prompt_text(const std::vector<ThreatScenario>& threats) {
  return json(threats).dump(2);
}

std::string mappings_prompt_text(const std::vector<ThreatScenario>& threats,
                                 const std::vector<MitreMapping>& mappings) {
  json out = json::array();
  for (std::size_t i = 0; i < threats.size() && i < mappings.size(); ++i) {
    const auto& m = mappings[i];
    out.push_back({{"Threat Type", to_string(threats[i].threat_type)},
                   {"Scenario", threats[i].scenario},
                   {"MITRE ATT&CK Technique",
                    {{"name", m.name}, {"technique_id", m.technique_id}, {"url", m.url},
                     {"attack_pattern_id", m.stix_id}}}});
  }
  return out.dump(2);
}

}  // namespace aegis
