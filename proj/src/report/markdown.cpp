#include <cctype>
#include <sstream>

#include "aegis/report/report.hpp"
#include "aegis/util.hpp"

namespace aegis::report {

namespace {

std::string anchor(std::string_view heading) {
  std::string out;
  for (unsigned char c : heading) {
    if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
    else if (c == ' ' || c == '-') out.push_back('-');
  }
  return out;
}

std::string or_text(const std::vector<std::string>& items, std::string_view empty) {
  return items.empty() ? std::string(empty) : util::join(items, ", ");
}

void heading(std::ostringstream& md, std::string_view h) { md << "## " << h << "\n\n"; }

void application_description(std::ostringstream& md, const ApplicationProfile& p) {
  std::vector<std::string> techs;
  for (const auto& t : p.technologies)
    techs.push_back(t.version_pattern.empty() ? t.name : t.name + " " + t.version_pattern);
  md << "- **Application Type:** " << p.app_type << "\n"
     << "- **Industry Sector:** " << p.industry_sector << "\n"
     << "- **Sensitive Data:** " << to_string(p.data_sensitivity) << "\n"
     << "- **Internet Facing:** " << (p.internet_facing ? "Yes" : "No") << "\n"
     << "- **Number of Employees:** " << to_string(p.employee_range) << "\n"
     << "- **Compliance Requirements:** " << or_text(p.compliance, "None") << "\n"
     << "- **Technical Ability:** " << to_string(p.technical_ability) << "\n"
     << "- **Authentication Method:** " << or_text(p.auth_methods, "N/A") << "\n"
     << "- **Selected Technologies:** " << or_text(techs, "None") << "\n\n"
     << util::trim(p.description) << "\n\n";
}

void stride_table(std::ostringstream& md, const std::vector<ThreatScenario>& threats) {
  md << "| Threat Type | Scenario | Assumptions | Potential Impact |\n"
     << "|---|---|---|---|\n";
  for (const auto& t : threats) {
    std::vector<std::string> assumptions;
    for (const auto& a : t.assumptions)
      assumptions.push_back(a.assumption + " (Role: " + a.role + ", Condition: " + a.condition + ")");
    md << "| " << to_string(t.threat_type) << " | " << table_cell(t.scenario) << " | "
       << table_cell(util::join(assumptions, " ")) << " | " << table_cell(t.potential_impact)
       << " |\n";
  }
  md << "\n";
}

void mitre_section(std::ostringstream& md, const ThreatModelRun& run) {
  for (std::size_t i = 0; i < run.threats.size(); ++i) {
    const auto& t = run.threats[i];
    const MitreMapping m = i < run.mappings.size() ? run.mappings[i] : MitreMapping{};
    md << "**Threat:** " << to_string(t.threat_type) << "\n\n"
       << "**Scenario:** " << util::trim(t.scenario) << "\n\n"
       << "**Potential Impact:** " << util::trim(t.potential_impact) << "\n\n"
       << "**MITRE ATT&CK Techniques**\n\n"
       << "Name: " << m.name << "\n\n"
       << "- **URL:** <" << m.url << ">\n"
       << "- **Technique ID:** " << m.technique_id << "\n"
       << "- **Attack Pattern ID:** " << m.stix_id << "\n\n"
       << "---\n\n";
  }
}

void mitigations_section(std::ostringstream& md, const std::optional<MitigationSet>& set) {
  if (!set) {
    md << kNotGenerated << "\n\n";
    return;
  }
  if (set->entries.empty()) {
    md << util::trim(set->raw_markdown) << "\n\n";
    return;
  }
  md << "| Threat Type | Scenario | Suggested Mitigation(s) |\n|---|---|---|\n";
  for (const auto& e : set->entries)
    md << "| " << table_cell(e.threat_type) << " | " << table_cell(e.scenario) << " | "
       << table_cell(e.mitigation) << " |\n";
  md << "\n";
}

void dread_section(std::ostringstream& md, const ThreatModelRun& run) {
  if (!run.dread) {
    md << kNotGenerated << "\n\n";
    return;
  }
  md << "| Threat Type | Scenario | Damage Potential | Reproducibility | Exploitability | "
        "Affected Users | Discoverability | Risk Score |\n"
     << "|---|---|---|---|---|---|---|---|\n";
  for (std::size_t i = 0; i < run.threats.size(); ++i) {
    const auto& t = run.threats[i];
    md << "| " << to_string(t.threat_type) << " | " << table_cell(t.scenario) << " | ";
    const auto* slot = i < run.dread->size() ? &(*run.dread)[i] : nullptr;
    if (slot && *slot) {
      const DreadScore& s = **slot;
      md << s.damage() << " | " << s.reproducibility() << " | " << s.exploitability() << " | "
         << s.affected_users() << " | " << s.discoverability() << " | " << s.risk_text() << " |\n";
    } else {
      md << "- | - | - | - | - | not scored |\n";
    }
  }
  md << "\n";
}

void attack_tree_section(std::ostringstream& md, const std::optional<AttackTree>& tree) {
  if (!tree) {
    md << kNotGenerated << "\n\n";
    return;
  }
  md << "Attack Tree diagram instructions: Copy the below code and paste it into "
        "<https://mermaid.live/>\n\n"
     << "```mermaid\n"
     << util::trim(tree->mermaid_source) << "\n```\n\n";
}

void test_cases_section(std::ostringstream& md, const std::optional<GherkinSuiteList>& tests) {
  if (!tests) {
    md << kNotGenerated << "\n\n";
    return;
  }
  md << "For the history of Behavior Driven Development (BDD) and Gherkin syntax, see: "
        "<https://cucumber.io/docs/bdd/history/>\n\n";
  for (const auto& s : tests->suites) {
    md << "**Test Case:** " << s.title << "\n\n"
       << "```gherkin\n"
       << util::trim(s.gherkin_source) << "\n```\n\n";
  }
}

}  // namespace

std::string table_cell(std::string_view text) {
  std::string out;
  for (char c : util::trim(text)) {
    if (c == '|') out += "\\|";
    else if (c == '\n') out.push_back(' ');
    else if (c != '\r') out.push_back(c);
  }
  return out;
}

std::string render_markdown(const ThreatModelRun& run) {
  std::ostringstream md;
  md << "# " << kReportTitle << "\n\n";
  md << "## Table of Contents\n\n";
  for (auto h : kSectionHeadings) md << "- [" << h << "](#" << anchor(h) << ")\n";
  md << "\n";

  heading(md, kSectionHeadings[0]);
  application_description(md, run.profile);

  heading(md, kSectionHeadings[1]);
  if (run.improvement_suggestions.empty()) md << "None.\n\n";
  for (const auto& s : run.improvement_suggestions) md << "- " << util::trim(s) << "\n";
  if (!run.improvement_suggestions.empty()) md << "\n";

  heading(md, kSectionHeadings[2]);
  stride_table(md, run.threats);

  heading(md, kSectionHeadings[3]);
  mitre_section(md, run);

  heading(md, kSectionHeadings[4]);
  mitigations_section(md, run.mitigations);

  heading(md, kSectionHeadings[5]);
  dread_section(md, run);

  heading(md, kSectionHeadings[6]);
  attack_tree_section(md, run.attack_tree);

  heading(md, kSectionHeadings[7]);
  test_cases_section(md, run.test_cases);
  return md.str();
}

}  // namespace aegis::report
