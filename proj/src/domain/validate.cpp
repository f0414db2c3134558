#include "aegis/domain/validate.hpp"

#include <regex>

#include "aegis/util.hpp"

namespace aegis {

using nlohmann::json;

bool is_valid_version_pattern(std::string_view pattern) {
  if (pattern.empty()) return true;
  static const std::regex re(R"(\d+(\.\d+)*(\.\*)?)");
  return std::regex_match(pattern.begin(), pattern.end(), re);
}

std::vector<FieldError> validate_profile(const ApplicationProfile& profile) {
  std::vector<FieldError> errors;
  if (util::trim(profile.description).empty())
    errors.push_back({"description", Errc::EmptyDescription, "description must not be empty"});
  for (std::size_t i = 0; i < profile.technologies.size(); ++i) {
    const auto& t = profile.technologies[i];
    if (!is_valid_version_pattern(t.version_pattern))
      errors.push_back({"technologies[" + std::to_string(i) + "].version", Errc::BadVersionPattern,
                        "'" + t.version_pattern + "' is not digits(.digits)*(.*)?"});
  }
  return errors;
}

namespace {

template <typename Parse>
auto read_enum(const json& doc, const char* key, Parse parse, std::vector<FieldError>& errors,
               decltype(parse(std::string_view{})) fallback) {
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return fallback;
  if (!it->is_string()) {
    errors.push_back({key, Errc::InvalidEnum, "expected a string label"});
    return fallback;
  }
  auto parsed = parse(it->get<std::string>());
  if (!parsed) {
    errors.push_back({key, Errc::InvalidEnum, "'" + it->get<std::string>() + "' is not an allowed value"});
    return fallback;
  }
  return parsed;
}

std::vector<std::string> read_string_list(const json& doc, const char* key,
                                          std::vector<FieldError>& errors) {
  std::vector<std::string> out;
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return out;
  if (!it->is_array()) {
    errors.push_back({key, Errc::InvalidEnum, "expected a list of labels"});
    return out;
  }
  for (const auto& v : *it) {
    if (v.is_string()) out.push_back(v.get<std::string>());
    else errors.push_back({key, Errc::InvalidEnum, "non-string label"});
  }
  return out;
}

}  // namespace

ProfileResult validate_profile(const json& doc) {
  ProfileResult result;
  if (!doc.is_object()) {
    result.errors.push_back({"", Errc::MissingKey, "profile must be a JSON object"});
    return result;
  }
  ApplicationProfile p;
  auto& errors = result.errors;

  p.description = doc.value("description", std::string{});
  p.app_type = doc.value("app_type", std::string{});
  p.industry_sector = doc.value("industry_sector", std::string{});

  p.data_sensitivity = *read_enum(doc, "data_sensitivity", parse_data_sensitivity, errors,
                                  std::optional{DataSensitivity::Medium});
  p.employee_range = *read_enum(doc, "employee_range", parse_employee_range, errors,
                                std::optional{EmployeeRange::Unknown});
  p.technical_ability = *read_enum(doc, "technical_ability", parse_technical_ability, errors,
                                   std::optional{TechnicalAbility::Medium});

  if (auto it = doc.find("internet_facing"); it != doc.end() && !it->is_null()) {
    if (it->is_boolean()) {
      p.internet_facing = it->get<bool>();
    } else if (it->is_string() && (util::iequals(it->get<std::string>(), "yes") ||
                                   util::iequals(it->get<std::string>(), "no"))) {
      p.internet_facing = util::iequals(it->get<std::string>(), "yes");
    } else {
      errors.push_back({"internet_facing", Errc::InvalidEnum, "expected true/false or Yes/No"});
    }
  }

  p.compliance = read_string_list(doc, "compliance", errors);
  p.auth_methods = read_string_list(doc, "auth_methods", errors);

  if (auto it = doc.find("technologies"); it != doc.end() && it->is_array()) {
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& t = (*it)[i];
      const std::string field = "technologies[" + std::to_string(i) + "]";
      if (!t.is_object()) {
        errors.push_back({field, Errc::InvalidEnum, "expected an object"});
        continue;
      }
      TechnologySelection sel;
      auto cat = parse_technology_category(t.value("category", std::string{}));
      if (!cat) {
        errors.push_back({field + ".category", Errc::InvalidEnum,
                          "'" + t.value("category", std::string{}) + "' is not a technology category"});
      } else {
        sel.category = *cat;
      }
      sel.name = t.value("name", std::string{});
      sel.version_pattern = t.value("version", std::string{});
      p.technologies.push_back(std::move(sel));
    }
  }

  auto invariant_errors = validate_profile(p);
  errors.insert(errors.end(), invariant_errors.begin(), invariant_errors.end());
  if (errors.empty()) result.profile = std::move(p);
  return result;
}

int risk_score_hundredths(int damage, int reproducibility, int exploitability,
                          int affected_users, int discoverability) {
  const int dims[] = {damage, reproducibility, exploitability, affected_users, discoverability};
  int sum = 0;
  for (int d : dims) {
    if (d < 1 || d > 10)
      throw Error(Errc::OutOfRange, "DREAD dimension " + std::to_string(d) + " outside [1,10]");
    sum += d;
  }
  // mean * 100 rounded half-up: floor((200*sum + 5) / 10) for a 5-way mean
  const int scaled = sum * 100;
  return (2 * scaled + 5) / 10;
}

bool sanitize_keywords(std::vector<std::string>& keywords) {
  static const std::regex forbidden(
      R"((attack-pattern|x-mitre-[a-z-]+|course-of-action|intrusion-set|malware|tool)--[0-9a-fA-F-]{36}|\bT\d{4}(\.\d{3})?\b)");
  bool changed = false;
  std::vector<std::string> kept;
  for (const auto& kw : keywords) {
    std::string cleaned = std::regex_replace(kw, forbidden, "");
    if (cleaned != kw) changed = true;
    // collapse separators left behind ("Adversary-in-the-Middle ()" etc.)
    cleaned = std::regex_replace(cleaned, std::regex(R"(\(\s*\)|\[\s*\])"), "");
    cleaned = std::regex_replace(cleaned, std::regex(R"(\s{2,})"), " ");
    cleaned = util::trim(cleaned);
    while (!cleaned.empty() && (cleaned.back() == ':' || cleaned.back() == '-' || cleaned.back() == ','))
      cleaned = util::trim(cleaned.substr(0, cleaned.size() - 1));
    if (cleaned.empty()) {
      changed = true;
      continue;
    }
    kept.push_back(std::move(cleaned));
  }
  keywords = std::move(kept);
  return changed;
}

namespace {

const json& require(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) throw Error(Errc::MissingKey, path + "." + key);
  return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_string()) throw Error(Errc::SchemaViolation, path + "." + key + " must be a string");
  return v.get<std::string>();
}

}  // namespace

ThreatDocument validate_threat_model_doc(const json& doc, int per_category) {
  if (!doc.is_object()) throw Error(Errc::MissingKey, "$.threat_model (document is not an object)");
  const json& model = require(doc, "threat_model", "$");
  const json& suggestions = require(doc, "improvement_suggestions", "$");
  if (!model.is_array()) throw Error(Errc::SchemaViolation, "$.threat_model must be an array");
  if (!suggestions.is_array())
    throw Error(Errc::SchemaViolation, "$.improvement_suggestions must be an array");

  ThreatDocument out;
  for (std::size_t i = 0; i < model.size(); ++i) {
    const json& e = model[i];
    const std::string path = "$.threat_model[" + std::to_string(i) + "]";
    if (!e.is_object()) throw Error(Errc::SchemaViolation, path + " must be an object");

    ThreatScenario t;
    const std::string type = require_string(e, "Threat Type", path);
    auto cat = parse_stride(type);
    if (!cat) throw Error(Errc::UnknownCategory, path + ": '" + type + "'");
    t.threat_type = *cat;
    t.scenario = require_string(e, "Scenario", path);

    const json& impact = require(e, "Potential Impact", path);
    if (impact.is_object() || impact.is_array())
      throw Error(Errc::NestedImpact, path + ".Potential Impact must be a flat string");
    if (!impact.is_string())
      throw Error(Errc::SchemaViolation, path + ".Potential Impact must be a string");
    t.potential_impact = impact.get<std::string>();

    const json& kws = require(e, "MITRE ATT&CK Keywords", path);
    if (!kws.is_array())
      throw Error(Errc::SchemaViolation, path + ".MITRE ATT&CK Keywords must be an array");
    for (const auto& k : kws) {
      if (k.is_string()) t.keywords.push_back(k.get<std::string>());
    }
    if (sanitize_keywords(t.keywords))
      out.warnings.push_back("stripped technique/STIX ids from keywords of " + path);

    if (auto it = e.find("Assumptions"); it != e.end() && it->is_array()) {
      for (const auto& a : *it) {
        if (!a.is_object()) continue;
        Assumption as{a.value("Assumption", std::string{}), a.value("Role", std::string{}),
                      a.value("Condition", std::string{})};
        if (as.assumption.empty() || as.role.empty() || as.condition.empty()) {
          out.warnings.push_back("dropped incomplete assumption in " + path);
          continue;
        }
        t.assumptions.push_back(std::move(as));
      }
    } else {
      out.warnings.push_back("no assumptions listed for " + path);
    }
    out.threats.push_back(std::move(t));
  }

  for (const auto& s : suggestions) {
    if (s.is_string()) out.improvement_suggestions.push_back(s.get<std::string>());
  }

  std::map<StrideCategory, int> counts;
  for (auto c : kStrideCategories) counts[c] = 0;
  for (const auto& t : out.threats) ++counts[t.threat_type];
  bool ok = true;
  std::string summary;
  for (auto c : kStrideCategories) {
    if (counts[c] != per_category) ok = false;
    if (!summary.empty()) summary += ", ";
    summary += std::string(to_string(c)) + "=" + std::to_string(counts[c]);
  }
  if (!ok) {
    throw ThreatCountError(counts, "expected " + std::to_string(per_category) +
                                       " per category, got " + summary);
  }
  return out;
}

}  // namespace aegis
