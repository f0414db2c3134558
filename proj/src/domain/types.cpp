#include "aegis/domain/types.hpp"

#include <cctype>

#include "aegis/domain/validate.hpp"
#include "aegis/error.hpp"
#include "aegis/util.hpp"

namespace aegis {
namespace {

std::string squash(std::string_view s) {
  std::string out;
  for (unsigned char c : s) {
    if (c == ' ' || c == '_' || c == '-' || c == '\t') continue;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

template <typename Enum, std::size_t N>
std::optional<Enum> parse_label(std::string_view s, const std::array<Enum, N>& values) {
  std::string t = util::trim(s);
  for (Enum v : values) {
    if (util::iequals(t, to_string(v))) return v;
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(StrideCategory c) noexcept {
  switch (c) {
    case StrideCategory::Spoofing: return "Spoofing";
    case StrideCategory::Tampering: return "Tampering";
    case StrideCategory::Repudiation: return "Repudiation";
    case StrideCategory::InformationDisclosure: return "Information Disclosure";
    case StrideCategory::DenialOfService: return "Denial of Service";
    case StrideCategory::ElevationOfPrivilege: return "Elevation of Privilege";
  }
  return "Spoofing";
}

std::optional<StrideCategory> parse_stride(std::string_view text) {
  const std::string key = squash(text);
  for (StrideCategory c : kStrideCategories) {
    if (squash(to_string(c)) == key) return c;
  }
  return std::nullopt;
}

std::size_t stride_index(StrideCategory c) noexcept { return static_cast<std::size_t>(c); }

std::string_view to_string(DataSensitivity v) noexcept {
  switch (v) {
    case DataSensitivity::None: return "None";
    case DataSensitivity::Low: return "Low";
    case DataSensitivity::Medium: return "Medium";
    case DataSensitivity::High: return "High";
  }
  return "None";
}

std::string_view to_string(EmployeeRange v) noexcept {
  switch (v) {
    case EmployeeRange::Unknown: return "Unknown";
    case EmployeeRange::From0To10: return "0-10";
    case EmployeeRange::From11To100: return "11-100";
    case EmployeeRange::From101To1000: return "101-1000";
    case EmployeeRange::Over1000: return "Over 1000";
  }
  return "Unknown";
}

std::string_view to_string(TechnicalAbility v) noexcept {
  switch (v) {
    case TechnicalAbility::Low: return "Low";
    case TechnicalAbility::Medium: return "Medium";
    case TechnicalAbility::High: return "High";
  }
  return "Medium";
}

std::string_view to_string(TechnologyCategory v) noexcept {
  switch (v) {
    case TechnologyCategory::Database: return "Database";
    case TechnologyCategory::OperatingSystem: return "OperatingSystem";
    case TechnologyCategory::Language: return "Language";
    case TechnologyCategory::WebFramework: return "WebFramework";
  }
  return "Database";
}

std::optional<DataSensitivity> parse_data_sensitivity(std::string_view s) {
  return parse_label(s, std::array{DataSensitivity::None, DataSensitivity::Low,
                                   DataSensitivity::Medium, DataSensitivity::High});
}

std::optional<EmployeeRange> parse_employee_range(std::string_view s) {
  return parse_label(s, std::array{EmployeeRange::Unknown, EmployeeRange::From0To10,
                                   EmployeeRange::From11To100, EmployeeRange::From101To1000,
                                   EmployeeRange::Over1000});
}

std::optional<TechnicalAbility> parse_technical_ability(std::string_view s) {
  return parse_label(s, std::array{TechnicalAbility::Low, TechnicalAbility::Medium,
                                   TechnicalAbility::High});
}

std::optional<TechnologyCategory> parse_technology_category(std::string_view s) {
  return parse_label(s, std::array{TechnologyCategory::Database,
                                   TechnologyCategory::OperatingSystem,
                                   TechnologyCategory::Language,
                                   TechnologyCategory::WebFramework});
}

bool is_mapped(std::string_view stix_id, std::string_view technique_id) noexcept {
  return stix_id != kSentinelPatternId && technique_id != kUnmappedTechniqueId;
}

DreadScore::DreadScore(int damage, int reproducibility, int exploitability,
                       int affected_users, int discoverability)
    : dims_{damage, reproducibility, exploitability, affected_users, discoverability},
      risk_hundredths_(risk_score_hundredths(damage, reproducibility, exploitability,
                                             affected_users, discoverability)) {}

std::string DreadScore::risk_text() const {
  return std::to_string(risk_hundredths_ / 100) + "." +
         (risk_hundredths_ % 100 < 10 ? "0" : "") + std::to_string(risk_hundredths_ % 100);
}

void PipelineConfig::validate() const {
  if (threats_per_category < 1 || candidate_cap < 1 || pulse_cap < 1 || cve_cap < 1)
    throw Error(Errc::OutOfRange, "pipeline caps must be >= 1");
  if (!(cvss_cutoff >= 0.0 && cvss_cutoff <= 10.0))
    throw Error(Errc::OutOfRange, "cvss_cutoff must lie in [0,10]");
  if (retries_per_stage < 0 || context_char_budget < 1 || sampling_temperature < 0.0)
    throw Error(Errc::OutOfRange, "retries, budget and temperature must be non-negative");
}

void EvalProtocol::validate() const {
  if (!(similarity_threshold > 0.0 && similarity_threshold <= 1.0))
    throw Error(Errc::OutOfRange, "similarity_threshold must lie in (0,1]");
  if (batches_per_case < 1) throw Error(Errc::OutOfRange, "batches_per_case must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::OutOfRange, "alpha must lie in (0,1)");
  if (!(majority_fraction > 0.0 && majority_fraction < 1.0) ||
      !(mapping_benchmark > 0.0 && mapping_benchmark < 1.0))
    throw Error(Errc::OutOfRange, "fractions must lie in (0,1)");
}

}  // namespace aegis
