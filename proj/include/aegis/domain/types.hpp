#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aegis {

enum class StrideCategory {
  Spoofing,
  Tampering,
  Repudiation,
  InformationDisclosure,
  DenialOfService,
  ElevationOfPrivilege,
};

inline constexpr std::array<StrideCategory, 6> kStrideCategories = {
    StrideCategory::Spoofing,        StrideCategory::Tampering,
    StrideCategory::Repudiation,     StrideCategory::InformationDisclosure,
    StrideCategory::DenialOfService, StrideCategory::ElevationOfPrivilege,
};

/// Display spelling ("Information Disclosure", "Denial of Service", ...).
std::string_view to_string(StrideCategory c) noexcept;

/// Case-insensitive; spaces, underscores and hyphens are ignored, so both
/// "Denial of Service" and "DenialOfService" parse.
std::optional<StrideCategory> parse_stride(std::string_view text);

std::size_t stride_index(StrideCategory c) noexcept;

enum class DataSensitivity { None, Low, Medium, High };
enum class EmployeeRange { Unknown, From0To10, From11To100, From101To1000, Over1000 };
enum class TechnicalAbility { Low, Medium, High };
enum class TechnologyCategory { Database, OperatingSystem, Language, WebFramework };

std::string_view to_string(DataSensitivity v) noexcept;
std::string_view to_string(EmployeeRange v) noexcept;
std::string_view to_string(TechnicalAbility v) noexcept;
std::string_view to_string(TechnologyCategory v) noexcept;

// Exact (case-insensitive) match against the labels above.
std::optional<DataSensitivity> parse_data_sensitivity(std::string_view s);
std::optional<EmployeeRange> parse_employee_range(std::string_view s);
std::optional<TechnicalAbility> parse_technical_ability(std::string_view s);
std::optional<TechnologyCategory> parse_technology_category(std::string_view s);

struct TechnologySelection {
  TechnologyCategory category = TechnologyCategory::Database;
  std::string name;
  std::string version_pattern;  // "8.0.1", "5.8.*" or empty

  bool operator==(const TechnologySelection&) const = default;
};

/// The user's system description plus the questionnaire answers. Callers are
/// responsible for keeping identifying information out of `description`.
struct ApplicationProfile {
  std::string description;
  std::string app_type;
  std::string industry_sector;
  DataSensitivity data_sensitivity = DataSensitivity::Medium;
  bool internet_facing = false;
  EmployeeRange employee_range = EmployeeRange::Unknown;
  std::vector<std::string> compliance;
  std::vector<std::string> auth_methods;
  TechnicalAbility technical_ability = TechnicalAbility::Medium;
  std::vector<TechnologySelection> technologies;

  bool operator==(const ApplicationProfile&) const = default;
};

struct Assumption {
  std::string assumption;
  std::string role;
  std::string condition;

  bool operator==(const Assumption&) const = default;
};

struct ThreatScenario {
  StrideCategory threat_type = StrideCategory::Spoofing;
  std::string scenario;
  std::string potential_impact;
  std::vector<Assumption> assumptions;
  std::vector<std::string> keywords;

  bool operator==(const ThreatScenario&) const = default;
};

inline constexpr std::string_view kSentinelPatternId =
    "attack-pattern--00000000-0000-0000-0000-000000000000";
inline constexpr std::string_view kUnmappedTechniqueId = "N/A";

struct MitreMapping {
  std::string stix_id{kSentinelPatternId};
  std::string technique_id{kUnmappedTechniqueId};
  std::string name = "Unknown";
  std::string url = "https://attack.mitre.org/techniques/N/A/";
  bool mapped = false;
  // Set when the provider answered with an id outside the offered candidates.
  bool hallucinated = false;
  std::string proposed_id;
  std::size_t candidate_count = 0;

  bool operator==(const MitreMapping&) const = default;
};

/// True exactly when the mapping points at a real technique.
bool is_mapped(std::string_view stix_id, std::string_view technique_id) noexcept;

class DreadScore {
 public:
  DreadScore() = default;
  /// Throws Error(OutOfRange) when any dimension is outside [1,10].
  DreadScore(int damage, int reproducibility, int exploitability, int affected_users,
             int discoverability);

  int damage() const noexcept { return dims_[0]; }
  int reproducibility() const noexcept { return dims_[1]; }
  int exploitability() const noexcept { return dims_[2]; }
  int affected_users() const noexcept { return dims_[3]; }
  int discoverability() const noexcept { return dims_[4]; }
  const std::array<int, 5>& dimensions() const noexcept { return dims_; }

  /// Risk score in hundredths (760 == 7.60).
  int risk_hundredths() const noexcept { return risk_hundredths_; }
  double risk_score() const noexcept { return risk_hundredths_ / 100.0; }
  std::string risk_text() const;

  bool operator==(const DreadScore&) const = default;

 private:
  std::array<int, 5> dims_{1, 1, 1, 1, 1};
  int risk_hundredths_ = 100;
};

struct MitigationEntry {
  std::string threat_type;
  std::string scenario;
  std::string mitigation;

  bool operator==(const MitigationEntry&) const = default;
};

struct MitigationSet {
  std::string raw_markdown;
  std::vector<MitigationEntry> entries;

  bool operator==(const MitigationSet&) const = default;
};

struct GherkinSuite {
  std::string title;
  std::string gherkin_source;

  bool operator==(const GherkinSuite&) const = default;
};

struct GherkinSuiteList {
  std::vector<GherkinSuite> suites;

  bool operator==(const GherkinSuiteList&) const = default;
};

struct AttackTree {
  std::string mermaid_source;

  bool operator==(const AttackTree&) const = default;
};

struct RunMetadata {
  std::string timestamp;
  std::string model_id;
  int run_index = 0;
  double temperature = 0.7;
  int retries = 0;
  std::vector<std::string> warnings;

  bool operator==(const RunMetadata&) const = default;
};

struct ThreatModelRun {
  ApplicationProfile profile;
  std::vector<ThreatScenario> threats;
  std::vector<std::string> improvement_suggestions;
  std::vector<MitreMapping> mappings;
  // One slot per threat, in threat order; nullopt marks a threat the
  // assessment left unscored.
  std::optional<std::vector<std::optional<DreadScore>>> dread;
  std::optional<MitigationSet> mitigations;
  std::optional<GherkinSuiteList> test_cases;
  std::optional<AttackTree> attack_tree;
  RunMetadata metadata;

  bool operator==(const ThreatModelRun&) const = default;
};

struct PipelineConfig {
  int threats_per_category = 3;
  int candidate_cap = 25;
  int pulse_cap = 5;
  int cve_cap = 10;
  double cvss_cutoff = 7.0;
  int retries_per_stage = 2;
  int context_char_budget = 12000;
  double sampling_temperature = 0.7;
  int max_output_tokens = 8192;

  /// Throws Error(OutOfRange) on a cap below 1 or a cutoff outside [0,10].
  void validate() const;
};

struct EvalProtocol {
  double similarity_threshold = 0.7;
  double majority_fraction = 0.5;
  int batches_per_case = 30;
  double mapping_benchmark = 0.80;
  double alpha = 0.05;

  void validate() const;
};

struct RubricRecord {
  std::string case_id;
  std::array<int, 9> criteria{};
  int threat_count = 1;
};

struct ExpertThreat {
  std::string case_id;
  StrideCategory threat_type = StrideCategory::Spoofing;
  std::string text;
};

}  // namespace aegis
