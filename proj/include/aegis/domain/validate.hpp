#pragma once

#include <map>
#include <string>
#include <vector>

#include "aegis/domain/types.hpp"
#include "aegis/error.hpp"
#include "json.hpp"

namespace aegis {

struct FieldError {
  std::string field;
  Errc kind;
  std::string message;
};

struct ProfileResult {
  std::optional<ApplicationProfile> profile;
  std::vector<FieldError> errors;

  bool ok() const noexcept { return errors.empty(); }
};

/// Checks the invariants of an already-typed profile. Empty result means OK.
std::vector<FieldError> validate_profile(const ApplicationProfile& profile);

/// Parses a profile document and reports every field-addressed problem at
/// once (bad enum labels, empty description, malformed version patterns).
ProfileResult validate_profile(const nlohmann::json& doc);

bool is_valid_version_pattern(std::string_view pattern);

/// risk = mean of the five dimensions, rounded half-up to 2 decimals.
/// Returned in hundredths. Throws Error(OutOfRange).
int risk_score_hundredths(int damage, int reproducibility, int exploitability,
                          int affected_users, int discoverability);

struct ThreatDocument {
  std::vector<ThreatScenario> threats;
  std::vector<std::string> improvement_suggestions;
  std::vector<std::string> warnings;
};

class ThreatCountError : public Error {
 public:
  ThreatCountError(std::map<StrideCategory, int> counts, const std::string& message)
      : Error(Errc::WrongThreatCount, message), counts_(std::move(counts)) {}
  const std::map<StrideCategory, int>& counts() const noexcept { return counts_; }

 private:
  std::map<StrideCategory, int> counts_;
};

/// Validates a provider threat-model document: both top-level keys present,
/// every entry well formed, exactly `per_category` threats per STRIDE category.
/// Technique and STIX ids are stripped from keywords with a warning.
/// Throws Error(MissingKey | NestedImpact | UnknownCategory) or ThreatCountError.
ThreatDocument validate_threat_model_doc(const nlohmann::json& doc, int per_category = 3);

/// Removes technique ids (T1234, T1234.001) and STIX ids from each keyword;
/// keywords left empty are dropped. Returns true when anything was removed.
bool sanitize_keywords(std::vector<std::string>& keywords);

}  // namespace aegis
