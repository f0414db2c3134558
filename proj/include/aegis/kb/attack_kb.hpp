#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace aegis::kb {

enum class Dataset { Enterprise, Mobile, ICS };

std::string_view to_string(Dataset d) noexcept;
std::optional<Dataset> parse_dataset(std::string_view s);

struct AttackPattern {
  std::string stix_id;
  std::string technique_id;  // T1557 or T1566.001
  std::string name;
  std::string description;
  std::string url;
  Dataset dataset = Dataset::Enterprise;

  bool operator==(const AttackPattern&) const = default;
};

/// Placeholder returned for the sentinel id: name "Unknown", technique "N/A".
AttackPattern unknown_pattern();

bool is_well_formed_pattern_id(std::string_view stix_id);

/// Immutable catalogue of ATT&CK attack-patterns, built once from STIX 2.1
/// bundles. Revoked and deprecated objects are never admitted. All const
/// members are safe to call concurrently.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;

  /// Each path is a STIX bundle for one dataset. The dataset comes from each
  /// object's x_mitre_domains, falling back to the file name
  /// (enterprise-attack / mobile-attack / ics-attack).
  /// Throws Error(FileMissing | MalformedBundle).
  static KnowledgeBase load_bundles(std::span<const std::filesystem::path> paths);

  /// Adds one parsed bundle. `fallback` is used for objects without domains.
  void add_bundle(const nlohmann::json& bundle, Dataset fallback);

  /// Case-insensitive substring match of each keyword against name and
  /// description. Ranked by distinct keywords matched, then total occurrences
  /// (both descending), then technique id. Deduplicated by technique id and
  /// truncated to `cap`.
  std::vector<AttackPattern> keyword_search(const std::set<Dataset>& datasets,
                                            std::span<const std::string> keywords,
                                            std::size_t cap) const;

  /// Sentinel id -> unknown_pattern(). Throws Error(InvalidId) for malformed
  /// ids and Error(NotFound) for ids absent from the catalogue.
  AttackPattern resolve(std::string_view stix_id) const;

  bool contains(std::string_view stix_id) const;
  std::size_t size() const noexcept { return patterns_.size(); }
  std::size_t dataset_size(Dataset d) const;

 private:
  struct Entry {
    AttackPattern pattern;
    std::string haystack;  // lowercase name + "\n" + description
  };

  std::vector<Entry> patterns_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::map<Dataset, std::vector<std::size_t>> members_;
};

/// Application-type -> dataset rules. A rule fires when any of its tokens
/// appears among the lowercase alphanumeric tokens of the app type; the first
/// firing rule wins and an empty match falls back to {Enterprise}.
class DatasetRules {
 public:
  struct Rule {
    std::vector<std::string> tokens;
    std::set<Dataset> datasets;
  };

  static DatasetRules defaults();
  /// [{"match": ["mobile", "android"], "datasets": ["Mobile"]}, ...]
  static DatasetRules from_json(const nlohmann::json& j);
  static DatasetRules from_file(const std::filesystem::path& path);

  std::set<Dataset> select(std::string_view app_type) const;
  const std::vector<Rule>& rules() const noexcept { return rules_; }

 private:
  std::vector<Rule> rules_;
};

std::set<Dataset> select_datasets(std::string_view app_type,
                                  const DatasetRules& rules = DatasetRules::defaults());

}  // namespace aegis::kb
