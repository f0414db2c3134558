#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aegis/domain/types.hpp"
#include "aegis/eval/similarity.hpp"

namespace aegis::eval {

/// Rubric criteria in column order crit1..crit9.
inline constexpr std::array<std::string_view, 9> kRubricCriteria = {
    "Application/System Description or DFD",
    "Application Type",
    "Industry Sector",
    "Data Sensitivity",
    "Internet-facing Status",
    "Compliance Requirements",
    "Authentication Methods",
    "Technical Details",
    "Threat Details",
};

/// RFC 4180 rows: quoted fields may hold commas, quotes ("") and newlines.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);
std::string csv_field(std::string_view value);

/// JSON array of {case_id, threat_type, text}. Throws Error(IoError |
/// MissingKey | InvalidEnum | EmptyText).
std::vector<ExpertThreat> load_expert_corpus(const std::string& path);
std::vector<ExpertThreat> expert_corpus_from_json(const nlohmann::json& doc);

/// Header case_id,crit1..crit9,threat_count. Criteria must lie in [1,5] and
/// threat_count >= 1. Throws Error(IoError | MissingKey | OutOfRange).
std::vector<RubricRecord> load_rubric_csv(const std::string& path);
std::vector<RubricRecord> rubric_from_csv(std::string_view text);

/// Columns case_id,batch_index,tool_threat_index,expert_threat_index,category,score.
std::string similarity_csv(const std::vector<SimilarityRecord>& records);
std::vector<SimilarityRecord> similarity_from_csv(std::string_view text);

nlohmann::json report_json(const SimilarityReport& report);
nlohmann::json mapping_stats_json(const MappingStats& stats);

struct CorrelationRow {
  std::string metric;
  std::optional<double> r;  // absent when either column is constant
};

/// Threat level: every record's score against its case's rubric values.
/// Case level: each case's mean score against its rubric values, plus the
/// total rubric score. Records whose case has no rubric row are skipped.
/// Rows: "Score" (always 1), the nine criteria, then "Threat Count"; the
/// case level inserts "Total Rubric Score" after "Score".
std::vector<CorrelationRow> correlate_threat_level(const std::vector<SimilarityRecord>& records,
                                                   const std::vector<RubricRecord>& rubric);
std::vector<CorrelationRow> correlate_case_level(const std::vector<SimilarityRecord>& records,
                                                 const std::vector<RubricRecord>& rubric);

}  // namespace aegis::eval
