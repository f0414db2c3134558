#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "aegis/domain/types.hpp"
#include "aegis/eval/embedding.hpp"
#include "aegis/eval/stats.hpp"

namespace aegis::eval {

struct SimilarityRecord {
  std::string case_id;
  int batch_index = 0;          // 1-based
  int tool_threat_index = 0;    // 0-based within the run
  int expert_threat_index = 0;  // 0-based within the case's expert threats
  StrideCategory category = StrideCategory::Spoofing;
  double score = 0;
};

struct BatchVerdict {
  std::string case_id;
  int batch_index = 0;
  bool success = false;
  std::optional<double> best_score;  // absent when the batch had no comparable pair
};

struct CaseVerdict {
  std::string case_id;
  std::int64_t successes = 0;
  std::int64_t total_batches = 0;
  double sample_p = 0;
  double lower_bound_95 = 0;
  double p_value = 1;
  bool passes = false;
};

struct SimilarityReport {
  std::vector<SimilarityRecord> records;
  std::vector<BatchVerdict> batches;
  CaseVerdict verdict;
};

/// Scores tool threat scenarios against the case's expert threats, pairing
/// only threats of the same STRIDE category. A batch succeeds when any score
/// reaches protocol.similarity_threshold (>=). The verdict tests successes
/// against protocol.majority_fraction with one_proportion (greater).
/// Expert threats of other cases are ignored. Throws Error(NoComparablePairs).
SimilarityReport similarity_analysis(const std::string& case_id,
                                     const std::vector<ThreatModelRun>& runs,
                                     const std::vector<ExpertThreat>& expert,
                                     const EvalProtocol& protocol, Embedder& embedder);

/// Verdict from batch outcomes alone.
CaseVerdict case_verdict(const std::string& case_id, std::int64_t successes,
                         std::int64_t total_batches, const EvalProtocol& protocol);

struct CategoryMapping {
  std::int64_t total = 0;
  std::int64_t mapped = 0;
  double rate = 0;
};

struct MappingStats {
  std::int64_t total = 0;
  std::int64_t mapped = 0;
  double rate = 0;  // mapped / total, 0 for an empty archive
  std::array<CategoryMapping, 6> per_category{};  // stride_index order
  std::int64_t hallucination_count = 0;
};

/// Counts mappings that point at a real technique (is_mapped). Threats
/// without a mapping slot count as unmapped.
MappingStats mapping_stats(const std::vector<ThreatModelRun>& runs);

}  // namespace aegis::eval
