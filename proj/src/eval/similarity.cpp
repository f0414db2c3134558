#include "aegis/eval/similarity.hpp"

#include <algorithm>
#include <map>

#include "aegis/error.hpp"

namespace aegis::eval {

CaseVerdict case_verdict(const std::string& case_id, std::int64_t successes,
                         std::int64_t total_batches, const EvalProtocol& protocol) {
  protocol.validate();
  const auto test = one_proportion(successes, total_batches, protocol.majority_fraction,
                                   Alternative::Greater, protocol.alpha);
  CaseVerdict v;
  v.case_id = case_id;
  v.successes = successes;
  v.total_batches = total_batches;
  v.sample_p = test.sample_p;
  v.lower_bound_95 = test.lower_bound;
  v.p_value = test.p_value;
  v.passes = v.sample_p > protocol.majority_fraction && v.p_value < protocol.alpha;
  return v;
}

SimilarityReport similarity_analysis(const std::string& case_id,
                                     const std::vector<ThreatModelRun>& runs,
                                     const std::vector<ExpertThreat>& expert,
                                     const EvalProtocol& protocol, Embedder& embedder) {
  protocol.validate();
  std::vector<const ExpertThreat*> experts;
  for (const auto& e : expert)
    if (e.case_id == case_id) experts.push_back(&e);

  // Embed every distinct text once.
  std::vector<std::string> texts;
  std::map<std::string, std::size_t> index;
  auto intern = [&](const std::string& t) {
    auto [it, inserted] = index.emplace(t, texts.size());
    if (inserted) texts.push_back(t);
    return it->second;
  };
  std::vector<std::size_t> expert_vec;
  for (const auto* e : experts) expert_vec.push_back(intern(e->text));
  std::vector<std::vector<std::size_t>> tool_vec(runs.size());
  for (std::size_t b = 0; b < runs.size(); ++b)
    for (const auto& t : runs[b].threats) tool_vec[b].push_back(intern(t.scenario));

  bool any_pair = false;
  for (const auto& run : runs)
    for (const auto& t : run.threats)
      for (const auto* e : experts) any_pair = any_pair || e->threat_type == t.threat_type;
  if (!any_pair)
    throw Error(Errc::NoComparablePairs, "no expert threat of case " + case_id +
                                             " shares a STRIDE category with the tool output");

  const auto vectors = embed_texts(texts, embedder);

  SimilarityReport report;
  std::int64_t successes = 0;
  for (std::size_t b = 0; b < runs.size(); ++b) {
    BatchVerdict verdict;
    verdict.case_id = case_id;
    verdict.batch_index = static_cast<int>(b + 1);
    const auto& threats = runs[b].threats;
    for (std::size_t i = 0; i < threats.size(); ++i) {
      for (std::size_t j = 0; j < experts.size(); ++j) {
        if (experts[j]->threat_type != threats[i].threat_type) continue;
        SimilarityRecord r;
        r.case_id = case_id;
        r.batch_index = verdict.batch_index;
        r.tool_threat_index = static_cast<int>(i);
        r.expert_threat_index = static_cast<int>(j);
        r.category = threats[i].threat_type;
        r.score = cosine_similarity(vectors[tool_vec[b][i]], vectors[expert_vec[j]]);
        verdict.best_score = verdict.best_score ? std::max(*verdict.best_score, r.score) : r.score;
        report.records.push_back(r);
      }
    }
    verdict.success = verdict.best_score && *verdict.best_score >= protocol.similarity_threshold;
    if (verdict.success) ++successes;
    report.batches.push_back(verdict);
  }
  report.verdict = case_verdict(case_id, successes, static_cast<std::int64_t>(runs.size()), protocol);
  return report;
}

MappingStats mapping_stats(const std::vector<ThreatModelRun>& runs) {
  MappingStats s;
  for (const auto& run : runs) {
    for (std::size_t i = 0; i < run.threats.size(); ++i) {
      auto& cat = s.per_category[stride_index(run.threats[i].threat_type)];
      ++s.total;
      ++cat.total;
      if (i >= run.mappings.size()) continue;
      const auto& m = run.mappings[i];
      if (m.hallucinated) ++s.hallucination_count;
      if (is_mapped(m.stix_id, m.technique_id)) {
        ++s.mapped;
        ++cat.mapped;
      }
    }
  }
  auto ratio = [](std::int64_t a, std::int64_t b) { return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b); };
  s.rate = ratio(s.mapped, s.total);
  for (auto& c : s.per_category) c.rate = ratio(c.mapped, c.total);
  return s;
}

}  // namespace aegis::eval
