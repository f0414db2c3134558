#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "aegis/error.hpp"
#include "aegis/eval/embedding.hpp"
#include "aegis/eval/io.hpp"
#include "aegis/eval/similarity.hpp"
#include "aegis/util.hpp"
#include "test_support.hpp"

using namespace aegis;
using namespace aegis::eval;

namespace {

template <class F>
Errc code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no Error thrown";
  return Errc::BadInput;
}

ThreatModelRun run_with(std::vector<std::pair<StrideCategory, std::string>> threats) {
  ThreatModelRun run;
  for (auto& [cat, text] : threats) {
    ThreatScenario t;
    t.threat_type = cat;
    t.scenario = text;
    run.threats.push_back(t);
  }
  return run;
}

Vector at_cos(double c) { return {c, std::sqrt(1.0 - c * c)}; }

}  // namespace

TEST(Cosine, HandValues) {
  const Vector v{0.3, -2.0, 5.5};
  EXPECT_NEAR(cosine_similarity(v, v), 1.0, 1e-12);
  EXPECT_NEAR(cosine_similarity({1, 0}, {0, 1}), 0.0, 1e-12);
  EXPECT_NEAR(cosine_similarity({1, 2, 3}, {4, 5, 6}), 0.9746, 1e-4);
  EXPECT_NEAR(cosine_similarity({1, 2, 3}, {4, 5, 6}), 32.0 / std::sqrt(14.0 * 77.0), 1e-12);
}

TEST(Cosine, Errors) {
  EXPECT_EQ(code_of([] { cosine_similarity({1, 2}, {1, 2, 3}); }), Errc::DimensionMismatch);
  EXPECT_EQ(code_of([] { cosine_similarity({0, 0}, {1, 2}); }), Errc::ZeroVector);
}

TEST(Cosine, SymmetricAndScaleInvariant) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> d(-1, 1), s(0.01, 50);
  for (int k = 0; k < 200; ++k) {
    Vector u(16), v(16);
    for (auto& x : u) x = d(rng);
    for (auto& x : v) x = d(rng);
    const double a = s(rng), b = s(rng);
    Vector au = u, bv = v;
    for (auto& x : au) x *= a;
    for (auto& x : bv) x *= b;
    EXPECT_NEAR(cosine_similarity(u, v), cosine_similarity(v, u), 1e-12);
    EXPECT_NEAR(cosine_similarity(au, bv), cosine_similarity(u, v), 1e-12);
  }
}

TEST(Embedding, HashingIsDeterministicAndNormalized) {
  HashingEmbedder e;
  EXPECT_EQ(e.dimension(), kReferenceDimension);
  const auto v = embed_texts({"SQL injection in login form", "SQL injection in login form", "other"}, e);
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v[0], v[1]);
  EXPECT_NE(v[0], v[2]);
  EXPECT_NEAR(cosine_similarity(v[0], v[0]), 1.0, 1e-12);
  double norm = 0;
  for (double x : v[0]) norm += x * x;
  EXPECT_NEAR(norm, 1.0, 1e-12);
}

TEST(Embedding, EmptyTextNamesIndex) {
  HashingEmbedder e(8);
  try {
    embed_texts({"fine", "  "}, e);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), Errc::EmptyText);
    EXPECT_NE(err.detail().find("index 1"), std::string::npos);
  }
}

TEST(Embedding, HttpProviderParsesResponseAndChecksDimension) {
  nlohmann::json data = nlohmann::json::array();
  for (int i = 0; i < 2; ++i) {
    std::vector<double> v(kReferenceDimension, 0.0);
    v[static_cast<std::size_t>(i)] = 1.0;
    data.push_back({{"index", i}, {"embedding", v}});
  }
  auto cassette = net::CassetteClient::replay(nlohmann::json::array(
      {{{"request", {{"method", "POST"}, {"url", "http://embed.local/v1/embeddings"}}},
        {"response", {{"status", 200}, {"body", nlohmann::json{{"data", data}}.dump()}}}}}));
  EmbedConfig cfg;
  cfg.base_url = "http://embed.local/v1/";
  cfg.api_key = "embed-test-key";
  HttpEmbedder e(cassette, cfg);
  const auto v = embed_texts({"a", "b"}, e);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0].size(), 1024u);
  EXPECT_NEAR(cosine_similarity(v[0], v[1]), 0.0, 1e-12);

  cfg.dimension = 768;
  HttpEmbedder wrong(cassette, cfg);
  EXPECT_EQ(code_of([&] { embed_texts({"a", "b"}, wrong); }), Errc::DimensionMismatch);
}

TEST(Embedding, HttpTransportFailureSurfaces) {
  auto cassette = net::CassetteClient::replay(nlohmann::json::array(
      {{{"request", {{"method", "POST"}, {"url", "http://embed.local/v1/embeddings"}}},
        {"response", {{"error", "transport"}}}}}));
  EmbedConfig cfg;
  cfg.base_url = "http://embed.local/v1";
  HttpEmbedder e(cassette, cfg);
  EXPECT_EQ(code_of([&] { embed_texts({"a"}, e); }), Errc::Transport);
}

TEST(Similarity, SameCategoryPairAboveThresholdSucceeds) {
  LookupEmbedder e(2, {{"expert spoof", {1, 0}}, {"tool spoof", at_cos(0.72)}, {"tool dos", {0, 1}}});
  const std::vector<ExpertThreat> expert{{"1", StrideCategory::Spoofing, "expert spoof"}};
  const auto rep = similarity_analysis(
      "1", {run_with({{StrideCategory::Spoofing, "tool spoof"}, {StrideCategory::DenialOfService, "tool dos"}})},
      expert, EvalProtocol{}, e);
  ASSERT_EQ(rep.records.size(), 1u);
  EXPECT_NEAR(rep.records[0].score, 0.72, 1e-12);
  ASSERT_EQ(rep.batches.size(), 1u);
  EXPECT_TRUE(rep.batches[0].success);
}

TEST(Similarity, ThresholdIsInclusive) {
  LookupEmbedder e(2, {{"x", {1, 0}}, {"y", {1, 0}}});
  EvalProtocol p;
  p.similarity_threshold = 1.0;
  const auto rep = similarity_analysis("c", {run_with({{StrideCategory::Tampering, "y"}})},
                                       {{"c", StrideCategory::Tampering, "x"}}, p, e);
  EXPECT_TRUE(rep.batches[0].success);
}

TEST(Similarity, CrossCategoryPairNeverCounts) {
  LookupEmbedder e(2, {{"expert tamper", {1, 0}}, {"expert spoof", {0, 1}}, {"tool spoof", at_cos(0.95)}});
  const std::vector<ExpertThreat> expert{{"1", StrideCategory::Tampering, "expert tamper"},
                                         {"1", StrideCategory::Spoofing, "expert spoof"}};
  const auto rep = similarity_analysis("1", {run_with({{StrideCategory::Spoofing, "tool spoof"}})}, expert,
                                       EvalProtocol{}, e);
  ASSERT_EQ(rep.records.size(), 1u);
  EXPECT_EQ(rep.records[0].category, StrideCategory::Spoofing);
  EXPECT_LT(rep.records[0].score, 0.7);
  EXPECT_FALSE(rep.batches[0].success);
}

TEST(Similarity, NoComparablePairs) {
  LookupEmbedder e(2, {{"a", {1, 0}}, {"b", {0, 1}}});
  EXPECT_EQ(code_of([&] {
              similarity_analysis("1", {run_with({{StrideCategory::Spoofing, "a"}})},
                                  {{"1", StrideCategory::Repudiation, "b"}}, EvalProtocol{}, e);
            }),
            Errc::NoComparablePairs);
  EXPECT_EQ(code_of([&] {
              similarity_analysis("2", {run_with({{StrideCategory::Spoofing, "a"}})},
                                  {{"1", StrideCategory::Spoofing, "b"}}, EvalProtocol{}, e);
            }),
            Errc::NoComparablePairs);
}

TEST(Similarity, SixteenOfThirtyVerdict) {
  LookupEmbedder e(2, {{"expert", {1, 0}}, {"near", at_cos(0.8)}, {"far", at_cos(0.5)}});
  std::vector<ThreatModelRun> runs;
  for (int b = 0; b < 30; ++b) runs.push_back(run_with({{StrideCategory::Repudiation, b < 16 ? "near" : "far"}}));
  const auto rep = similarity_analysis("7", runs, {{"7", StrideCategory::Repudiation, "expert"}}, EvalProtocol{}, e);
  EXPECT_EQ(rep.verdict.successes, 16);
  EXPECT_EQ(rep.verdict.total_batches, 30);
  EXPECT_EQ(util::fixed(100.0 * rep.verdict.sample_p, 1), "53.3");
  EXPECT_NEAR(rep.verdict.p_value, 0.42776777595281607, 1e-10);
  EXPECT_FALSE(rep.verdict.passes);
  EXPECT_EQ(e.calls(), 1u);
}

TEST(Similarity, RecordsNeverCrossCategories) {
  HashingEmbedder e(64);
  std::mt19937 rng(11);
  std::vector<ThreatModelRun> runs;
  for (int b = 0; b < 5; ++b) {
    std::vector<std::pair<StrideCategory, std::string>> ts;
    for (int i = 0; i < 18; ++i)
      ts.emplace_back(kStrideCategories[rng() % 6], "tool threat " + std::to_string(rng() % 50));
    runs.push_back(run_with(ts));
  }
  std::vector<ExpertThreat> expert;
  for (int j = 0; j < 12; ++j)
    expert.push_back({"c", kStrideCategories[rng() % 6], "expert threat " + std::to_string(j)});
  const auto rep = similarity_analysis("c", runs, expert, EvalProtocol{}, e);
  EXPECT_FALSE(rep.records.empty());
  for (const auto& r : rep.records) {
    const auto& tool = runs[static_cast<std::size_t>(r.batch_index - 1)].threats[static_cast<std::size_t>(r.tool_threat_index)];
    EXPECT_EQ(tool.threat_type, r.category);
    EXPECT_EQ(expert[static_cast<std::size_t>(r.expert_threat_index)].threat_type, r.category);
    EXPECT_GE(r.score, -1.0);
    EXPECT_LE(r.score, 1.0);
  }
}

namespace {

// Archive of 18-threat runs whose per-category mapped counts are given.
std::vector<ThreatModelRun> mapping_archive(const std::array<int, 6>& mapped, int per_category) {
  std::vector<ThreatModelRun> runs;
  std::array<int, 6> left = mapped;
  const int n_runs = per_category / 3;
  for (int r = 0; r < n_runs; ++r) {
    ThreatModelRun run;
    for (auto c : kStrideCategories) {
      for (int k = 0; k < 3; ++k) {
        ThreatScenario t;
        t.threat_type = c;
        run.threats.push_back(t);
        MitreMapping m;
        auto& l = left[stride_index(c)];
        if (l > 0) {
          m.stix_id = "attack-pattern--11111111-2222-3333-4444-555555555555";
          m.technique_id = "T1110";
          m.mapped = true;
          --l;
        }
        run.mappings.push_back(m);
      }
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

}  // namespace

TEST(MappingStats, PaperArchiveRates) {
  // Spoofing, Tampering, Repudiation, Information Disclosure, DoS, EoP.
  const auto runs = mapping_archive({1269, 1150, 992, 1140, 1134, 1236}, 1350);
  const auto s = mapping_stats(runs);
  EXPECT_EQ(s.total, 8100);
  EXPECT_EQ(s.mapped, 6921);
  EXPECT_EQ(util::fixed(100.0 * s.rate, 1), "85.4");
  EXPECT_EQ(util::fixed(100.0 * s.per_category[stride_index(StrideCategory::Spoofing)].rate, 1), "94.0");
  EXPECT_EQ(util::fixed(100.0 * s.per_category[stride_index(StrideCategory::ElevationOfPrivilege)].rate, 1), "91.6");
  EXPECT_EQ(util::fixed(100.0 * s.per_category[stride_index(StrideCategory::Repudiation)].rate, 1), "73.5");
  std::int64_t sum = 0;
  for (const auto& c : s.per_category) sum += c.mapped;
  EXPECT_EQ(sum, s.mapped);
  EXPECT_EQ(std::llround(s.rate * static_cast<double>(s.total)), s.mapped);
}

TEST(MappingStats, AllSentinel) {
  const auto s = mapping_stats(mapping_archive({0, 0, 0, 0, 0, 0}, 30));
  EXPECT_EQ(s.total, 180);
  EXPECT_EQ(s.mapped, 0);
  EXPECT_EQ(s.rate, 0.0);
}

TEST(MappingStats, HallucinationsTalliedSeparately) {
  auto runs = mapping_archive({3, 0, 0, 0, 0, 0}, 3);
  runs[0].mappings[3].hallucinated = true;
  runs[0].mappings[3].proposed_id = "attack-pattern--99999999-9999-9999-9999-999999999999";
  const auto s = mapping_stats(runs);
  EXPECT_EQ(s.hallucination_count, 1);
  EXPECT_EQ(s.mapped, 3);
  EXPECT_LE(s.mapped, s.total);
}

TEST(MappingStats, RateTimesTotalRecoversMapped) {
  for (int total = 1; total <= 60; ++total) {
    for (int mapped = 0; mapped <= total; ++mapped) {
      ThreatModelRun run;
      for (int i = 0; i < total; ++i) {
        ThreatScenario t;
        run.threats.push_back(t);
        MitreMapping m;
        if (i < mapped) {
          m.stix_id = "attack-pattern--11111111-2222-3333-4444-555555555555";
          m.technique_id = "T1078";
        }
        run.mappings.push_back(m);
      }
      const auto s = mapping_stats({run});
      EXPECT_EQ(std::llround(s.rate * total), mapped);
    }
  }
}

TEST(EvalIo, CsvRoundTrip) {
  const auto rows = parse_csv("a,\"b,c\",\"say \"\"hi\"\"\"\r\n1,2,\"multi\nline\"\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0][1], "b,c");
  EXPECT_EQ(rows[0][2], "say \"hi\"");
  EXPECT_EQ(rows[1][2], "multi\nline");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
}

TEST(EvalIo, SimilarityRecordsRoundTrip) {
  std::vector<SimilarityRecord> recs{{"1", 3, 4, 0, StrideCategory::InformationDisclosure, 0.734512},
                                     {"case,2", 1, 0, 2, StrideCategory::DenialOfService, -0.25}};
  const auto back = similarity_from_csv(similarity_csv(recs));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].case_id, "case,2");
  EXPECT_EQ(back[0].category, StrideCategory::InformationDisclosure);
  EXPECT_DOUBLE_EQ(back[0].score, 0.734512);
  EXPECT_EQ(back[1].expert_threat_index, 2);
}

TEST(EvalIo, ExpertCorpus) {
  const auto corpus = expert_corpus_from_json(nlohmann::json::parse(
      R"([{"case_id":"1","threat_type":"Denial of Service","text":"Flood the API."}])"));
  ASSERT_EQ(corpus.size(), 1u);
  EXPECT_EQ(corpus[0].threat_type, StrideCategory::DenialOfService);
  EXPECT_EQ(code_of([] {
              expert_corpus_from_json(nlohmann::json::parse(R"([{"case_id":"1","threat_type":"Bogus","text":"x"}])"));
            }),
            Errc::InvalidEnum);
  EXPECT_EQ(code_of([] {
              expert_corpus_from_json(nlohmann::json::parse(R"([{"case_id":"1","threat_type":"Spoofing","text":" "}])"));
            }),
            Errc::EmptyText);
  EXPECT_EQ(code_of([] { load_expert_corpus("/nonexistent/corpus.json"); }), Errc::IoError);
}

TEST(EvalIo, Rubric) {
  const auto rubric = rubric_from_csv(
      "case_id,crit1,crit2,crit3,crit4,crit5,crit6,crit7,crit8,crit9,threat_count\n"
      "1,5,4,5,3,5,2,4,4,5,12\n2,1,5,5,5,5,5,5,5,5,30\n");
  ASSERT_EQ(rubric.size(), 2u);
  EXPECT_EQ(rubric[0].criteria[3], 3);
  EXPECT_EQ(rubric[1].threat_count, 30);
  EXPECT_EQ(code_of([] {
              rubric_from_csv("case_id,crit1,crit2,crit3,crit4,crit5,crit6,crit7,crit8,crit9,threat_count\n"
                              "1,6,4,5,3,5,2,4,4,5,12\n");
            }),
            Errc::OutOfRange);
  EXPECT_EQ(code_of([] { rubric_from_csv("case_id,crit1\n1,2\n"); }), Errc::MissingKey);
}

TEST(EvalIo, Correlations) {
  std::vector<RubricRecord> rubric(3);
  for (int c = 0; c < 3; ++c) {
    rubric[static_cast<std::size_t>(c)].case_id = std::to_string(c + 1);
    rubric[static_cast<std::size_t>(c)].criteria.fill(5);
    rubric[static_cast<std::size_t>(c)].threat_count = 10 + c;
  }
  rubric[0].criteria[1] = 1;
  rubric[1].criteria[1] = 3;
  rubric[2].criteria[1] = 2;
  std::vector<SimilarityRecord> recs{{"1", 1, 0, 0, StrideCategory::Spoofing, 0.1},
                                     {"2", 1, 0, 0, StrideCategory::Spoofing, 0.3},
                                     {"3", 1, 0, 0, StrideCategory::Spoofing, 0.2},
                                     {"9", 1, 0, 0, StrideCategory::Spoofing, 0.9}};
  const auto threat = correlate_threat_level(recs, rubric);
  ASSERT_EQ(threat.size(), 11u);
  EXPECT_NEAR(*threat[0].r, 1.0, 1e-12);
  EXPECT_EQ(threat[1].metric, "Application/System Description or DFD");
  EXPECT_FALSE(threat[1].r.has_value());
  EXPECT_NEAR(*threat[2].r, 1.0, 1e-12);
  EXPECT_NEAR(*threat[10].r, 0.5, 1e-9);
  const auto cases = correlate_case_level(recs, rubric);
  ASSERT_EQ(cases.size(), 12u);
  EXPECT_EQ(cases[1].metric, "Total Rubric Score");
  EXPECT_NEAR(*cases[1].r, 1.0, 1e-12);
}
