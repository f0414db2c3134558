#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aegis/error.hpp"
#include "aegis/eval/stats.hpp"
#include "test_support.hpp"

using namespace aegis;
using namespace aegis::eval;

namespace {

const nlohmann::json& oracle() {
  static const auto j = fixtures::load_json_fixture("stats_oracle.json");
  return j;
}

std::vector<double> sample(const std::string& name) {
  return oracle()["samples"][name].get<std::vector<double>>();
}

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

}  // namespace

TEST(Descriptive, OneToFour) {
  const auto d = descriptive_stats({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(d.mean, 2.5);
  EXPECT_DOUBLE_EQ(d.median, 2.5);
  EXPECT_NEAR(d.stdev, 1.2910, 1e-4);
  EXPECT_DOUBLE_EQ(d.q1, 1.25);
  EXPECT_DOUBLE_EQ(d.q3, 3.75);
  EXPECT_DOUBLE_EQ(d.range, 3.0);
  EXPECT_TRUE(d.modes.empty());
}

TEST(Descriptive, ConstantInputHasUndefinedShape) {
  const auto d = descriptive_stats({5, 5, 5});
  EXPECT_DOUBLE_EQ(d.variance, 0.0);
  EXPECT_FALSE(d.skewness.has_value());
  EXPECT_FALSE(d.kurtosis.has_value());
  ASSERT_EQ(d.modes.size(), 1u);
  EXPECT_DOUBLE_EQ(d.modes[0], 5.0);
}

TEST(Descriptive, TooFewSamples) {
  EXPECT_EQ(code_of([] { descriptive_stats({1}); }), Errc::TooFewSamples);
}

TEST(Descriptive, AllTiedModesReported) {
  const auto d = descriptive_stats({1, 1, 2, 3, 3, 4});
  EXPECT_EQ(d.modes, (std::vector<double>{1, 3}));
  EXPECT_EQ(d.mode_count, 2u);
}

TEST(Descriptive, MatchesOracle) {
  for (const auto& [name, data] :
       {std::pair<std::string, std::vector<double>>{"small25", sample("small25")},
        {"crit1", {5, 1, 5, 5, 5, 5, 5, 5, 5, 5, 5, 5, 5, 5, 5}}}) {
    const auto& o = oracle()["descriptive"][name];
    const auto d = descriptive_stats(data);
    EXPECT_NEAR(d.mean, o["mean"].get<double>(), 1e-9) << name;
    EXPECT_NEAR(d.stdev, o["stdev"].get<double>(), 1e-9) << name;
    EXPECT_NEAR(d.variance, o["variance"].get<double>(), 1e-9) << name;
    EXPECT_NEAR(d.se_mean, o["se_mean"].get<double>(), 1e-9) << name;
    EXPECT_NEAR(d.q1, o["q1"].get<double>(), 1e-9) << name;
    EXPECT_NEAR(d.median, o["median"].get<double>(), 1e-9) << name;
    EXPECT_NEAR(d.q3, o["q3"].get<double>(), 1e-9) << name;
    ASSERT_TRUE(d.skewness && d.kurtosis);
    EXPECT_NEAR(*d.skewness, o["skewness"].get<double>(), 1e-9) << name;
    EXPECT_NEAR(*d.kurtosis, o["kurtosis"].get<double>(), 1e-9) << name;
  }
}

TEST(Normality, NormalSampleNotRejected) {
  const auto r = normality_suite(sample("normal500"));
  EXPECT_GT(r.anderson_darling.p_value, 0.05);
  const auto& o = oracle()["normality"]["normal500"];
  EXPECT_NEAR(r.ad_raw, o["ad_raw"].get<double>(), 1e-9);
  EXPECT_NEAR(r.anderson_darling.p_value, o["ad_p"].get<double>(), 1e-9);
  EXPECT_NEAR(r.lilliefors_ks.statistic, o["ks_d"].get<double>(), 1e-9);
  EXPECT_GT(r.lilliefors_ks.p_value, 0.05);
}

TEST(Normality, ExponentialSampleRejected) {
  const auto r = normality_suite(sample("exponential500"));
  EXPECT_LT(r.anderson_darling.p_value, 0.005);
  EXPECT_LT(r.lilliefors_ks.p_value, 0.005);
  EXPECT_NEAR(r.ad_raw, oracle()["normality"]["exponential500"]["ad_raw"].get<double>(), 1e-8);
}

TEST(Normality, SmallSampleMatchesOracle) {
  const auto r = normality_suite(sample("small25"));
  const auto& o = oracle()["normality"]["small25"];
  EXPECT_NEAR(r.ad_raw, o["ad_raw"].get<double>(), 1e-9);
  EXPECT_NEAR(r.anderson_darling.p_value, o["ad_p"].get<double>(), 1e-9);
  EXPECT_NEAR(r.lilliefors_ks.statistic, o["ks_d"].get<double>(), 1e-9);
}

TEST(Normality, TooFewSamples) {
  EXPECT_EQ(code_of([] { normality_suite({1, 2, 3}); }), Errc::TooFewSamples);
}

TEST(BoxCox, LambdaOneIsShiftByOne) {
  const std::vector<double> x{0.5, 2, 3.25, 9, 12};
  const auto r = box_cox(x, ShiftPolicy::Off, 1.0);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(r.transformed[i], x[i] - 1.0, 1e-12);
  EXPECT_TRUE(std::is_sorted(r.transformed.begin(), r.transformed.end()));
}

TEST(BoxCox, ReplacementPolicyHandlesNegatives) {
  const std::vector<double> x{-2.7, 1.5, 3.0, 4.2, 8.8, 10.1};
  EXPECT_EQ(code_of([&] { box_cox(x, ShiftPolicy::Off); }), Errc::NonPositive);
  const auto r = box_cox(x, ShiftPolicy::ReplaceNonPositive);
  EXPECT_EQ(r.replaced, 1u);
  EXPECT_EQ(r.transformed.size(), x.size());
  EXPECT_NEAR(r.transformed[0], box_cox_value(kShiftConstant, r.lambda), 1e-12);
}

TEST(BoxCox, LognormalLambdaNearZero) {
  const auto r = box_cox(sample("lognormal200"), ShiftPolicy::Off);
  EXPECT_GE(r.lambda, -0.2);
  EXPECT_LE(r.lambda, 0.2);
  EXPECT_NEAR(r.lambda, oracle()["boxcox"]["lognormal200"].get<double>(), 1e-4);
}

TEST(BoxCox, MatchesOracleOnSmallSample) {
  const auto r = box_cox(sample("small25"), ShiftPolicy::Off);
  EXPECT_NEAR(r.lambda, oracle()["boxcox"]["small25"].get<double>(), 1e-4);
}

TEST(BoxCox, LambdaZeroIsLog) {
  EXPECT_DOUBLE_EQ(box_cox_value(std::exp(2.0), 0.0), 2.0);
  EXPECT_NEAR(box_cox_value(3.0, 1e-12), std::log(3.0), 1e-9);
}

TEST(MannWhitney, CompleteSeparationExact) {
  const auto r = mann_whitney({1, 2}, {3, 4}, Alternative::Less);
  EXPECT_TRUE(r.exact);
  EXPECT_NEAR(r.p_value, 1.0 / 6.0, 1e-15);
  EXPECT_DOUBLE_EQ(r.u, 0.0);
  EXPECT_DOUBLE_EQ(std::fabs(r.rank_biserial), 1.0);
  EXPECT_LT(r.rank_biserial, 0.0);
  EXPECT_DOUBLE_EQ(r.w, 3.0);
}

TEST(MannWhitney, IdenticalSamplesHaveZeroShift) {
  const auto r = mann_whitney({1, 2, 3}, {1, 2, 3}, Alternative::TwoSided);
  EXPECT_DOUBLE_EQ(r.hodges_lehmann, 0.0);
  EXPECT_DOUBLE_EQ(r.rank_biserial, 0.0);
}

TEST(MannWhitney, EmptySample) {
  EXPECT_EQ(code_of([] { mann_whitney({}, {1}, Alternative::Less); }), Errc::EmptySample);
  EXPECT_EQ(code_of([] { mann_whitney({1}, {}, Alternative::Less); }), Errc::EmptySample);
}

TEST(MannWhitney, RankBiserialSign) {
  EXPECT_LT(mann_whitney({1, 2, 3, 5}, {4, 6, 7, 8, 9}, Alternative::TwoSided).rank_biserial, 0.0);
  EXPECT_GT(mann_whitney({4, 6, 7, 8, 9}, {1, 2, 3, 5}, Alternative::TwoSided).rank_biserial, 0.0);
}

namespace {

// Independent enumeration: every way of assigning n1 of the ranks 1..N to
// the first sample, counted by U.
double brute_force_p(std::size_t n1, std::size_t n2, double u_obs, Alternative alt) {
  const std::size_t big_n = n1 + n2;
  double le = 0, ge = 0, total = 0;
  for (unsigned mask = 0; mask < (1u << big_n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != n1) continue;
    double w = 0;
    for (std::size_t r = 0; r < big_n; ++r)
      if (mask & (1u << r)) w += static_cast<double>(r + 1);
    const double u = w - static_cast<double>(n1 * (n1 + 1)) / 2.0;
    total += 1;
    if (u <= u_obs) le += 1;
    if (u >= u_obs) ge += 1;
  }
  if (alt == Alternative::Less) return le / total;
  if (alt == Alternative::Greater) return ge / total;
  return std::min(1.0, 2.0 * std::min(le, ge) / total);
}

}  // namespace

TEST(MannWhitney, ExactMatchesBruteForceForSmallSamples) {
  int checked = 0;
  for (std::size_t n1 = 1; n1 <= 7; ++n1) {
    for (std::size_t n2 = 1; n1 + n2 <= 8; ++n2) {
      const std::size_t big_n = n1 + n2;
      for (unsigned mask = 0; mask < (1u << big_n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != n1) continue;
        std::vector<double> a, b;
        for (std::size_t r = 0; r < big_n; ++r)
          ((mask & (1u << r)) ? a : b).push_back(static_cast<double>(r + 1) * 1.5);
        for (auto alt : {Alternative::Less, Alternative::Greater, Alternative::TwoSided}) {
          const auto res = mann_whitney(a, b, alt);
          ASSERT_TRUE(res.exact);
          EXPECT_DOUBLE_EQ(res.p_value, brute_force_p(n1, n2, res.u, alt));
          ++checked;
        }
        EXPECT_DOUBLE_EQ(mann_whitney(a, b, Alternative::Less).u +
                             mann_whitney(a, b, Alternative::Less).u2,
                         static_cast<double>(n1 * n2));
      }
    }
  }
  EXPECT_GT(checked, 1000);
}

TEST(MannWhitney, TieCorrectedNormalMatchesOracle) {
  for (const auto& f : oracle()["mann_whitney"]) {
    const auto a = f["a"].get<std::vector<double>>();
    const auto b = f["b"].get<std::vector<double>>();
    for (auto [alt, key] : {std::pair{Alternative::TwoSided, "two-sided"},
                            std::pair{Alternative::Less, "less"},
                            std::pair{Alternative::Greater, "greater"}}) {
      const auto r = mann_whitney(a, b, alt);
      EXPECT_FALSE(r.exact);
      EXPECT_NEAR(r.p_value, f[key].get<double>(), 1e-12) << key;
    }
    const auto r = mann_whitney(a, b, Alternative::TwoSided);
    EXPECT_DOUBLE_EQ(r.u, f["u1"].get<double>());
    EXPECT_DOUBLE_EQ(r.hodges_lehmann, f["hl"].get<double>());
  }
}

TEST(MannWhitney, ClosedFormZ) {
  for (const auto& f : oracle()["mann_whitney"]) {
    const auto a = f["a"].get<std::vector<double>>();
    const auto b = f["b"].get<std::vector<double>>();
    // Closed form from raw counts: U by pair comparison, tie term by value multiplicity.
    double u = 0;
    for (double x : a)
      for (double y : b) u += x > y ? 1.0 : x == y ? 0.5 : 0.0;
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    std::sort(pooled.begin(), pooled.end());
    double tie = 0;
    for (std::size_t i = 0; i < pooled.size();) {
      std::size_t j = i;
      while (j < pooled.size() && pooled[j] == pooled[i]) ++j;
      const double t = static_cast<double>(j - i);
      tie += t * t * t - t;
      i = j;
    }
    const double n1 = static_cast<double>(a.size()), n2 = static_cast<double>(b.size()), n = n1 + n2;
    const double sd = std::sqrt(n1 * n2 / 12.0 * ((n + 1) - tie / (n * (n - 1))));
    const double z_less = (u - n1 * n2 / 2.0 + 0.5) / sd;
    const auto r = mann_whitney(a, b, Alternative::Less);
    ASSERT_TRUE(r.z.has_value());
    EXPECT_NEAR(*r.z, z_less, 1e-9);
  }
}

TEST(MannWhitney, ExactAndNormalAgreeForLargerUntiedSamples) {
  const auto& f = oracle()["mwu_untied"];
  const auto a = f["a"].get<std::vector<double>>();
  const auto b = f["b"].get<std::vector<double>>();
  const auto r = mann_whitney(a, b, Alternative::Less);
  EXPECT_FALSE(r.exact);
  EXPECT_NEAR(r.p_value, f["less"].get<double>(), 1e-12);
  const double exact = mwu_exact_p(r.u, a.size(), b.size(), Alternative::Less);
  EXPECT_NEAR(exact, f["exact_less"].get<double>(), 1e-12);
  EXPECT_NEAR(exact, r.p_value, 0.05);
}

TEST(MannWhitney, ExactVsNormalSanityBand) {
  // Interleaved untied samples with n1, n2 >= 10.
  for (std::size_t n1 = 10; n1 <= 12; ++n1) {
    for (int shift = 0; shift < 5; ++shift) {
      std::vector<double> a, b;
      for (std::size_t i = 0; i < n1; ++i) a.push_back(static_cast<double>(i) * 2.0 + shift * 0.37);
      for (std::size_t i = 0; i < 11; ++i) b.push_back(static_cast<double>(i) * 2.0 + 1.01);
      for (auto alt : {Alternative::Less, Alternative::Greater, Alternative::TwoSided}) {
        const auto r = mann_whitney(a, b, alt);
        EXPECT_NEAR(mwu_exact_p(r.u, a.size(), b.size(), alt), r.p_value, 0.05);
      }
    }
  }
}

TEST(MannWhitney, LowerBoundBracketsShift) {
  std::vector<double> a, b;
  for (int i = 0; i < 40; ++i) {
    a.push_back(10.0 + i * 0.5);
    b.push_back(i * 0.5 + 0.01 * i);
  }
  const auto r = mann_whitney(a, b, Alternative::Greater);
  EXPECT_LT(r.lower_bound, r.hodges_lehmann);
  EXPECT_GT(r.lower_bound, 0.0);
  const auto tiny = mann_whitney({1}, {2}, Alternative::Greater);
  EXPECT_TRUE(std::isinf(tiny.lower_bound));
}

TEST(Proportion, AllSuccessesClosedForm) {
  for (int n : {1, 5, 30, 150}) {
    const auto r = one_proportion(n, n, 0.5, Alternative::Greater, 0.05);
    EXPECT_EQ(r.lower_bound, std::pow(0.05, 1.0 / n));
  }
  const auto r = one_proportion(30, 30, 0.5, Alternative::Greater, 0.05);
  EXPECT_NEAR(r.lower_bound, 0.9050, 1e-4);
  EXPECT_NEAR(r.lower_bound, 0.904, 0.002);
}

TEST(Proportion, ZeroSuccesses) {
  const auto r = one_proportion(0, 30, 0.5, Alternative::Greater, 0.05);
  EXPECT_EQ(r.lower_bound, 0.0);
  EXPECT_EQ(r.p_value, 1.0);
}

TEST(Proportion, LargeSampleUsesNormalPath) {
  const auto r = one_proportion(6921, 8100, 0.80, Alternative::Greater, 0.05);
  EXPECT_EQ(r.method, ProportionMethod::NormalApprox);
  EXPECT_LT(r.p_value, 0.001);
  EXPECT_NEAR(r.lower_bound, 0.848, 0.001);
  EXPECT_NEAR(r.sample_p, 0.854, 0.0005);
}

TEST(Proportion, MatchesOracle) {
  for (const auto& c : oracle()["one_proportion"]) {
    const auto alt = *parse_alternative(c["alt"].get<std::string>());
    const auto r = one_proportion(c["x"].get<int>(), c["n"].get<int>(), c["p0"].get<double>(), alt, 0.05);
    EXPECT_EQ(r.method, ProportionMethod::ExactBinomial);
    EXPECT_NEAR(r.p_value, c["p"].get<double>(), 1e-10) << c.dump();
    EXPECT_NEAR(r.lower_bound, c["low"].get<double>(), 1e-10) << c.dump();
    EXPECT_NEAR(r.upper_bound, c["high"].get<double>(), 1e-10) << c.dump();
  }
}

TEST(Proportion, BadInput) {
  EXPECT_EQ(code_of([] { one_proportion(5, 0, 0.5, Alternative::Greater, 0.05); }), Errc::BadInput);
  EXPECT_EQ(code_of([] { one_proportion(31, 30, 0.5, Alternative::Greater, 0.05); }), Errc::BadInput);
  EXPECT_EQ(code_of([] { one_proportion(-1, 30, 0.5, Alternative::Greater, 0.05); }), Errc::BadInput);
  EXPECT_EQ(code_of([] { one_proportion(3, 30, 1.0, Alternative::Greater, 0.05); }), Errc::BadInput);
  EXPECT_EQ(code_of([] { one_proportion(3, 30, 0.5, Alternative::Greater, 0.0); }), Errc::BadInput);
}

TEST(Pearson, HandValues) {
  EXPECT_NEAR(pearson_correlation({1, 2, 3}, {2, 4, 6}), 1.0, 1e-12);
  EXPECT_NEAR(pearson_correlation({1, 2, 3}, {3, 2, 1}), -1.0, 1e-12);
  EXPECT_NEAR(pearson_correlation({1, 2, 3}, {1, 3, 2}), 0.5, 1e-9);
}

TEST(Pearson, Degenerate) {
  EXPECT_EQ(code_of([] { pearson_correlation({1, 2}, {1, 2}); }), Errc::DegenerateInput);
  EXPECT_EQ(code_of([] { pearson_correlation({1, 1, 1}, {1, 2, 3}); }), Errc::DegenerateInput);
  EXPECT_EQ(code_of([] { pearson_correlation({1, 2, 3}, {1, 2}); }), Errc::DimensionMismatch);
}
