#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace aegis::eval {

enum class Alternative { TwoSided, Less, Greater };

std::string_view to_string(Alternative a) noexcept;
std::optional<Alternative> parse_alternative(std::string_view s);

struct DescriptiveStats {
  std::size_t n = 0;
  double mean = 0, se_mean = 0, stdev = 0, variance = 0;
  std::optional<double> coefvar;  // percent; absent when the mean is 0
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, range = 0, iqr = 0;
  std::vector<double> modes;  // every tied value; empty when all values are distinct
  std::size_t mode_count = 0;
  std::optional<double> skewness;  // absent for constant input or n < 3
  std::optional<double> kurtosis;  // excess; absent for constant input or n < 4
};

/// Sample (n-1) variance, adjusted Fisher-Pearson skewness, excess kurtosis.
/// Quartiles interpolate linearly at position p*(n+1) of the sorted sample.
/// Throws Error(TooFewSamples) when n < 2.
DescriptiveStats descriptive_stats(const std::vector<double>& samples);

/// p*(n+1) interpolation on sorted data, clamped to the extremes.
double quantile_np1(const std::vector<double>& sorted, double p);

struct TestStat {
  double statistic = 0;
  double p_value = 0;
};

struct NormalityResult {
  TestStat anderson_darling;  // statistic is the case-corrected A*^2
  double ad_raw = 0;          // uncorrected A^2
  TestStat lilliefors_ks;     // statistic is D
};

/// Both tests estimate mean and sd from the sample. AD p uses the
/// D'Agostino-Stephens piecewise formulas on A*^2 = A^2(1 + 0.75/n + 2.25/n^2);
/// the KS p uses the Dallal-Wilkinson approximation, falling back to
/// Stephens' modified statistic when that exceeds 0.1.
/// Throws Error(TooFewSamples) when n < 8.
NormalityResult normality_suite(const std::vector<double>& samples);

enum class ShiftPolicy { Off, ReplaceNonPositive };
inline constexpr double kShiftConstant = 0.1;

struct BoxCoxResult {
  std::vector<double> transformed;
  double lambda = 1.0;
  std::size_t replaced = 0;  // values raised to kShiftConstant
};

/// (x^l - 1)/l, or ln x at l = 0.
double box_cox_value(double x, double lambda);

/// Profile log-likelihood of lambda for positive data (constant terms dropped).
double box_cox_llf(const std::vector<double>& x, double lambda);

/// Estimates lambda on [-5, 5] by maximizing box_cox_llf, unless `lambda` is
/// given. Throws Error(NonPositive) for data <= 0 with ShiftPolicy::Off,
/// Error(TooFewSamples) for an empty sample.
BoxCoxResult box_cox(const std::vector<double>& samples, ShiftPolicy policy,
                     std::optional<double> lambda = std::nullopt);

struct MwuResult {
  std::size_t n1 = 0, n2 = 0;
  double w = 0;   // rank sum of the first sample (midranks)
  double u = 0;   // U1 = W - n1(n1+1)/2: pairs where a beats b, ties half
  double u2 = 0;  // n1*n2 - U1
  Alternative alternative = Alternative::TwoSided;
  bool exact = false;
  std::optional<double> z;  // normal path only, tie-corrected, continuity-corrected
  double p_value = 0;               // tie-adjusted on the normal path
  double p_value_unadjusted = 0;    // same as p_value on the exact path
  double hodges_lehmann = 0;        // median of a_i - b_j
  double lower_bound = 0;           // one-sided lower bound for the shift a - b; -inf when none exists
  double confidence = 0.95;
  double rank_biserial = 0;         // 1 - 2*U2/(n1*n2): negative when a sits lower
};

/// Exact when n1+n2 <= 12 and no ties, otherwise the normal approximation
/// with tie-corrected variance and a 0.5 continuity correction.
/// Less means "a shifted below b". Throws Error(EmptySample).
MwuResult mann_whitney(const std::vector<double>& a, const std::vector<double>& b,
                       Alternative alternative, double confidence = 0.95);

/// Number of rank subsets per U value (index u = 0..n1*n2) for untied data.
std::vector<double> mwu_exact_counts(std::size_t n1, std::size_t n2);

/// Exact p for U1 = u on untied data.
double mwu_exact_p(double u, std::size_t n1, std::size_t n2, Alternative alternative);

/// Midranks of the pooled values; returns the tie term sum(t^3 - t).
double midranks(const std::vector<double>& values, std::vector<double>& ranks);

enum class ProportionMethod { ExactBinomial, NormalApprox };
inline constexpr std::int64_t kExactProportionLimit = 200;

struct ProportionResult {
  std::int64_t successes = 0, n = 0;
  double p0 = 0.5;
  Alternative alternative = Alternative::Greater;
  double alpha = 0.05;
  double sample_p = 0;
  double p_value = 0;
  double lower_bound = 0;  // 0 unless alternative is Greater or TwoSided
  double upper_bound = 1;  // 1 unless alternative is Less or TwoSided
  ProportionMethod method = ProportionMethod::ExactBinomial;
  std::optional<double> z;
};

std::string_view to_string(ProportionMethod m) noexcept;

/// n <= 200: exact binomial test with Clopper-Pearson bounds (two-sided p
/// sums outcomes no more likely than the observed one). n > 200: score z test
/// with Wald bounds. Two-sided intervals use alpha/2 per side.
/// Throws Error(BadInput).
ProportionResult one_proportion(std::int64_t successes, std::int64_t n, double p0,
                                Alternative alternative, double alpha);

/// Sample Pearson r. Throws Error(DimensionMismatch) on unequal lengths and
/// Error(DegenerateInput) for n < 3 or zero variance.
double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y);

double normal_cdf(double z);
double normal_quantile(double p);

}  // namespace aegis::eval
