#include "aegis/eval/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/tools/minima.hpp>

#include "aegis/error.hpp"
#include "aegis/util.hpp"

namespace aegis::eval {

namespace {

double mean_of(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double median_sorted(const std::vector<double>& s) {
  const std::size_t n = s.size();
  return n % 2 ? s[n / 2] : (s[n / 2 - 1] + s[n / 2]) / 2.0;
}

}  // namespace

std::string_view to_string(Alternative a) noexcept {
  switch (a) {
    case Alternative::TwoSided: return "two-sided";
    case Alternative::Less: return "less";
    case Alternative::Greater: return "greater";
  }
  return "two-sided";
}

std::optional<Alternative> parse_alternative(std::string_view s) {
  const std::string v = util::to_lower(util::trim(s));
  if (v == "two-sided" || v == "two_sided" || v == "twosided" || v == "ne") return Alternative::TwoSided;
  if (v == "less" || v == "lt") return Alternative::Less;
  if (v == "greater" || v == "gt") return Alternative::Greater;
  return std::nullopt;
}

std::string_view to_string(ProportionMethod m) noexcept {
  return m == ProportionMethod::ExactBinomial ? "exact-binomial" : "normal-approximation";
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double quantile_np1(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  const double pos = p * static_cast<double>(n + 1);
  if (pos <= 1.0) return sorted.front();
  if (pos >= static_cast<double>(n)) return sorted.back();
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo - 1] + frac * (sorted[lo] - sorted[lo - 1]);
}

DescriptiveStats descriptive_stats(const std::vector<double>& samples) {
  const std::size_t n = samples.size();
  if (n < 2) throw Error(Errc::TooFewSamples, "need at least 2 samples, got " + std::to_string(n));
  std::vector<double> s = samples;
  std::sort(s.begin(), s.end());

  DescriptiveStats d;
  d.n = n;
  d.mean = mean_of(s);
  double m2 = 0, m3 = 0, m4 = 0;
  for (double x : s) {
    const double dev = x - d.mean;
    m2 += dev * dev;
    m3 += dev * dev * dev;
    m4 += dev * dev * dev * dev;
  }
  const double nd = static_cast<double>(n);
  d.variance = m2 / (nd - 1);
  d.stdev = std::sqrt(d.variance);
  d.se_mean = d.stdev / std::sqrt(nd);
  if (d.mean != 0.0) d.coefvar = 100.0 * d.stdev / d.mean;
  d.min = s.front();
  d.max = s.back();
  d.range = d.max - d.min;
  d.q1 = quantile_np1(s, 0.25);
  d.median = median_sorted(s);
  d.q3 = quantile_np1(s, 0.75);
  d.iqr = d.q3 - d.q1;

  std::map<double, std::size_t> counts;
  for (double x : s) ++counts[x];
  for (const auto& [v, c] : counts) d.mode_count = std::max(d.mode_count, c);
  if (d.mode_count > 1)
    for (const auto& [v, c] : counts)
      if (c == d.mode_count) d.modes.push_back(v);

  if (d.variance > 0.0) {
    double z3 = 0, z4 = 0;
    for (double x : s) {
      const double z = (x - d.mean) / d.stdev;
      z3 += z * z * z;
      z4 += z * z * z * z;
    }
    if (n >= 3) d.skewness = nd / ((nd - 1) * (nd - 2)) * z3;
    if (n >= 4)
      d.kurtosis = nd * (nd + 1) / ((nd - 1) * (nd - 2) * (nd - 3)) * z4 -
                   3 * (nd - 1) * (nd - 1) / ((nd - 2) * (nd - 3));
  }
  return d;
}

NormalityResult normality_suite(const std::vector<double>& samples) {
  const std::size_t n = samples.size();
  if (n < 8) throw Error(Errc::TooFewSamples, "normality tests need n >= 8, got " + std::to_string(n));
  std::vector<double> s = samples;
  std::sort(s.begin(), s.end());
  const double nd = static_cast<double>(n);
  const double m = mean_of(s);
  double ss = 0;
  for (double x : s) ss += (x - m) * (x - m);
  const double sd = std::sqrt(ss / (nd - 1));
  if (!(sd > 0)) throw Error(Errc::DegenerateInput, "constant sample");

  std::vector<double> cdf(n);
  for (std::size_t i = 0; i < n; ++i) cdf[i] = normal_cdf((s[i] - m) / sd);

  NormalityResult r;
  double acc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = std::max(cdf[i], 1e-300);
    const double hi = std::max(1.0 - cdf[n - 1 - i], 1e-300);
    acc += (2.0 * static_cast<double>(i) + 1.0) * (std::log(lo) + std::log(hi));
  }
  r.ad_raw = -nd - acc / nd;
  const double a = r.ad_raw * (1.0 + 0.75 / nd + 2.25 / (nd * nd));
  double p;
  if (a >= 0.6) p = std::exp(1.2937 - 5.709 * a + 0.0186 * a * a);
  else if (a >= 0.34) p = std::exp(0.9177 - 4.279 * a - 1.38 * a * a);
  else if (a > 0.2) p = 1.0 - std::exp(-8.318 + 42.796 * a - 59.938 * a * a);
  else p = 1.0 - std::exp(-13.436 + 101.14 * a - 223.73 * a * a);
  r.anderson_darling = {a, std::clamp(p, 0.0, 1.0)};

  double d = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double i1 = static_cast<double>(i + 1);
    d = std::max({d, i1 / nd - cdf[i], cdf[i] - (i1 - 1.0) / nd});
  }
  double kd = d, nn = nd;
  if (n > 100) {
    kd = d * std::pow(nd / 100.0, 0.49);
    nn = 100.0;
  }
  double kp = std::exp(-7.01256 * kd * kd * (nn + 2.78019) + 2.99587 * kd * std::sqrt(nn + 2.78019) -
                       0.122119 + 0.974598 / std::sqrt(nn) + 1.67997 / nn);
  if (kp > 0.1) {
    const double kk = (std::sqrt(nd) - 0.01 + 0.85 / std::sqrt(nd)) * d;
    if (kk <= 0.302) kp = 1.0;
    else if (kk <= 0.5) kp = 2.76773 - 19.828315 * kk + 80.709644 * kk * kk - 138.55152 * std::pow(kk, 3) + 81.218052 * std::pow(kk, 4);
    else if (kk <= 0.9) kp = -4.901232 + 40.662806 * kk - 97.490286 * kk * kk + 94.029866 * std::pow(kk, 3) - 32.355711 * std::pow(kk, 4);
    else if (kk <= 1.31) kp = 6.198765 - 19.558097 * kk + 23.186922 * kk * kk - 12.234627 * std::pow(kk, 3) + 2.423045 * std::pow(kk, 4);
    else kp = 0.0;
  }
  r.lilliefors_ks = {d, std::clamp(kp, 0.0, 1.0)};
  return r;
}

double box_cox_value(double x, double lambda) {
  const double lx = std::log(x);
  if (lambda == 0.0) return lx;
  return std::expm1(lambda * lx) / lambda;
}

double box_cox_llf(const std::vector<double>& x, double lambda) {
  const double nd = static_cast<double>(x.size());
  double log_sum = 0, mean = 0;
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    log_sum += std::log(x[i]);
    y[i] = box_cox_value(x[i], lambda);
    mean += y[i];
  }
  mean /= nd;
  double var = 0;
  for (double v : y) var += (v - mean) * (v - mean);
  var /= nd;
  return (lambda - 1.0) * log_sum - nd / 2.0 * std::log(var);
}

BoxCoxResult box_cox(const std::vector<double>& samples, ShiftPolicy policy,
                     std::optional<double> lambda) {
  if (samples.empty()) throw Error(Errc::TooFewSamples, "box-cox needs data");
  BoxCoxResult r;
  std::vector<double> x = samples;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0) continue;
    if (policy == ShiftPolicy::Off)
      throw Error(Errc::NonPositive, "value " + util::fixed(x[i], 4) + " at index " + std::to_string(i));
    x[i] = kShiftConstant;
    ++r.replaced;
  }
  if (lambda) {
    r.lambda = *lambda;
  } else {
    if (x.size() < 2) throw Error(Errc::TooFewSamples, "estimating lambda needs n >= 2");
    const auto best = boost::math::tools::brent_find_minima(
        [&](double l) { return -box_cox_llf(x, l); }, -5.0, 5.0, std::numeric_limits<double>::digits / 2);
    r.lambda = best.first;
  }
  r.transformed.reserve(x.size());
  for (double v : x) r.transformed.push_back(box_cox_value(v, r.lambda));
  return r;
}

double midranks(const std::vector<double>& values, std::vector<double>& ranks) {
  const std::size_t n = values.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  ranks.assign(n, 0.0);
  double tie_term = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[idx[j + 1]] == values[idx[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = rank;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  return tie_term;
}

std::vector<double> mwu_exact_counts(std::size_t n1, std::size_t n2) {
  const std::size_t big_n = n1 + n2;
  const std::size_t max_sum = big_n * (big_n + 1) / 2;
  // ways[k][s]: subsets of size k drawn from the ranks seen so far with sum s.
  std::vector<std::vector<double>> ways(n1 + 1, std::vector<double>(max_sum + 1, 0.0));
  ways[0][0] = 1.0;
  for (std::size_t r = 1; r <= big_n; ++r)
    for (std::size_t k = std::min(r, n1); k >= 1; --k)
      for (std::size_t s = max_sum; s >= r; --s) ways[k][s] += ways[k - 1][s - r];
  const std::size_t offset = n1 * (n1 + 1) / 2;
  std::vector<double> counts(n1 * n2 + 1, 0.0);
  for (std::size_t u = 0; u <= n1 * n2; ++u) counts[u] = ways[n1][u + offset];
  return counts;
}

namespace {

struct ExactTails {
  double less, greater;
};

ExactTails exact_tails(const std::vector<double>& counts, double u) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  double le = 0, ge = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double kd = static_cast<double>(k);
    if (kd <= u) le += counts[k];
    if (kd >= u) ge += counts[k];
  }
  return {le / total, ge / total};
}

double pick_p(Alternative alt, double less, double greater) {
  switch (alt) {
    case Alternative::Less: return less;
    case Alternative::Greater: return greater;
    case Alternative::TwoSided: return std::min(1.0, 2.0 * std::min(less, greater));
  }
  return 1.0;
}

}  // namespace

double mwu_exact_p(double u, std::size_t n1, std::size_t n2, Alternative alternative) {
  const auto t = exact_tails(mwu_exact_counts(n1, n2), u);
  return pick_p(alternative, t.less, t.greater);
}

MwuResult mann_whitney(const std::vector<double>& a, const std::vector<double>& b,
                       Alternative alternative, double confidence) {
  if (a.empty() || b.empty()) throw Error(Errc::EmptySample, a.empty() ? "first sample is empty" : "second sample is empty");
  if (!(confidence > 0 && confidence < 1)) throw Error(Errc::BadInput, "confidence must be in (0,1)");
  MwuResult r;
  r.n1 = a.size();
  r.n2 = b.size();
  r.alternative = alternative;
  r.confidence = confidence;
  const double n1 = static_cast<double>(r.n1), n2 = static_cast<double>(r.n2);
  const double nn = n1 * n2, big_n = n1 + n2;

  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::vector<double> ranks;
  const double tie_term = midranks(pooled, ranks);
  r.w = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(r.n1), 0.0);
  r.u = r.w - n1 * (n1 + 1) / 2.0;
  r.u2 = nn - r.u;
  r.rank_biserial = 1.0 - 2.0 * r.u2 / nn;

  std::vector<double> diffs;
  diffs.reserve(r.n1 * r.n2);
  for (double x : a)
    for (double y : b) diffs.push_back(x - y);
  std::sort(diffs.begin(), diffs.end());
  r.hodges_lehmann = median_sorted(diffs);

  const double alpha = 1.0 - confidence;
  double k_minus_1;  // largest u with P(U <= u) <= alpha, or -1
  r.exact = r.n1 + r.n2 <= 12 && tie_term == 0.0;
  if (r.exact) {
    const auto counts = mwu_exact_counts(r.n1, r.n2);
    const auto t = exact_tails(counts, r.u);
    r.p_value = r.p_value_unadjusted = pick_p(alternative, t.less, t.greater);
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    double cum = 0;
    k_minus_1 = -1;
    for (std::size_t u = 0; u < counts.size(); ++u) {
      cum += counts[u];
      if (cum / total <= alpha) k_minus_1 = static_cast<double>(u);
      else break;
    }
  } else {
    const double mu = nn / 2.0;
    const double var_adj = nn / 12.0 * ((big_n + 1.0) - tie_term / (big_n * (big_n - 1.0)));
    const double var_raw = nn * (big_n + 1.0) / 12.0;
    auto p_for = [&](double sd, double* z_out) {
      if (!(sd > 0)) {
        if (z_out) *z_out = 0.0;
        return 1.0;
      }
      double z, p;
      switch (alternative) {
        case Alternative::Less:
          z = (r.u - mu + 0.5) / sd;
          p = normal_cdf(z);
          break;
        case Alternative::Greater:
          z = (r.u - mu - 0.5) / sd;
          p = normal_cdf(-z);
          break;
        default: {
          const double dev = r.u - mu;
          const double sign = dev > 0 ? 1.0 : dev < 0 ? -1.0 : 0.0;
          z = (dev - 0.5 * sign) / sd;
          p = std::min(1.0, 2.0 * normal_cdf(-std::fabs(z)));
        }
      }
      if (z_out) *z_out = z;
      return p;
    };
    double z = 0;
    r.p_value = p_for(std::sqrt(var_adj), &z);
    r.z = z;
    r.p_value_unadjusted = p_for(std::sqrt(var_raw), nullptr);
    k_minus_1 = std::floor(mu - 0.5 - normal_quantile(confidence) * std::sqrt(var_adj));
  }
  if (k_minus_1 < 0) r.lower_bound = -std::numeric_limits<double>::infinity();
  else r.lower_bound = diffs[std::min(static_cast<std::size_t>(k_minus_1), diffs.size() - 1)];
  return r;
}

ProportionResult one_proportion(std::int64_t successes, std::int64_t n, double p0,
                                Alternative alternative, double alpha) {
  if (n < 1) throw Error(Errc::BadInput, "n must be >= 1");
  if (successes < 0 || successes > n) throw Error(Errc::BadInput, "successes must be within [0, n]");
  if (!(p0 > 0 && p0 < 1)) throw Error(Errc::BadInput, "p0 must be in (0,1)");
  if (!(alpha > 0 && alpha < 1)) throw Error(Errc::BadInput, "alpha must be in (0,1)");

  ProportionResult r;
  r.successes = successes;
  r.n = n;
  r.p0 = p0;
  r.alternative = alternative;
  r.alpha = alpha;
  const double x = static_cast<double>(successes), nd = static_cast<double>(n);
  r.sample_p = x / nd;
  const double side_alpha = alternative == Alternative::TwoSided ? alpha / 2.0 : alpha;
  const bool want_lower = alternative != Alternative::Less;
  const bool want_upper = alternative != Alternative::Greater;

  if (n <= kExactProportionLimit) {
    r.method = ProportionMethod::ExactBinomial;
    const boost::math::binomial_distribution<double> dist(nd, p0);
    const double p_ge = successes == 0 ? 1.0 : boost::math::ibeta(x, nd - x + 1.0, p0);
    const double p_le = successes == n ? 1.0 : boost::math::ibetac(x + 1.0, nd - x, p0);
    switch (alternative) {
      case Alternative::Greater: r.p_value = p_ge; break;
      case Alternative::Less: r.p_value = p_le; break;
      case Alternative::TwoSided: {
        const double d = boost::math::pdf(dist, x) * (1.0 + 1e-7);
        const double mode = nd * p0;
        double p = 0;
        if (x == mode) {
          p = 1.0;
        } else if (x < mode) {
          std::int64_t y = 0;
          for (auto j = static_cast<std::int64_t>(std::ceil(mode)); j <= n; ++j)
            if (boost::math::pdf(dist, static_cast<double>(j)) <= d) ++y;
          p = p_le + (y > 0 ? boost::math::cdf(boost::math::complement(dist, static_cast<double>(n - y))) : 0.0);
        } else {
          std::int64_t y = 0;
          for (std::int64_t j = 0; j <= static_cast<std::int64_t>(std::floor(mode)); ++j)
            if (boost::math::pdf(dist, static_cast<double>(j)) <= d) ++y;
          p = (y > 0 ? boost::math::cdf(dist, static_cast<double>(y - 1)) : 0.0) + p_ge;
        }
        r.p_value = std::min(1.0, p);
      }
    }
    if (want_lower) {
      if (successes == 0) r.lower_bound = 0.0;
      else if (successes == n) r.lower_bound = std::pow(side_alpha, 1.0 / nd);
      else r.lower_bound = boost::math::ibeta_inv(x, nd - x + 1.0, side_alpha);
    }
    if (want_upper) {
      if (successes == n) r.upper_bound = 1.0;
      else if (successes == 0) r.upper_bound = 1.0 - std::pow(side_alpha, 1.0 / nd);
      else r.upper_bound = boost::math::ibeta_inv(x + 1.0, nd - x, 1.0 - side_alpha);
    }
  } else {
    r.method = ProportionMethod::NormalApprox;
    const double z = (r.sample_p - p0) / std::sqrt(p0 * (1.0 - p0) / nd);
    r.z = z;
    switch (alternative) {
      case Alternative::Greater: r.p_value = normal_cdf(-z); break;
      case Alternative::Less: r.p_value = normal_cdf(z); break;
      case Alternative::TwoSided: r.p_value = std::min(1.0, 2.0 * normal_cdf(-std::fabs(z))); break;
    }
    const double margin = normal_quantile(1.0 - side_alpha) * std::sqrt(r.sample_p * (1.0 - r.sample_p) / nd);
    if (want_lower) r.lower_bound = std::max(0.0, r.sample_p - margin);
    if (want_upper) r.upper_bound = std::min(1.0, r.sample_p + margin);
  }
  return r;
}

double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size())
    throw Error(Errc::DimensionMismatch, std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  if (x.size() < 3) throw Error(Errc::DegenerateInput, "pearson needs n >= 3");
  const double mx = mean_of(x), my = mean_of(y);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(Errc::DegenerateInput, "zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace aegis::eval
