#pragma once

// Pivot-based mean inference for ranked set samples:
//   mu_hat  = (1/H) sum_h ybar_h
//   var_hat = (1/H^2) sum_h s_h^2 / n_h
// with the pivot (mu_hat - mu0) / sqrt(var_hat) referred to N(0,1) or t(df).

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "rss/core.hpp"
#include "rss/errors.hpp"
#include "rss/numerics.hpp"

namespace rss {

struct MeanSummary {
  double mu_hat = 0.0;
  // Absent when some stratum holds a single observation.
  std::optional<double> var_hat;
  std::vector<double> stratum_means;
  std::vector<double> stratum_vars;  // NaN for singleton strata
  Allocation counts;

  double variance() const {
    if (!var_hat) {
      throw DataError("variance unavailable: a stratum holds a single observation (need n_h >= 2)");
    }
    return *var_hat;
  }
  int set_size() const { return counts.set_size(); }
};

inline void require_kind(const RssDataset& data, OutcomeKind kind) {
  if (data.kind != kind) {
    throw DataError(std::string("expected a ") + to_string(kind) + " dataset, got " +
                    to_string(data.kind));
  }
}

inline double sample_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Unbiased sample variance (n - 1 denominator). Two-pass.
inline double sample_variance(const std::vector<double>& v) {
  const double m = sample_mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

inline MeanSummary mean_summary(const RssDataset& data) {
  require_kind(data, OutcomeKind::continuous);
  const auto strata = partition_by_rank(data);
  MeanSummary out;
  out.counts = stratum_counts(data);
  const int H = data.set_size;
  bool singleton = false;
  double mu = 0.0, var = 0.0;
  for (int h = 1; h <= H; ++h) {
    const auto& ys = strata[static_cast<std::size_t>(h - 1)];
    if (ys.empty()) throw DataError("empty stratum: rank " + std::to_string(h) + " has no observations");
    const double m = sample_mean(ys);
    out.stratum_means.push_back(m);
    mu += m;
    if (ys.size() < 2) {
      singleton = true;
      out.stratum_vars.push_back(kNaN);
    } else {
      const double s2 = sample_variance(ys);
      out.stratum_vars.push_back(s2);
      var += s2 / static_cast<double>(ys.size());
    }
  }
  out.mu_hat = mu / H;
  if (!singleton) out.var_hat = var / (static_cast<double>(H) * H);
  return out;
}

// ---------------------------------------------------------------------------
// Shared pivot machinery
// ---------------------------------------------------------------------------

namespace detail {

// Reference distribution for a pivot: N(0,1) when df is empty, else t(df).
struct Reference {
  std::optional<double> df;

  double cdf(double x) const { return df ? t_cdf(x, *df) : normal_cdf(x); }
  double sf(double x) const { return df ? t_cdf(-x, *df) : normal_sf(x); }
  double quantile(double p) const { return df ? t_quantile(p, *df) : normal_quantile(p); }
};

inline double p_value(const Reference& ref, double stat, Alternative alt) {
  if (std::isnan(stat)) return kNaN;
  switch (alt) {
    case Alternative::two_sided: return std::min(1.0, 2.0 * ref.sf(std::abs(stat)));
    case Alternative::less: return ref.cdf(stat);
    case Alternative::greater: return ref.sf(stat);
  }
  return kNaN;
}

inline double pivot(double estimate, double null_value, double se) {
  const double diff = estimate - null_value;
  if (se > 0.0) return diff / se;
  if (diff == 0.0) return 0.0;
  return std::copysign(kInf, diff);
}

// Wald-type interval estimate +- q se; the untested side of a one-sided
// interval is open.
inline void fill_interval(TestResult& r, const Reference& ref, double se) {
  switch (r.alternative) {
    case Alternative::two_sided: {
      const double q = ref.quantile(1.0 - 0.5 * r.alpha);
      r.ci_lower = r.estimate - q * se;
      r.ci_upper = r.estimate + q * se;
      break;
    }
    case Alternative::less:
      r.ci_lower = -kInf;
      r.ci_upper = r.estimate + ref.quantile(1.0 - r.alpha) * se;
      break;
    case Alternative::greater:
      r.ci_lower = r.estimate - ref.quantile(1.0 - r.alpha) * se;
      r.ci_upper = kInf;
      break;
  }
}

inline TestResult pivot_test(TestMethod method, double estimate, double se, double null_value,
                             const Reference& ref, double alpha, Alternative alt) {
  TestResult r;
  r.method = method;
  r.alpha = alpha;
  r.alternative = alt;
  r.estimate = estimate;
  r.df = ref.df;
  r.statistic = pivot(estimate, null_value, se);
  r.p_value = p_value(ref, r.statistic, alt);
  fill_interval(r, ref, se);
  return r;
}

}  // namespace detail

enum class DfMethod { naive, sample };

inline DfMethod parse_df_method(std::string_view s) {
  if (s == "naive") return DfMethod::naive;
  if (s == "sample") return DfMethod::sample;
  throw DataError("unknown df method '" + std::string(s) + "' (expected naive or sample)");
}

/// naive: sum over samples of (n - H).
inline double naive_df(const std::vector<const MeanSummary*>& samples) {
  double df = 0.0;
  for (const auto* s : samples) df += s->counts.total() - s->set_size();
  return df;
}

/// Welch-Satterthwaite over every stratum of every sample, with
/// g_h = s_h^2 / (H^2 n_h): df = (sum g)^2 / sum g^2 / (n_h - 1).
/// Falls back to the naive rule when all stratum variances are zero.
inline double satterthwaite_df(const std::vector<const MeanSummary*>& samples) {
  double num = 0.0, den = 0.0;
  for (const auto* s : samples) {
    const double H = s->set_size();
    for (int h = 1; h <= s->set_size(); ++h) {
      const double n = s->counts.count(h);
      const double g = s->stratum_vars[static_cast<std::size_t>(h - 1)] / (H * H * n);
      num += g;
      den += g * g / (n - 1.0);
    }
  }
  if (!(den > 0.0)) return naive_df(samples);
  return num * num / den;
}

inline TestResult rss_z_test(const RssDataset& data1, const RssDataset* data2, double mu0,
                             double alpha = 0.05, Alternative alt = Alternative::two_sided) {
  check_alpha(alpha);
  const auto s1 = mean_summary(data1);
  double estimate = s1.mu_hat, var = s1.variance();
  if (data2) {
    const auto s2 = mean_summary(*data2);
    estimate -= s2.mu_hat;
    var += s2.variance();
  }
  return detail::pivot_test(TestMethod::z, estimate, std::sqrt(var), mu0, detail::Reference{},
                            alpha, alt);
}

inline TestResult rss_t_test(const RssDataset& data1, const RssDataset* data2, double mu0,
                             double alpha = 0.05, Alternative alt = Alternative::two_sided,
                             DfMethod df_method = DfMethod::sample) {
  check_alpha(alpha);
  const auto s1 = mean_summary(data1);
  double estimate = s1.mu_hat, var = s1.variance();
  std::vector<const MeanSummary*> samples{&s1};
  std::optional<MeanSummary> s2;
  if (data2) {
    s2 = mean_summary(*data2);
    estimate -= s2->mu_hat;
    var += s2->variance();
    samples.push_back(&*s2);
  }
  const double df = df_method == DfMethod::naive ? naive_df(samples) : satterthwaite_df(samples);
  if (!(df > 0.0)) throw DataError("t test: degrees of freedom must be positive, got " + std::to_string(df));
  return detail::pivot_test(TestMethod::t, estimate, std::sqrt(var), mu0, detail::Reference{df},
                            alpha, alt);
}

/// Classical one-sample t test on an unstratified sample (df = n - 1). Used
/// as the simple random sampling comparator.
inline TestResult srs_t_test(const std::vector<double>& y, double mu0, double alpha = 0.05,
                             Alternative alt = Alternative::two_sided) {
  check_alpha(alpha);
  if (y.size() < 2) throw DataError("t test needs at least two observations");
  const double n = static_cast<double>(y.size());
  const double se = std::sqrt(sample_variance(y) / n);
  return detail::pivot_test(TestMethod::t, sample_mean(y), se, mu0, detail::Reference{n - 1.0},
                            alpha, alt);
}

}  // namespace rss
