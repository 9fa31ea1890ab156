#pragma once

// Two-sample AUC, delta = P(Y2 > Y1), estimated by the stratum-weighted
// Mann-Whitney kernel, with jackknife empirical likelihood inference.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rss/core.hpp"
#include "rss/errors.hpp"
#include "rss/infer/elr.hpp"
#include "rss/infer/mean.hpp"
#include "rss/numerics.hpp"

namespace rss {

inline double mann_whitney_kernel(double y1, double y2) {
  if (y2 > y1) return 1.0;
  if (y2 == y1) return 0.5;
  return 0.0;
}

namespace detail {

// Per-observation kernel sums. For group 1 observation i,
//   a1[h][i] = sum_h2 (1 / (H2 m_h2)) sum_s psi(y2_s - y1_i)
// and symmetrically for group 2, so that
//   delta_hat = sum_h (1 / (H1 n_h)) sum_i a1[h][i]
//             = sum_h (1 / (H2 m_h)) sum_j a2[h][j].
struct AucParts {
  std::vector<std::vector<double>> y1, y2;
  std::vector<std::vector<double>> a1, a2;
};

inline std::vector<std::vector<double>> auc_strata(const RssDataset& d, const char* label) {
  require_kind(d, OutcomeKind::continuous);
  auto s = partition_by_rank(d);
  for (std::size_t h = 0; h < s.size(); ++h) {
    if (s[h].empty()) {
      throw DataError(std::string("empty stratum in ") + label + ": rank " + std::to_string(h + 1) +
                      " has no observations");
    }
  }
  return s;
}

inline AucParts auc_parts(const RssDataset& d1, const RssDataset& d2) {
  AucParts p;
  p.y1 = auc_strata(d1, "group 1");
  p.y2 = auc_strata(d2, "group 2");
  const double H1 = static_cast<double>(p.y1.size());
  const double H2 = static_cast<double>(p.y2.size());
  p.a1.resize(p.y1.size());
  p.a2.resize(p.y2.size());
  for (std::size_t h = 0; h < p.y1.size(); ++h) p.a1[h].assign(p.y1[h].size(), 0.0);
  for (std::size_t h = 0; h < p.y2.size(); ++h) p.a2[h].assign(p.y2[h].size(), 0.0);

  for (std::size_t h1 = 0; h1 < p.y1.size(); ++h1) {
    const double w1 = 1.0 / (H1 * static_cast<double>(p.y1[h1].size()));
    for (std::size_t i = 0; i < p.y1[h1].size(); ++i) {
      for (std::size_t h2 = 0; h2 < p.y2.size(); ++h2) {
        const double w2 = 1.0 / (H2 * static_cast<double>(p.y2[h2].size()));
        for (std::size_t j = 0; j < p.y2[h2].size(); ++j) {
          const double k = mann_whitney_kernel(p.y1[h1][i], p.y2[h2][j]);
          p.a1[h1][i] += w2 * k;
          p.a2[h2][j] += w1 * k;
        }
      }
    }
  }
  return p;
}

// sum_h (1/(H n_h)) sum_i a[h][i]
inline double weighted_total(const std::vector<std::vector<double>>& a) {
  const double H = static_cast<double>(a.size());
  double t = 0.0;
  for (const auto& ah : a) {
    double s = 0.0;
    for (double v : ah) s += v;
    t += s / (H * static_cast<double>(ah.size()));
  }
  return t;
}

// Leave-one-out estimates for every observation of one group. `a` holds the
// kernel sums of that group. Removing the last observation of a stratum
// removes the stratum; the remaining strata are reweighted equally.
inline std::vector<double> leave_one_out(const std::vector<std::vector<double>>& a) {
  const std::size_t H = a.size();
  std::vector<double> mean(H);
  double all = 0.0;
  for (std::size_t h = 0; h < H; ++h) {
    double s = 0.0;
    for (double v : a[h]) s += v;
    mean[h] = s / static_cast<double>(a[h].size());
    all += mean[h];
  }
  std::vector<double> out;
  for (std::size_t h = 0; h < H; ++h) {
    const double n = static_cast<double>(a[h].size());
    const double sum_h = mean[h] * n;
    for (double v : a[h]) {
      if (a[h].size() > 1) {
        out.push_back((all - mean[h] + (sum_h - v) / (n - 1.0)) / static_cast<double>(H));
      } else if (H > 1) {
        out.push_back((all - mean[h]) / static_cast<double>(H - 1));
      } else {
        throw DataError("AUC jackknife: a group with a single observation cannot be left out");
      }
    }
  }
  return out;
}

}  // namespace detail

inline double rss_auc_estimate(const RssDataset& data1, const RssDataset& data2) {
  return detail::weighted_total(detail::auc_parts(data1, data2).a1);
}

/// V_i = N delta_hat - (N - 1) delta_hat_(-i), group 1 records first, each
/// group in rank-then-record order.
inline std::vector<double> auc_pseudo_values(const RssDataset& data1, const RssDataset& data2) {
  const auto parts = detail::auc_parts(data1, data2);
  const double delta = detail::weighted_total(parts.a1);
  auto loo = detail::leave_one_out(parts.a1);
  const auto loo2 = detail::leave_one_out(parts.a2);
  loo.insert(loo.end(), loo2.begin(), loo2.end());
  const double N = static_cast<double>(loo.size());
  std::vector<double> v;
  v.reserve(loo.size());
  for (double d : loo) v.push_back(N * delta - (N - 1.0) * d);
  return v;
}

inline TestResult rss_auc_test(const RssDataset& data1, const RssDataset& data2, double delta0,
                               double alpha = 0.05) {
  check_alpha(alpha);
  if (!(delta0 > 0.0 && delta0 < 1.0)) {
    throw DataError("delta0 must lie in (0,1), got " + std::to_string(delta0));
  }
  if (data1.size() + data2.size() < 4) {
    throw DataError("AUC test needs at least four observations in total");
  }
  const double estimate = rss_auc_estimate(data1, data2);
  const std::vector<std::vector<double>> v{auc_pseudo_values(data1, data2)};
  const auto [vmin, vmax] = std::minmax_element(v[0].begin(), v[0].end());
  if (*vmin == *vmax) {
    throw DegenerateError("AUC test: all jackknife pseudo-values are equal", estimate);
  }

  const auto profile = elr_profile(v, delta0);
  TestResult r;
  r.method = TestMethod::auc;
  r.alpha = alpha;
  r.alternative = Alternative::two_sided;
  r.estimate = estimate;
  r.statistic = profile.neg2_log_lr;
  r.feasible = profile.feasible;
  r.p_value = profile.feasible ? chisq1_sf(r.statistic) : 0.0;

  const detail::Hull hull{*vmin, *vmax};
  auto stat = [&](double d) { return elr_profile(v, d).neg2_log_lr; };
  auto [lo, hi] = el_interval(stat, sample_mean(v[0]), hull, chisq1_quantile(1.0 - alpha));
  r.ci_lower = std::clamp(lo, 0.0, 1.0);
  r.ci_upper = std::clamp(hi, 0.0, 1.0);
  return r;
}

}  // namespace rss
