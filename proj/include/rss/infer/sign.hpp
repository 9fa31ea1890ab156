#pragma once

// Sign test for the median under (un)balanced ranked set sampling.
//
// Under perfect ranking P(Y_[h] <= M) = beta_h = B(h, H-h+1, 1/2), so the
// count S+ of observations above M has mean sum_h n_h (1 - beta_h) and
// variance sum_h n_h beta_h (1 - beta_h). With n_h = m the standardised count
// reduces to (S+ - n/2) / (sqrt(n) eta / 2).

#include <algorithm>
#include <cmath>
#include <tuple>
#include <vector>

#include "rss/core.hpp"
#include "rss/errors.hpp"
#include "rss/infer/mean.hpp"
#include "rss/numerics.hpp"

namespace rss {

/// eta^2 = 1 - (4/H) sum_h (beta_h - 1/2)^2.
inline double sign_eta_squared(int H) {
  double s = 0.0;
  for (int h = 1; h <= H; ++h) {
    const double b = beta_half_cdf(h, H) - 0.5;
    s += b * b;
  }
  return 1.0 - 4.0 * s / H;
}

struct SignStatistic {
  int s_plus = 0;
  int n = 0;               // observations not tied with the median
  std::vector<int> counts; // per-stratum counts after dropping ties
  double centre = 0.0;
  double variance = 0.0;
  double z = 0.0;
};

/// Centre and variance of S+ for per-stratum counts `counts` with set size
/// `counts.size()`.
inline std::pair<double, double> sign_moments(const std::vector<int>& counts) {
  const int H = static_cast<int>(counts.size());
  double centre = 0.0, var = 0.0;
  for (int h = 1; h <= H; ++h) {
    const double b = beta_half_cdf(h, H);
    const double n = counts[static_cast<std::size_t>(h - 1)];
    centre += n * (1.0 - b);
    var += n * b * (1.0 - b);
  }
  return {centre, var};
}

inline SignStatistic sign_statistic(const std::vector<std::vector<double>>& strata, double median0) {
  SignStatistic s;
  s.counts.assign(strata.size(), 0);
  for (std::size_t h = 0; h < strata.size(); ++h) {
    for (double y : strata[h]) {
      if (y == median0) continue;
      ++s.counts[h];
      ++s.n;
      if (y > median0) ++s.s_plus;
    }
  }
  if (s.n == 0) throw DataError("sign test: every observation equals the hypothesised median");
  std::tie(s.centre, s.variance) = sign_moments(s.counts);
  s.z = (s.s_plus - s.centre) / std::sqrt(s.variance);
  return s;
}

/// Balanced-design form n^{-1/2} (S+ - n/2) / (eta / 2).
inline double brss_sign_z(int s_plus, int n, int H) {
  if (n < 1) throw DataError("sign test: n must be positive");
  const double eta = std::sqrt(sign_eta_squared(H));
  return (s_plus - 0.5 * n) / (std::sqrt(static_cast<double>(n)) * 0.5 * eta);
}

inline double pooled_median(std::vector<double> y) {
  if (y.empty()) throw DataError("median of an empty sample");
  std::sort(y.begin(), y.end());
  const std::size_t n = y.size();
  return n % 2 == 1 ? y[n / 2] : 0.5 * (y[n / 2 - 1] + y[n / 2]);
}

inline TestResult rss_sign_test(const RssDataset& data, double median0, double alpha = 0.05,
                                Alternative alt = Alternative::two_sided) {
  check_alpha(alpha);
  require_kind(data, OutcomeKind::continuous);
  const auto strata = partition_by_rank(data);
  const auto stat = sign_statistic(strata, median0);

  std::vector<double> pooled;
  for (const auto& ys : strata) pooled.insert(pooled.end(), ys.begin(), ys.end());

  TestResult r;
  r.method = TestMethod::sign;
  r.alpha = alpha;
  r.alternative = alt;
  r.estimate = pooled_median(pooled);
  r.statistic = stat.z;
  const detail::Reference normal{};
  r.p_value = detail::p_value(normal, stat.z, alt);

  // Invert the test over candidate medians. Between two consecutive distinct
  // order statistics the count above the candidate is constant, so each gap
  // is accepted or rejected as a whole.
  std::vector<int> full(strata.size());
  for (std::size_t h = 0; h < strata.size(); ++h) full[h] = static_cast<int>(strata[h].size());
  const auto [centre, var] = sign_moments(full);
  const double sd = std::sqrt(var);

  std::sort(pooled.begin(), pooled.end());
  std::vector<double> values;
  std::vector<int> above;  // observations above any point of gap k
  values.push_back(-kInf);
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    if (i == 0 || pooled[i] != pooled[i - 1]) {
      values.push_back(pooled[i]);
      above.push_back(static_cast<int>(pooled.size() - i));
    }
  }
  above.push_back(0);
  values.push_back(kInf);

  int first = -1, last = -1;
  for (std::size_t k = 0; k < above.size(); ++k) {
    const double z = (above[k] - centre) / sd;
    if (detail::p_value(normal, z, alt) > alpha) {
      if (first < 0) first = static_cast<int>(k);
      last = static_cast<int>(k);
    }
  }
  if (first < 0) {
    r.ci_lower = r.ci_upper = r.estimate;
  } else {
    r.ci_lower = values[static_cast<std::size_t>(first)];
    r.ci_upper = values[static_cast<std::size_t>(last) + 1];
  }
  return r;
}

}  // namespace rss
