#pragma once

// Proportion inference under perfect ranking. The stratum success
// probability is p_h = P(Bin(H, p) >= H-h+1); the variance of the estimator
// is estimated by plugging p_hat into every p_h.

#include <cmath>
#include <string>
#include <vector>

#include "rss/core.hpp"
#include "rss/errors.hpp"
#include "rss/infer/mean.hpp"
#include "rss/numerics.hpp"

namespace rss {

/// p_hat = (1/H) sum_h (1/n_h) sum_r Y_[h]r
inline double rss_proportion_estimate(const RssDataset& data) {
  require_kind(data, OutcomeKind::binary);
  const auto strata = partition_by_rank(data);
  double p = 0.0;
  for (std::size_t h = 0; h < strata.size(); ++h) {
    if (strata[h].empty()) {
      throw DataError("empty stratum: rank " + std::to_string(h + 1) + " has no observations");
    }
    p += sample_mean(strata[h]);
  }
  return p / static_cast<double>(strata.size());
}

/// (1/H^2) sum_h p_h (1 - p_h) / n_h with p_h evaluated at `p`.
inline double rss_proportion_variance(double p, const Allocation& counts) {
  const int H = counts.set_size();
  double v = 0.0;
  for (int h = 1; h <= H; ++h) {
    const double ph = binomial_tail(H, H - h + 1, p);
    v += ph * (1.0 - ph) / counts.count(h);
  }
  return v / (static_cast<double>(H) * H);
}

inline TestResult rss_prop_test(const RssDataset& data, double p0, double alpha = 0.05,
                                Alternative alt = Alternative::two_sided) {
  check_alpha(alpha);
  if (!(p0 > 0.0 && p0 < 1.0)) throw DataError("p0 must lie in (0,1), got " + std::to_string(p0));
  const double p_hat = rss_proportion_estimate(data);
  if (p_hat == 0.0 || p_hat == 1.0) {
    throw DegenerateError("proportion test: estimate " + std::to_string(p_hat) +
                              " gives a zero variance estimate",
                          p_hat);
  }
  const double se = std::sqrt(rss_proportion_variance(p_hat, stratum_counts(data)));
  return detail::pivot_test(TestMethod::prop, p_hat, se, p0, detail::Reference{}, alpha, alt);
}

}  // namespace rss
