#pragma once

// Stratified empirical likelihood for a mean.
//
// Maximise prod_h prod_r p_hr subject to sum_r p_hr = 1/H in every stratum
// and sum_hr p_hr y_hr = mu0. The Lagrange solution has the form
//   p_hr = 1 / (g_h + lambda z_hr),   z_hr = (y_hr - mu0) / scale,
// where g_h solves sum_r p_hr = 1/H for a given lambda, and lambda solves
// the mean constraint. The inner equation is convex and decreasing in g_h,
// so Newton from the left end of its bracket converges monotonically. The
// outer mean function is strictly decreasing in lambda.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rss/core.hpp"
#include "rss/errors.hpp"
#include "rss/infer/mean.hpp"
#include "rss/numerics.hpp"

namespace rss {

struct ElrProfile {
  double mu0 = 0.0;
  double neg2_log_lr = 0.0;
  bool feasible = true;
  // weights[h][r] in record order within each stratum.
  std::vector<std::vector<double>> weights;
  // p_hr = 1 / (stratum_multipliers[h] + global_multiplier * y_hr)
  std::vector<double> stratum_multipliers;
  double global_multiplier = 0.0;
};

namespace detail {

struct StratumSolve {
  double g = 0.0;
  std::vector<double> d;  // g + lambda z_r, all positive
};

inline StratumSolve solve_stratum(const std::vector<double>& z, double lambda, double H) {
  double gmin = -kInf;
  for (double zr : z) gmin = std::max(gmin, -lambda * zr);
  const double n = static_cast<double>(z.size());
  const double hi = gmin + H * n;
  double g = gmin + H;
  auto excess = [&](double gg, double* deriv) {
    double f = -1.0 / H, df = 0.0;
    for (double zr : z) {
      const double d = gg + lambda * zr;
      f += 1.0 / d;
      df -= 1.0 / (d * d);
    }
    if (deriv) *deriv = df;
    return f;
  };
  if (z.size() > 1) {
    for (int it = 0; it < 200; ++it) {
      double df = 0.0;
      const double f = excess(g, &df);
      if (f <= 0.0) break;
      const double step = -f / df;
      const double next = std::min(g + step, hi);
      if (!(next > g)) break;
      g = next;
      if (step <= 1e-15 * std::max(1.0, std::abs(g))) break;
    }
  }
  StratumSolve out;
  out.g = g;
  out.d.reserve(z.size());
  for (double zr : z) {
    const double d = g + lambda * zr;
    if (!(d > 0.0)) {
      throw NumericalError("empirical likelihood: non-positive weight denominator (lambda = " +
                           std::to_string(lambda) + ")");
    }
    out.d.push_back(d);
  }
  return out;
}

inline std::vector<std::vector<double>> standardise(const std::vector<std::vector<double>>& strata,
                                                    double mu0, double scale) {
  std::vector<std::vector<double>> z(strata.size());
  for (std::size_t h = 0; h < strata.size(); ++h) {
    z[h].reserve(strata[h].size());
    for (double y : strata[h]) z[h].push_back((y - mu0) / scale);
  }
  return z;
}

// sum_hr z_hr p_hr for a given lambda.
inline double weighted_mean(const std::vector<std::vector<double>>& z, double lambda, double H) {
  double m = 0.0;
  for (const auto& zh : z) {
    const auto s = solve_stratum(zh, lambda, H);
    for (std::size_t r = 0; r < zh.size(); ++r) m += zh[r] / s.d[r];
  }
  return m;
}

struct Hull {
  double lo = 0.0, hi = 0.0;
};

// ((1/H) sum_h min_r y_hr, (1/H) sum_h max_r y_hr)
inline Hull mean_hull(const std::vector<std::vector<double>>& strata) {
  Hull b;
  for (const auto& ys : strata) {
    b.lo += *std::min_element(ys.begin(), ys.end());
    b.hi += *std::max_element(ys.begin(), ys.end());
  }
  const double H = static_cast<double>(strata.size());
  b.lo /= H;
  b.hi /= H;
  return b;
}

inline void check_strata(const std::vector<std::vector<double>>& strata) {
  if (strata.empty()) throw DataError("empirical likelihood needs at least one stratum");
  for (std::size_t h = 0; h < strata.size(); ++h) {
    if (strata[h].empty()) {
      throw DataError("empty stratum: rank " + std::to_string(h + 1) + " has no observations");
    }
  }
}

}  // namespace detail

inline ElrProfile elr_profile(const std::vector<std::vector<double>>& strata, double mu0) {
  detail::check_strata(strata);
  const double H = static_cast<double>(strata.size());
  const auto hull = detail::mean_hull(strata);

  ElrProfile out;
  out.mu0 = mu0;
  auto uniform = [&] {
    out.neg2_log_lr = 0.0;
    out.weights.clear();
    out.stratum_multipliers.clear();
    for (const auto& ys : strata) {
      const double n = static_cast<double>(ys.size());
      out.weights.emplace_back(ys.size(), 1.0 / (H * n));
      out.stratum_multipliers.push_back(H * n);
    }
    out.global_multiplier = 0.0;
  };

  if (hull.lo == hull.hi) {
    // Every stratum is constant: the only attainable mean is the hull point.
    if (mu0 == hull.lo) {
      uniform();
    } else {
      out.feasible = false;
      out.neg2_log_lr = kInf;
    }
    return out;
  }
  if (!(mu0 > hull.lo && mu0 < hull.hi)) {
    out.feasible = false;
    out.neg2_log_lr = kInf;
    return out;
  }

  const double scale = hull.hi - hull.lo;
  const auto z = detail::standardise(strata, mu0, scale);
  auto M = [&](double lambda) { return detail::weighted_mean(z, lambda, H); };

  const double m0 = M(0.0);
  double lambda = 0.0;
  if (m0 != 0.0) {
    const double dir = m0 > 0.0 ? 1.0 : -1.0;
    double far = dir;
    int grow = 0;
    while (dir * M(far) > 0.0) {
      far *= 2.0;
      if (++grow > 200) throw NumericalError("empirical likelihood: multiplier bracket not found");
    }
    RootBracket b;
    b.lo = std::min(0.0, far);
    b.hi = std::max(0.0, far);
    b.tol = 1e-15;
    b.max_iter = 500;
    lambda = find_root(M, b);
  }

  double stat = 0.0;
  out.weights.resize(z.size());
  out.stratum_multipliers.resize(z.size());
  out.global_multiplier = lambda / scale;
  for (std::size_t h = 0; h < z.size(); ++h) {
    const auto s = detail::solve_stratum(z[h], lambda, H);
    const double n = static_cast<double>(z[h].size());
    auto& w = out.weights[h];
    w.resize(z[h].size());
    for (std::size_t r = 0; r < z[h].size(); ++r) {
      w[r] = 1.0 / s.d[r];
      stat += std::log(s.d[r] / (H * n));
    }
    out.stratum_multipliers[h] = s.g - out.global_multiplier * mu0;
  }
  out.neg2_log_lr = std::max(0.0, 2.0 * stat);
  return out;
}

/// {mu : -2 log LR(mu) <= crit} inside the hull, searched outward from the
/// centre, where the statistic is zero. `stat` may return +inf.
template <class Stat>
std::pair<double, double> el_interval(Stat&& stat, double centre, detail::Hull hull, double crit) {
  // Hypotheses a hair inside the hull can defeat the multiplier solve; the
  // statistic there is far above any critical value anyway.
  auto f = [&](double mu) {
    try {
      return stat(mu) - crit;
    } catch (const NumericalError&) {
      return kInf;
    }
  };
  const double tol = 1e-9 / std::max({1.0, std::abs(hull.lo), std::abs(hull.hi)});
  std::pair<double, double> ci{centre, centre};
  if (centre > hull.lo) {
    RootBracket b{hull.lo, centre, tol, 400};
    ci.first = f(hull.lo) <= 0.0 ? hull.lo : find_root(f, b);
  }
  if (centre < hull.hi) {
    RootBracket b{centre, hull.hi, tol, 400};
    ci.second = f(hull.hi) <= 0.0 ? hull.hi : find_root(f, b);
  }
  return ci;
}

struct ElrTest {
  TestResult result;
  ElrProfile profile;
};

inline ElrTest rss_elr_test(const RssDataset& data, double mu0, double alpha = 0.05) {
  check_alpha(alpha);
  require_kind(data, OutcomeKind::continuous);
  const auto strata = partition_by_rank(data);
  detail::check_strata(strata);

  double mu_hat = 0.0;
  for (const auto& ys : strata) mu_hat += sample_mean(ys);
  mu_hat /= static_cast<double>(strata.size());

  ElrTest out;
  out.profile = elr_profile(strata, mu0);
  auto& r = out.result;
  r.method = TestMethod::elr;
  r.alpha = alpha;
  r.alternative = Alternative::two_sided;
  r.estimate = mu_hat;
  r.statistic = out.profile.neg2_log_lr;
  r.feasible = out.profile.feasible;
  r.p_value = out.profile.feasible ? chisq1_sf(r.statistic) : 0.0;

  const auto hull = detail::mean_hull(strata);
  const double centre = std::clamp(mu_hat, hull.lo, hull.hi);
  auto stat = [&](double mu) { return elr_profile(strata, mu).neg2_log_lr; };
  const auto [lo, hi] = el_interval(stat, centre, hull, chisq1_quantile(1.0 - alpha));
  r.ci_lower = lo;
  r.ci_upper = hi;
  return out;
}

}  // namespace rss
