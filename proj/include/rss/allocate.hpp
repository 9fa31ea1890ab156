#pragma once

// Sample allocation for unbalanced ranked set sampling. Variance of the
// mean estimator for allocation n is proportional to sum_h s_h^2 / n_h.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "rss/core.hpp"
#include "rss/errors.hpp"
#include "rss/infer/mean.hpp"
#include "rss/infer/prop.hpp"
#include "rss/numerics.hpp"

namespace rss {

struct StratumStats {
  std::vector<double> sd;
  Allocation counts;

  int set_size() const { return static_cast<int>(sd.size()); }
  bool all_zero() const {
    return std::all_of(sd.begin(), sd.end(), [](double s) { return s == 0.0; });
  }
};

inline void check_stats(const StratumStats& stats) {
  if (stats.sd.empty()) throw DataError("stratum statistics are empty");
  for (double s : stats.sd) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw DataError("stratum standard deviations must be finite and >= 0");
  }
}

inline StratumStats stratum_stats(const RssDataset& data) {
  const auto strata = partition_by_rank(data);
  StratumStats st;
  st.counts = stratum_counts(data);
  for (std::size_t h = 0; h < strata.size(); ++h) {
    if (strata[h].size() < 2) {
      throw DataError("stratum " + std::to_string(h + 1) + " has " + std::to_string(strata[h].size()) +
                      " observation(s); at least 2 are needed for a standard deviation");
    }
    st.sd.push_back(std::sqrt(sample_variance(strata[h])));
  }
  return st;
}

inline double estimated_variance(const StratumStats& stats, const Allocation& alloc) {
  check_stats(stats);
  if (alloc.set_size() != stats.set_size()) throw DataError("allocation length does not match the statistics");
  const double H = stats.set_size();
  double v = 0.0;
  for (int h = 1; h <= stats.set_size(); ++h) {
    const double s = stats.sd[static_cast<std::size_t>(h - 1)];
    if (s == 0.0) continue;
    if (alloc.count(h) < 1) {
      throw DataError("zero count in stratum " + std::to_string(h) + " with positive spread");
    }
    v += s * s / alloc.count(h);
  }
  return v / (H * H);
}

/// Priority-value integer Neyman allocation with every n_h >= 1. When every
/// s_h is zero the allocation is undefined and a balanced one is returned,
/// remainder to the lowest ranks; callers detect this via all_zero().
inline Allocation integer_neyman(const StratumStats& stats, int total) {
  check_stats(stats);
  const int H = stats.set_size();
  if (total < H) {
    throw DataError("total " + std::to_string(total) + " is below the set size " + std::to_string(H));
  }
  std::vector<int> n(static_cast<std::size_t>(H), 1);
  if (stats.all_zero()) {
    for (int k = 0; k < total - H; ++k) ++n[static_cast<std::size_t>(k % H)];
    return Allocation(std::move(n));
  }
  for (int k = H; k < total; ++k) {
    std::size_t best = 0;
    double best_priority = -1.0;
    for (std::size_t h = 0; h < n.size(); ++h) {
      const double c = n[h];
      const double priority = stats.sd[h] / std::sqrt(c * (c + 1.0));
      if (priority > best_priority) {
        best_priority = priority;
        best = h;
      }
    }
    ++n[best];
  }
  return Allocation(std::move(n));
}

inline Allocation componentwise_max(const Allocation& a, const Allocation& b) {
  if (a.set_size() != b.set_size()) throw DataError("allocation sizes differ");
  std::vector<int> out(static_cast<std::size_t>(a.set_size()));
  for (int h = 1; h <= a.set_size(); ++h) out[static_cast<std::size_t>(h - 1)] = std::max(a.count(h), b.count(h));
  return Allocation(std::move(out));
}

inline Allocation adjusted_neyman(const Allocation& original, const StratumStats& stats) {
  if (original.set_size() != stats.set_size()) throw DataError("allocation length does not match the statistics");
  return componentwise_max(original, integer_neyman(stats, original.total()));
}

/// sum_h s_h^2 / n_h <= (H / N) sum_h s_h^2: the unbalanced design is at least
/// as efficient as a balanced one of the same total N.
inline bool beats_balanced(const StratumStats& stats, const Allocation& n) {
  const double H = stats.set_size();
  double lhs = 0.0, ss = 0.0;
  for (int h = 1; h <= stats.set_size(); ++h) {
    const double s = stats.sd[static_cast<std::size_t>(h - 1)];
    ss += s * s;
    if (s == 0.0) continue;
    if (n.count(h) == 0) return false;
    lhs += s * s / n.count(h);
  }
  return lhs <= (H / n.total()) * ss * (1.0 + 1e-12);
}

/// Stratum order agrees with the order of s (s_i < s_j implies n_i <= n_j).
inline bool ratio_consistent(const StratumStats& stats, const Allocation& n) {
  for (int i = 1; i <= stats.set_size(); ++i) {
    for (int j = 1; j <= stats.set_size(); ++j) {
      if (stats.sd[static_cast<std::size_t>(i - 1)] < stats.sd[static_cast<std::size_t>(j - 1)] &&
          n.count(i) > n.count(j)) {
        return false;
      }
    }
  }
  return true;
}

/// Smallest dominating allocation that is ratio consistent and beats the
/// balanced design at its own total.
///
/// First every stratum is raised to the largest count of any stratum with a
/// smaller s; no ratio-consistent allocation above `original` is smaller in
/// any component. Units are then added one at a time where they reduce
/// sum s^2/n the most, which keeps the order consistent.
inline Allocation lrc_allocation(const Allocation& original, const StratumStats& stats) {
  check_stats(stats);
  const int H = stats.set_size();
  if (original.set_size() != H) throw DataError("allocation length does not match the statistics");
  if (original.total() < H) {
    throw DataError("original total " + std::to_string(original.total()) + " is below the set size " +
                    std::to_string(H));
  }
  std::vector<std::size_t> order(static_cast<std::size_t>(H));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return stats.sd[a] < stats.sd[b]; });

  std::vector<int> n = original.counts();
  int floor_below = 0;  // largest count among strata with strictly smaller s
  for (std::size_t k = 0; k < order.size();) {
    std::size_t end = k;
    while (end < order.size() && stats.sd[order[end]] == stats.sd[order[k]]) ++end;
    int group_max = 0;
    for (std::size_t i = k; i < end; ++i) {
      auto& c = n[order[i]];
      c = std::max(c, floor_below);
      group_max = std::max(group_max, c);
    }
    floor_below = std::max(floor_below, group_max);
    k = end;
  }

  constexpr int kMaxAdditions = 1000000;
  for (int added = 0;; ++added) {
    Allocation cur(n);
    if (beats_balanced(stats, cur)) return cur;
    if (added >= kMaxAdditions) throw NumericalError("LRC allocation did not converge");
    std::size_t best = 0;
    double best_gain = -1.0;
    for (std::size_t h = 0; h < n.size(); ++h) {
      const double s2 = stats.sd[h] * stats.sd[h];
      const double c = n[h];
      const double gain = s2 == 0.0 ? 0.0 : (c == 0.0 ? kInf : s2 / (c * (c + 1.0)));
      if (gain > best_gain) {
        best_gain = gain;
        best = h;
      }
    }
    ++n[best];
  }
}

/// n_h = N w_h / sum w, w_h = sqrt(p_h (1 - p_h)), p_h = P(Bin(H, p) >= H-h+1).
inline std::vector<double> neyman_proportion(double p_hat, int H, double total) {
  if (!(p_hat > 0.0 && p_hat < 1.0)) {
    throw DataError("Neyman allocation for a proportion needs 0 < p < 1, got " + std::to_string(p_hat));
  }
  if (H < 1) throw DataError("set size must be at least 1");
  std::vector<double> w(static_cast<std::size_t>(H));
  double sum = 0.0;
  for (int h = 1; h <= H; ++h) {
    // Both tails directly: 1 - p_h by subtraction loses digits when p_h is near 1.
    const double ph = binomial_tail(H, H - h + 1, p_hat);
    const double qh = binomial_tail(H, h, 1.0 - p_hat);
    w[static_cast<std::size_t>(h - 1)] = std::sqrt(ph * qh);
    sum += w[static_cast<std::size_t>(h - 1)];
  }
  for (double& x : w) x = total * x / sum;
  return w;
}

inline DesignReport design_report(const Allocation& original, const StratumStats& stats) {
  DesignReport rep;
  rep.original = original;
  if (stats.all_zero()) {
    rep.warnings.push_back("all stratum standard deviations are zero; integer Neyman allocation falls back to a balanced design");
  }
  const auto ney = integer_neyman(stats, original.total());
  const auto adj = componentwise_max(original, ney);
  const auto lrc = lrc_allocation(original, stats);
  rep.recommendations.emplace("integer_neyman", ney);
  rep.recommendations.emplace("adjusted_neyman", adj);
  rep.recommendations.emplace("lrc", lrc);
  rep.additions.emplace("adjusted_neyman", additions(adj, original));
  rep.additions.emplace("lrc", additions(lrc, original));
  return rep;
}

inline DesignReport design_report(const RssDataset& data, bool prop) {
  if (prop) {
    if (data.kind != OutcomeKind::binary) throw DataError("proportion design requires a binary dataset");
    DesignReport rep;
    rep.original = stratum_counts(data);
    rep.neyman_proportion =
        neyman_proportion(rss_proportion_estimate(data), data.set_size, rep.original.total());
    return rep;
  }
  if (data.kind != OutcomeKind::continuous) {
    throw DataError("binary dataset given without the proportion flag");
  }
  return design_report(stratum_counts(data), stratum_stats(data));
}

}  // namespace rss
