#pragma once

// Synthetic ranked set samples under the linear ranking model X = Y + e,
// where e ~ N(0, s_e^2) is independent of Y and s_e^2 is calibrated so that
// Corr(X, Y) equals the requested ranking quality rho.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "rss/core.hpp"
#include "rss/errors.hpp"
#include "rss/numerics.hpp"
#include "rss/rng.hpp"

namespace rss {

enum class Distribution { normal, t, lognormal };

inline const char* to_string(Distribution d) {
  switch (d) {
    case Distribution::normal: return "normal";
    case Distribution::t: return "t";
    case Distribution::lognormal: return "lognormal";
  }
  return "?";
}

inline Distribution parse_distribution(std::string_view s) {
  if (s == "normal") return Distribution::normal;
  if (s == "t") return Distribution::t;
  if (s == "lognormal") return Distribution::lognormal;
  throw DataError("unknown distribution '" + std::string(s) + "' (expected normal, t or lognormal)");
}

struct SimConfig {
  int set_size = 3;
  Allocation allocation;
  Distribution dist = Distribution::normal;
  double rho = 1.0;
  double delta = 0.0;   // additive shift of the outcome
  double t_df = 3.0;    // used only for dist == t
  std::uint64_t seed = 0;
};

/// s_e^2 = s_Y^2 (1 - rho^2) / rho^2.
inline double noise_variance_for_rho(double sigma_y_sq, double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) {
    throw DataError("rho must lie in (0, 1], got " + std::to_string(rho));
  }
  if (!(sigma_y_sq > 0.0) || !std::isfinite(sigma_y_sq)) {
    throw DataError("outcome variance must be positive and finite");
  }
  return sigma_y_sq * (1.0 - rho * rho) / (rho * rho);
}

inline void check_t_df(double t_df) {
  if (!(t_df > 2.0) || !std::isfinite(t_df)) {
    throw DataError("t degrees of freedom must exceed 2 for a finite variance, got " +
                    std::to_string(t_df));
  }
}

/// Variance of the unshifted base distribution: N(0,1), t(df), lognormal(0,1).
inline double base_variance(Distribution dist, double t_df = 3.0) {
  switch (dist) {
    case Distribution::normal: return 1.0;
    case Distribution::t: check_t_df(t_df); return t_df / (t_df - 2.0);
    case Distribution::lognormal: return (std::numbers::e - 1.0) * std::numbers::e;
  }
  return kNaN;
}

inline double base_mean(Distribution dist) {
  return dist == Distribution::lognormal ? std::exp(0.5) : 0.0;
}

inline double draw_base(Distribution dist, double t_df, Rng& rng) {
  switch (dist) {
    case Distribution::normal: return rng.normal();
    case Distribution::t: return rng.student_t(t_df);
    case Distribution::lognormal: return std::exp(rng.normal());
  }
  return kNaN;
}

/// One simulated set in ranked (ascending x) order, for instrumentation.
struct SimulatedSet {
  int rank = 1;
  std::vector<double> y;
  std::vector<double> x;
};

using SimObserver = std::function<void(const SimulatedSet&)>;

inline void check_sim_config(const SimConfig& cfg) {
  if (cfg.set_size < 1) throw DataError("set size must be at least 1");
  if (cfg.allocation.set_size() != cfg.set_size) {
    throw DataError("allocation length " + std::to_string(cfg.allocation.set_size()) +
                    " does not match set size " + std::to_string(cfg.set_size));
  }
  if (cfg.allocation.total() < 1) throw DataError("allocation total must be at least 1");
  if (!(cfg.rho > 0.0 && cfg.rho <= 1.0)) {
    throw DataError("rho must lie in (0, 1], got " + std::to_string(cfg.rho));
  }
  if (cfg.dist == Distribution::t) check_t_df(cfg.t_df);
  if (!std::isfinite(cfg.delta)) throw DataError("delta must be finite");
}

inline RssDataset rss_simulate(const SimConfig& cfg, const SimObserver& observer = {}) {
  check_sim_config(cfg);
  const double noise_sd =
      std::sqrt(noise_variance_for_rho(base_variance(cfg.dist, cfg.t_df), cfg.rho));
  const int H = cfg.set_size;
  Rng rng(cfg.seed);

  RssDataset out;
  out.set_size = H;
  out.kind = OutcomeKind::continuous;
  out.records.reserve(static_cast<std::size_t>(cfg.allocation.total()));

  std::vector<std::pair<double, double>> set(static_cast<std::size_t>(H));  // (x, y)
  std::vector<int> filled(static_cast<std::size_t>(H), 0);
  bool open = true;
  while (open) {
    open = false;
    for (int h = 1; h <= H; ++h) {
      auto& done = filled[static_cast<std::size_t>(h - 1)];
      if (done >= cfg.allocation.count(h)) continue;
      for (auto& unit : set) {
        const double y = draw_base(cfg.dist, cfg.t_df, rng) + cfg.delta;
        const double x = noise_sd > 0.0 ? y + noise_sd * rng.normal() : y;
        unit = {x, y};
      }
      std::sort(set.begin(), set.end());
      if (observer) {
        SimulatedSet s;
        s.rank = h;
        for (const auto& [x, y] : set) {
          s.x.push_back(x);
          s.y.push_back(y);
        }
        observer(s);
      }
      out.records.push_back(RssRecord{h, std::nullopt, set[static_cast<std::size_t>(h - 1)].second});
      if (++done < cfg.allocation.count(h)) open = true;
    }
  }
  return sorted_by_rank(std::move(out));
}

/// P(Y_[h] = 1) under perfect ranking: at least H-h+1 successes among H.
inline double stratum_success_probability(int h, int H, double p) {
  return binomial_tail(H, H - h + 1, p);
}

inline RssDataset rss_prop_simulate(int set_size, const Allocation& alloc, double p,
                                    std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw DataError("p must lie in [0, 1], got " + std::to_string(p));
  if (set_size < 1) throw DataError("set size must be at least 1");
  if (alloc.set_size() != set_size) {
    throw DataError("allocation length " + std::to_string(alloc.set_size()) +
                    " does not match set size " + std::to_string(set_size));
  }
  if (alloc.total() < 1) throw DataError("allocation total must be at least 1");

  std::vector<double> ph(static_cast<std::size_t>(set_size));
  for (int h = 1; h <= set_size; ++h) {
    ph[static_cast<std::size_t>(h - 1)] = stratum_success_probability(h, set_size, p);
  }
  Rng rng(seed);
  RssDataset out;
  out.set_size = set_size;
  out.kind = OutcomeKind::binary;
  std::vector<int> filled(static_cast<std::size_t>(set_size), 0);
  bool open = true;
  while (open) {
    open = false;
    for (int h = 1; h <= set_size; ++h) {
      auto& done = filled[static_cast<std::size_t>(h - 1)];
      if (done >= alloc.count(h)) continue;
      const bool success = rng.bernoulli(ph[static_cast<std::size_t>(h - 1)]);
      out.records.push_back(RssRecord{h, std::nullopt, success ? 1.0 : 0.0});
      if (++done < alloc.count(h)) open = true;
    }
  }
  return sorted_by_rank(std::move(out));
}

}  // namespace rss
