#pragma once

// Ranked set sampling from a finite population.
//
// In cycle r = 1, 2, ... every stratum h whose quota n_h is still open draws
// H units without replacement from the current pool, ranks them by the
// auxiliary value x and measures the unit ranked h-th. Strata whose quota is
// met stop drawing, which yields the incomplete cycles of unbalanced designs.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rss/core.hpp"
#include "rss/errors.hpp"
#include "rss/rng.hpp"

namespace rss {

enum class PoolPolicy {
  discard_set,        // all H drawn units leave the pool
  return_unmeasured,  // the H-1 unmeasured units go back into the pool
};

struct SamplingConfig {
  int set_size = 3;
  Allocation allocation;
  PoolPolicy pool_policy = PoolPolicy::discard_set;
  std::uint64_t seed = 0;
};

/// One ranked set, exposed for instrumentation. `rows` holds the drawn
/// population row indices in ranked order.
struct SetDraw {
  int rank = 1;
  std::vector<std::size_t> rows;
  std::vector<double> x;  // auxiliary values in ranked order
  std::size_t selected = 0;
};

using SetObserver = std::function<void(const SetDraw&)>;

/// Stateful sampler over one population. Successive draw() calls continue
/// from the pool left by earlier calls, so follow-up samples never reuse
/// units that were already drawn (or measured, under return_unmeasured).
class RankedSetSampler {
 public:
  RankedSetSampler(const PopulationFrame& pop, int set_size, PoolPolicy policy, std::uint64_t seed)
      : pop_(&pop), set_size_(set_size), policy_(policy), rng_(seed) {
    if (set_size < 2) throw DataError("set size H must be at least 2, got " + std::to_string(set_size));
    pool_.resize(pop.size());
    for (std::size_t i = 0; i < pool_.size(); ++i) pool_[i] = i;
  }

  std::size_t remaining() const { return pool_.size(); }
  int set_size() const { return set_size_; }

  /// Continuous outcomes: ranks by x, reports the population y (absent when
  /// the population carries no outcome column at all).
  RssDataset draw(const Allocation& alloc, const SetObserver& observer = {}) {
    return draw_impl(alloc, observer, false);
  }

  /// Binary outcomes under perfect ranking: x must be 0/1 and y := x.
  RssDataset draw_binary(const Allocation& alloc, const SetObserver& observer = {}) {
    for (std::size_t i = 0; i < pop_->size(); ++i) {
      const double x = pop_->rows[i].x;
      if (x != 0.0 && x != 1.0) {
        throw DataError("non-binary auxiliary value " + std::to_string(x) + " in population row " +
                        std::to_string(i + 1));
      }
    }
    return draw_impl(alloc, observer, true);
  }

  /// Units needed in the pool to complete `alloc` under the pool policy.
  std::size_t required_pool(const Allocation& alloc) const {
    const auto total = static_cast<std::size_t>(alloc.total());
    const auto H = static_cast<std::size_t>(set_size_);
    if (total == 0) return 0;
    return policy_ == PoolPolicy::discard_set ? H * total : total - 1 + H;
  }

 private:
  RssDataset draw_impl(const Allocation& alloc, const SetObserver& observer, bool binary) {
    if (alloc.set_size() != set_size_) {
      throw DataError("allocation length " + std::to_string(alloc.set_size()) +
                      " does not match set size " + std::to_string(set_size_));
    }
    if (alloc.total() < 1) throw DataError("allocation total must be at least 1");
    const std::size_t need = required_pool(alloc);
    if (pool_.size() < need) {
      throw DataError("infeasible population size: " + std::to_string(pool_.size()) +
                      " units available, " + std::to_string(need) + " required");
    }

    const bool with_outcome = binary || pop_->has_outcomes();
    RssDataset out;
    out.set_size = set_size_;
    out.kind = binary ? OutcomeKind::binary : OutcomeKind::continuous;
    out.records.reserve(static_cast<std::size_t>(alloc.total()));

    std::vector<int> filled(static_cast<std::size_t>(set_size_), 0);
    std::vector<std::pair<double, std::size_t>> keyed;  // (tie-break key, row)
    std::vector<std::size_t> drawn;
    bool open = true;
    while (open) {
      open = false;
      for (int h = 1; h <= set_size_; ++h) {
        auto& done = filled[static_cast<std::size_t>(h - 1)];
        if (done >= alloc.count(h)) continue;

        drawn.clear();
        for (int k = 0; k < set_size_; ++k) {
          const auto j = static_cast<std::size_t>(rng_.below(pool_.size()));
          drawn.push_back(pool_[j]);
          pool_[j] = pool_.back();
          pool_.pop_back();
        }
        // Equal x values are ordered by an independent uniform key.
        keyed.clear();
        for (std::size_t row : drawn) keyed.emplace_back(rng_.uniform(), row);
        std::sort(keyed.begin(), keyed.end(), [&](const auto& a, const auto& b) {
          const double xa = pop_->rows[a.second].x, xb = pop_->rows[b.second].x;
          if (xa != xb) return xa < xb;
          return a.first < b.first;
        });

        const std::size_t chosen = keyed[static_cast<std::size_t>(h - 1)].second;
        if (policy_ == PoolPolicy::return_unmeasured) {
          for (const auto& kr : keyed) {
            if (kr.second != chosen) pool_.push_back(kr.second);
          }
        }
        if (observer) {
          SetDraw sd;
          sd.rank = h;
          sd.selected = chosen;
          for (const auto& kr : keyed) {
            sd.rows.push_back(kr.second);
            sd.x.push_back(pop_->rows[kr.second].x);
          }
          observer(sd);
        }

        const auto& row = pop_->rows[chosen];
        RssRecord rec;
        rec.rank = h;
        rec.id = row.id;
        if (binary) {
          rec.y = row.x;
        } else if (with_outcome) {
          rec.y = row.y;
        }
        out.records.push_back(std::move(rec));
        ++done;
        if (done < alloc.count(h)) open = true;
      }
    }
    return sorted_by_rank(std::move(out));
  }

  const PopulationFrame* pop_;
  int set_size_;
  PoolPolicy policy_;
  Rng rng_;
  std::vector<std::size_t> pool_;
};

inline void check_sampling_config(const PopulationFrame& pop, const SamplingConfig& cfg) {
  if (cfg.set_size < 2) throw DataError("set size H must be at least 2, got " + std::to_string(cfg.set_size));
  if (cfg.allocation.set_size() != cfg.set_size) {
    throw DataError("allocation length " + std::to_string(cfg.allocation.set_size()) +
                    " does not match set size " + std::to_string(cfg.set_size));
  }
  if (cfg.allocation.total() < 1) throw DataError("allocation total must be at least 1");
  validate_population(pop);
}

inline RssDataset rss_sample(const PopulationFrame& pop, const SamplingConfig& cfg,
                             const SetObserver& observer = {}) {
  check_sampling_config(pop, cfg);
  RankedSetSampler sampler(pop, cfg.set_size, cfg.pool_policy, cfg.seed);
  return sampler.draw(cfg.allocation, observer);
}

inline RssDataset rss_prop_sample(const PopulationFrame& pop, const SamplingConfig& cfg,
                                  const SetObserver& observer = {}) {
  check_sampling_config(pop, cfg);
  RankedSetSampler sampler(pop, cfg.set_size, cfg.pool_policy, cfg.seed);
  return sampler.draw_binary(cfg.allocation, observer);
}

/// Simple random sample of `n` row indices without replacement.
inline std::vector<std::size_t> simple_random_sample(std::size_t population_size, std::size_t n,
                                                     Rng& rng) {
  if (n > population_size) {
    throw DataError("simple random sample of " + std::to_string(n) + " from a population of " +
                    std::to_string(population_size));
  }
  std::vector<std::size_t> idx(population_size);
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(population_size - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n);
  return idx;
}

}  // namespace rss
