#pragma once

// Shared domain types: ranked set sample records and datasets, allocations,
// finite population frames and test results.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "rss/errors.hpp"

namespace rss {

enum class OutcomeKind { continuous, binary };

/// One measured (or selected) unit. `rank` is the 1-based stratum h.
/// `y` is absent for selection sheets and for units whose outcome is missing.
struct RssRecord {
  int rank = 1;
  std::optional<std::string> id;
  std::optional<double> y;

  bool operator==(const RssRecord&) const = default;
};

/// Per-stratum counts (n_1, ..., n_H). Ranks are 1-based in the public API.
class Allocation {
 public:
  Allocation() = default;
  explicit Allocation(std::vector<int> counts) : counts_(std::move(counts)) {
    for (int c : counts_) {
      if (c < 0) throw DataError("allocation counts must be non-negative");
    }
  }
  Allocation(std::initializer_list<int> counts) : Allocation(std::vector<int>(counts)) {}

  static Allocation balanced(int set_size, int per_stratum) {
    return Allocation(std::vector<int>(static_cast<std::size_t>(set_size), per_stratum));
  }

  int set_size() const { return static_cast<int>(counts_.size()); }
  int count(int rank) const { return counts_.at(static_cast<std::size_t>(rank - 1)); }
  const std::vector<int>& counts() const { return counts_; }

  int total() const { return std::accumulate(counts_.begin(), counts_.end(), 0); }
  int min_count() const {
    return counts_.empty() ? 0 : *std::min_element(counts_.begin(), counts_.end());
  }
  bool is_balanced() const {
    return std::adjacent_find(counts_.begin(), counts_.end(), std::not_equal_to<>()) ==
           counts_.end();
  }
  bool dominates(const Allocation& other) const {
    if (other.set_size() != set_size()) return false;
    for (std::size_t i = 0; i < counts_.size(); ++i) {
      if (counts_[i] < other.counts_[i]) return false;
    }
    return true;
  }

  bool operator==(const Allocation&) const = default;

 private:
  std::vector<int> counts_;
};

// Componentwise a - b.
inline Allocation additions(const Allocation& target, const Allocation& original) {
  if (target.set_size() != original.set_size()) {
    throw DataError("allocation sizes differ");
  }
  std::vector<int> out(static_cast<std::size_t>(target.set_size()));
  for (int h = 1; h <= target.set_size(); ++h) {
    out[static_cast<std::size_t>(h - 1)] = target.count(h) - original.count(h);
  }
  return Allocation(std::move(out));
}

struct RssDataset {
  int set_size = 2;
  OutcomeKind kind = OutcomeKind::continuous;
  std::vector<RssRecord> records;

  std::size_t size() const { return records.size(); }
  bool has_ids() const {
    return std::any_of(records.begin(), records.end(), [](const auto& r) { return r.id.has_value(); });
  }
  bool has_outcomes() const {
    return std::any_of(records.begin(), records.end(), [](const auto& r) { return r.y.has_value(); });
  }
  bool complete() const {
    return std::all_of(records.begin(), records.end(), [](const auto& r) { return r.y.has_value(); });
  }

  bool operator==(const RssDataset&) const = default;
};

inline const char* to_string(OutcomeKind k) {
  return k == OutcomeKind::binary ? "binary" : "continuous";
}

inline RssDataset validate_dataset(RssDataset data) {
  if (data.set_size < 1) {
    throw DataError("set size must be at least 1, got " + std::to_string(data.set_size));
  }
  if (data.records.empty()) throw DataError("empty dataset");
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    const auto& r = data.records[i];
    if (r.rank < 1 || r.rank > data.set_size) {
      throw DataError("rank out of range: record " + std::to_string(i + 1) + " has rank " +
                      std::to_string(r.rank) + " but set size is " + std::to_string(data.set_size));
    }
    if (r.y) {
      if (!std::isfinite(*r.y)) {
        throw DataError("non-finite outcome in record " + std::to_string(i + 1));
      }
      if (data.kind == OutcomeKind::binary && *r.y != 0.0 && *r.y != 1.0) {
        throw DataError("non-binary outcome " + std::to_string(*r.y) + " in record " +
                        std::to_string(i + 1) + " of a binary dataset");
      }
    }
  }
  return data;
}

inline Allocation stratum_counts(const RssDataset& data) {
  std::vector<int> counts(static_cast<std::size_t>(std::max(data.set_size, 0)), 0);
  for (const auto& r : data.records) {
    if (r.rank < 1 || r.rank > data.set_size) throw DataError("rank out of range");
    ++counts[static_cast<std::size_t>(r.rank - 1)];
  }
  return Allocation(std::move(counts));
}

/// Outcomes grouped by rank, preserving record (cycle) order within each
/// stratum. Element 0 holds rank 1.
inline std::vector<std::vector<double>> partition_by_rank(const RssDataset& data) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(std::max(data.set_size, 0)));
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    const auto& r = data.records[i];
    if (r.rank < 1 || r.rank > data.set_size) throw DataError("rank out of range");
    if (!r.y) throw DataError("missing outcome in record " + std::to_string(i + 1));
    out[static_cast<std::size_t>(r.rank - 1)].push_back(*r.y);
  }
  return out;
}

/// Removes records without an outcome. A balanced design with missing values
/// becomes an unbalanced one.
inline RssDataset drop_missing(RssDataset data) {
  std::erase_if(data.records, [](const RssRecord& r) { return !r.y.has_value(); });
  return data;
}

/// Records sorted by rank; order within a rank is preserved.
inline RssDataset sorted_by_rank(RssDataset data) {
  std::stable_sort(data.records.begin(), data.records.end(),
                   [](const RssRecord& a, const RssRecord& b) { return a.rank < b.rank; });
  return data;
}

// ---------------------------------------------------------------------------
// Finite population
// ---------------------------------------------------------------------------

struct PopulationRow {
  std::string id;
  double x = 0.0;
  std::optional<double> y;

  bool operator==(const PopulationRow&) const = default;
};

struct PopulationFrame {
  std::vector<PopulationRow> rows;

  std::size_t size() const { return rows.size(); }
  bool has_outcomes() const {
    return std::any_of(rows.begin(), rows.end(), [](const auto& r) { return r.y.has_value(); });
  }
};

inline PopulationFrame validate_population(PopulationFrame pop) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(pop.rows.size());
  for (std::size_t i = 0; i < pop.rows.size(); ++i) {
    const auto& row = pop.rows[i];
    if (!std::isfinite(row.x)) {
      throw DataError("auxiliary value missing or non-finite in population row " +
                      std::to_string(i + 1));
    }
    if (!seen.insert(row.id).second) throw DataError("duplicate population id '" + row.id + "'");
  }
  return pop;
}

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

enum class TestMethod { z, t, elr, sign, prop, auc };
enum class Alternative { two_sided, less, greater };

inline const char* to_string(TestMethod m) {
  switch (m) {
    case TestMethod::z: return "z";
    case TestMethod::t: return "t";
    case TestMethod::elr: return "elr";
    case TestMethod::sign: return "sign";
    case TestMethod::prop: return "prop";
    case TestMethod::auc: return "auc";
  }
  return "?";
}

inline const char* to_string(Alternative a) {
  switch (a) {
    case Alternative::two_sided: return "two.sided";
    case Alternative::less: return "less";
    case Alternative::greater: return "greater";
  }
  return "?";
}

inline Alternative parse_alternative(std::string_view s) {
  if (s == "two.sided" || s == "two_sided" || s == "two-sided") return Alternative::two_sided;
  if (s == "less") return Alternative::less;
  if (s == "greater") return Alternative::greater;
  throw DataError("unknown alternative '" + std::string(s) + "'");
}

struct TestResult {
  double estimate = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double statistic = 0.0;
  std::optional<double> df;
  double p_value = 1.0;
  TestMethod method = TestMethod::z;
  double alpha = 0.05;
  Alternative alternative = Alternative::two_sided;
  // False when the hypothesised value lies outside the region where the
  // likelihood ratio is defined (ELR and AUC tests).
  bool feasible = true;
};

inline void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DataError("alpha must lie in (0,1), got " + std::to_string(alpha));
  }
}

// ---------------------------------------------------------------------------
// Design report
// ---------------------------------------------------------------------------

struct DesignReport {
  Allocation original;
  // Integer rules: "integer_neyman", "adjusted_neyman", "lrc".
  std::map<std::string, Allocation> recommendations;
  std::map<std::string, Allocation> additions;
  // Fractional Neyman allocation for proportions, when requested.
  std::optional<std::vector<double>> neyman_proportion;
  std::vector<std::string> warnings;
};

}  // namespace rss
