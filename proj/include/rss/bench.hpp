#pragma once

// Replicated coverage and interval-length comparisons of ranked set designs
// against simple random sampling, on a fixed finite population.
//
// one_sample_mean  balanced RSS with random missing outcomes (hence URSS),
//                  t interval; the design is then topped up following the
//                  allocation report and re-tested; SRS of the updated size
//                  with the classical t interval.
// two_sample_auc   URSS vs BRSS vs SRS jackknife empirical likelihood
//                  intervals for the AUC of two populations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rss/allocate.hpp"
#include "rss/core.hpp"
#include "rss/errors.hpp"
#include "rss/infer.hpp"
#include "rss/io.hpp"
#include "rss/rng.hpp"
#include "rss/sampling.hpp"
#include "rss/simulate.hpp"

namespace rss {

enum class Scenario { one_sample_mean, two_sample_auc };

inline const char* to_string(Scenario s) {
  return s == Scenario::one_sample_mean ? "one_sample_mean" : "two_sample_auc";
}

inline Scenario parse_scenario(std::string_view s) {
  if (s == "one_sample_mean") return Scenario::one_sample_mean;
  if (s == "two_sample_auc") return Scenario::two_sample_auc;
  throw DataError("unknown scenario '" + std::string(s) + "'");
}

/// Y = location + scale Z (normal, t) or exp(location + scale Z) (lognormal),
/// plus delta; X = Y + e with Corr(X, Y) = rho over the generated population.
struct SyntheticPopulation {
  std::size_t size = 5000;
  Distribution dist = Distribution::lognormal;
  double location = 0.0;
  double scale = 1.0;
  double rho = 0.9;
  double delta = 0.0;
  double t_df = 3.0;
  std::optional<std::uint64_t> seed;
};

struct PopulationSource {
  std::optional<std::string> csv;
  SyntheticPopulation synthetic;
};

struct BenchConfig {
  Scenario scenario = Scenario::one_sample_mean;
  int replicates = 500;
  int set_size = 3;
  std::vector<Allocation> allocations;           // one per group
  std::vector<Allocation> balanced_allocations;  // two_sample_auc comparator
  std::vector<PopulationSource> populations;     // one per group
  double missing_rate = 0.1;
  double alpha = 0.05;
  std::uint64_t seed = 20240601;
  PoolPolicy pool = PoolPolicy::discard_set;
};

struct BenchRow {
  std::string method;
  double mean_n = 0.0;
  double coverage = 0.0;
  double mean_ci_length = 0.0;
};

struct BenchResult {
  Scenario scenario = Scenario::one_sample_mean;
  double true_value = 0.0;
  int replicates = 0;
  int skipped = 0;
  std::vector<BenchRow> rows;
};

inline BenchConfig default_bench_config(Scenario scenario) {
  BenchConfig cfg;
  cfg.scenario = scenario;
  if (scenario == Scenario::one_sample_mean) {
    cfg.allocations = {Allocation{10, 10, 10}};
    PopulationSource src;
    src.synthetic.location = 3.2;  // a right-skewed, BMI-like outcome
    src.synthetic.scale = 0.25;
    cfg.populations = {src};
  } else {
    cfg.allocations = {Allocation{5, 10, 15}, Allocation{15, 10, 5}};
    cfg.balanced_allocations = {Allocation{10, 10, 10}, Allocation{10, 10, 10}};
    // Equal log-scale spread, shifted so that P(Y2 > Y1) = 0.89.
    PopulationSource g1, g2;
    g1.synthetic.scale = g2.synthetic.scale = 0.5;
    g2.synthetic.location = 0.5 * std::sqrt(2.0) * normal_quantile(0.89);
    cfg.populations = {g1, g2};
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

namespace detail {

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> known,
                           const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw DataError("unknown key '" + key + "' in " + where);
    }
  }
}

inline Allocation allocation_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw DataError("allocation must be an array of counts");
  return Allocation(j.get<std::vector<int>>());
}

inline PopulationSource population_from_json(const nlohmann::json& j,
                                             const std::filesystem::path& base) {
  reject_unknown(j, {"csv", "synthetic"}, "population");
  PopulationSource src;
  if (j.contains("csv")) {
    std::filesystem::path p = j.at("csv").get<std::string>();
    if (p.is_relative()) p = base / p;
    src.csv = p.string();
  }
  if (j.contains("synthetic")) {
    const auto& s = j.at("synthetic");
    reject_unknown(s, {"size", "dist", "location", "scale", "rho", "delta", "t_df", "seed"},
                   "synthetic population");
    auto& sp = src.synthetic;
    sp.size = s.value("size", sp.size);
    if (s.contains("dist")) sp.dist = parse_distribution(s.at("dist").get<std::string>());
    sp.location = s.value("location", sp.location);
    sp.scale = s.value("scale", sp.scale);
    sp.rho = s.value("rho", sp.rho);
    sp.delta = s.value("delta", sp.delta);
    sp.t_df = s.value("t_df", sp.t_df);
    if (s.contains("seed")) sp.seed = s.at("seed").get<std::uint64_t>();
  }
  return src;
}

}  // namespace detail

inline void check_bench_config(const BenchConfig& cfg) {
  const std::size_t groups = cfg.scenario == Scenario::one_sample_mean ? 1 : 2;
  if (cfg.replicates < 1) throw DataError("replicates must be at least 1");
  if (cfg.set_size < 2) throw DataError("set size must be at least 2");
  check_alpha(cfg.alpha);
  if (!(cfg.missing_rate >= 0.0 && cfg.missing_rate < 1.0)) {
    throw DataError("missing_rate must lie in [0,1)");
  }
  if (cfg.allocations.size() != groups) {
    throw DataError("scenario " + std::string(to_string(cfg.scenario)) + " needs " +
                    std::to_string(groups) + " allocation(s)");
  }
  if (cfg.populations.size() != groups) {
    throw DataError("scenario " + std::string(to_string(cfg.scenario)) + " needs " +
                    std::to_string(groups) + " population(s)");
  }
  for (const auto& a : cfg.allocations) {
    if (a.set_size() != cfg.set_size) throw DataError("allocation length does not match set size");
    if (a.total() < 1) throw DataError("allocation total must be at least 1");
  }
  if (cfg.scenario == Scenario::two_sample_auc) {
    if (cfg.balanced_allocations.size() != 2) throw DataError("two_sample_auc needs two balanced allocations");
    for (const auto& a : cfg.balanced_allocations) {
      if (a.set_size() != cfg.set_size || !a.is_balanced() || a.total() < 1) {
        throw DataError("balanced allocations must have equal positive counts of set-size length");
      }
    }
  }
  for (const auto& p : cfg.populations) {
    if (!p.csv) {
      const auto& s = p.synthetic;
      if (s.size < 2) throw DataError("synthetic population size must be at least 2");
      if (!(s.scale > 0.0)) throw DataError("synthetic population scale must be positive");
      if (s.dist == Distribution::t) check_t_df(s.t_df);
      if (!(s.rho > 0.0 && s.rho <= 1.0)) throw DataError("rho must lie in (0, 1]");
    }
  }
}

inline BenchConfig bench_config_from_json(const nlohmann::json& j,
                                          const std::filesystem::path& base = {}) {
  detail::reject_unknown(j,
                         {"scenario", "replicates", "set_size", "allocations", "balanced_allocations",
                          "populations", "missing_rate", "alpha", "seed", "pool"},
                         "bench config");
  if (!j.contains("scenario")) throw DataError("bench config needs a scenario");
  BenchConfig cfg = default_bench_config(parse_scenario(j.at("scenario").get<std::string>()));
  cfg.replicates = j.value("replicates", cfg.replicates);
  cfg.set_size = j.value("set_size", cfg.set_size);
  if (j.contains("allocations")) {
    cfg.allocations.clear();
    for (const auto& a : j.at("allocations")) cfg.allocations.push_back(detail::allocation_from_json(a));
  }
  if (j.contains("balanced_allocations")) {
    cfg.balanced_allocations.clear();
    for (const auto& a : j.at("balanced_allocations")) {
      cfg.balanced_allocations.push_back(detail::allocation_from_json(a));
    }
  }
  if (j.contains("populations")) {
    cfg.populations.clear();
    for (const auto& p : j.at("populations")) cfg.populations.push_back(detail::population_from_json(p, base));
  }
  cfg.missing_rate = j.value("missing_rate", cfg.missing_rate);
  cfg.alpha = j.value("alpha", cfg.alpha);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("pool")) {
    const auto p = j.at("pool").get<std::string>();
    if (p == "discard") cfg.pool = PoolPolicy::discard_set;
    else if (p == "return") cfg.pool = PoolPolicy::return_unmeasured;
    else throw DataError("pool must be discard or return");
  }
  check_bench_config(cfg);
  return cfg;
}

inline BenchConfig read_bench_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("invalid JSON in ") + path.string() + ": " + e.what(), 0);
  }
  try {
    return bench_config_from_json(j, path.parent_path());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad bench config: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Populations
// ---------------------------------------------------------------------------

inline PopulationFrame synthetic_population(const SyntheticPopulation& spec, std::uint64_t seed) {
  Rng rng(spec.seed.value_or(seed));
  PopulationFrame pop;
  pop.rows.resize(spec.size);
  std::vector<double> y(spec.size);
  for (auto& v : y) {
    double z = spec.dist == Distribution::t ? rng.student_t(spec.t_df) : rng.normal();
    v = spec.location + spec.scale * z;
    if (spec.dist == Distribution::lognormal) v = std::exp(v);
    v += spec.delta;
  }
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  var /= static_cast<double>(y.size());
  const double noise_sd = std::sqrt(noise_variance_for_rho(var, spec.rho));
  for (std::size_t i = 0; i < spec.size; ++i) {
    auto& row = pop.rows[i];
    row.id = std::to_string(i + 1);
    row.y = y[i];
    row.x = noise_sd > 0.0 ? y[i] + noise_sd * rng.normal() : y[i];
  }
  return pop;
}

inline PopulationFrame load_population(const PopulationSource& src, std::uint64_t seed) {
  PopulationFrame pop;
  if (src.csv) {
    std::ifstream in(*src.csv);
    if (!in) throw DataError("cannot open population file " + *src.csv);
    pop = read_population_csv(in);
  } else {
    pop = synthetic_population(src.synthetic, seed);
  }
  for (std::size_t i = 0; i < pop.size(); ++i) {
    if (!pop.rows[i].y) {
      throw DataError("bench population row " + std::to_string(i + 1) + " has no outcome; the true value needs Y everywhere");
    }
  }
  return pop;
}

inline double population_mean(const PopulationFrame& pop) {
  double s = 0.0;
  for (const auto& r : pop.rows) s += r.y.value();
  return s / static_cast<double>(pop.size());
}

/// P(Y2 > Y1) + P(Y2 = Y1)/2 over all pairs of the two populations.
inline double population_auc(const PopulationFrame& pop1, const PopulationFrame& pop2) {
  std::vector<double> a, b;
  for (const auto& r : pop1.rows) a.push_back(r.y.value());
  for (const auto& r : pop2.rows) b.push_back(r.y.value());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double total = 0.0;
  for (double v : b) {
    const auto lo = std::lower_bound(a.begin(), a.end(), v);
    const auto hi = std::upper_bound(lo, a.end(), v);
    total += static_cast<double>(lo - a.begin()) + 0.5 * static_cast<double>(hi - lo);
  }
  return total / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

namespace detail {

struct Tally {
  std::string method;
  double n = 0.0, covered = 0.0, length = 0.0;
  int count = 0;

  void add(double size, double lo, double hi, double truth) {
    n += size;
    if (lo <= truth && truth <= hi) covered += 1.0;
    length += hi - lo;
    ++count;
  }
  BenchRow row() const {
    const double c = count > 0 ? count : kNaN;
    return BenchRow{method, n / c, covered / c, length / c};
  }
};

inline std::uint64_t population_seed(std::uint64_t seed, std::uint64_t group) {
  return derive_seed(~seed, group);
}

}  // namespace detail

inline BenchResult bench_one_sample_mean(const BenchConfig& cfg) {
  check_bench_config(cfg);
  const auto pop = load_population(cfg.populations[0], detail::population_seed(cfg.seed, 0));
  const double truth = population_mean(pop);

  BenchResult res;
  res.scenario = cfg.scenario;
  res.true_value = truth;
  res.replicates = cfg.replicates;
  detail::Tally orig{"original_urss"}, updated{"updated_rss"}, srs{"srs"};

  for (int i = 0; i < cfg.replicates; ++i) {
    const std::uint64_t s = derive_seed(cfg.seed, static_cast<std::uint64_t>(i));
    RankedSetSampler sampler(pop, cfg.set_size, cfg.pool, derive_seed(s, 0));
    Rng missing(derive_seed(s, 1));
    Rng srs_rng(derive_seed(s, 2));

    RssDataset data = sampler.draw(cfg.allocations[0]);
    for (auto& r : data.records) {
      if (missing.uniform() < cfg.missing_rate) r.y.reset();
    }
    data = drop_missing(std::move(data));
    if (stratum_counts(data).min_count() < 2) {
      ++res.skipped;
      continue;
    }

    const auto t0 = rss_t_test(data, nullptr, truth, cfg.alpha);
    const auto report = design_report(data, false);
    const auto& add_adj = report.additions.at("adjusted_neyman");
    const auto& add_lrc = report.additions.at("lrc");
    const Allocation& add = add_lrc.total() < add_adj.total() ? add_lrc : add_adj;

    RssDataset grown = data;
    if (add.total() > 0) {
      const auto extra = sampler.draw(add);
      grown.records.insert(grown.records.end(), extra.records.begin(), extra.records.end());
      grown = sorted_by_rank(std::move(grown));
    }
    const auto t1 = rss_t_test(grown, nullptr, truth, cfg.alpha);

    const auto idx = simple_random_sample(pop.size(), grown.size(), srs_rng);
    std::vector<double> y;
    y.reserve(idx.size());
    for (auto k : idx) y.push_back(*pop.rows[k].y);
    const auto t2 = srs_t_test(y, truth, cfg.alpha);

    orig.add(static_cast<double>(data.size()), t0.ci_lower, t0.ci_upper, truth);
    updated.add(static_cast<double>(grown.size()), t1.ci_lower, t1.ci_upper, truth);
    srs.add(static_cast<double>(y.size()), t2.ci_lower, t2.ci_upper, truth);
  }
  res.rows = {orig.row(), updated.row(), srs.row()};
  return res;
}

/// AUC interval, collapsing to the estimate when the jackknife
/// pseudo-values are all equal (e.g. complete separation).
inline std::pair<double, double> auc_interval(const RssDataset& d1, const RssDataset& d2,
                                              double delta0, double alpha) {
  try {
    const auto r = rss_auc_test(d1, d2, delta0, alpha);
    return {r.ci_lower, r.ci_upper};
  } catch (const DegenerateError& e) {
    return {e.estimate(), e.estimate()};
  }
}

inline RssDataset srs_dataset(const PopulationFrame& pop, std::size_t n, Rng& rng) {
  RssDataset d;
  d.set_size = 1;
  for (auto k : simple_random_sample(pop.size(), n, rng)) {
    d.records.push_back(RssRecord{1, pop.rows[k].id, pop.rows[k].y});
  }
  return d;
}

inline BenchResult bench_two_sample_auc(const BenchConfig& cfg) {
  check_bench_config(cfg);
  const auto pop1 = load_population(cfg.populations[0], detail::population_seed(cfg.seed, 0));
  const auto pop2 = load_population(cfg.populations[1], detail::population_seed(cfg.seed, 1));
  const double truth = population_auc(pop1, pop2);
  if (!(truth > 0.0 && truth < 1.0)) throw DataError("populations are completely separated; AUC is 0 or 1");
  const PopulationFrame* pops[2] = {&pop1, &pop2};

  BenchResult res;
  res.scenario = cfg.scenario;
  res.true_value = truth;
  res.replicates = cfg.replicates;
  detail::Tally urss{"urss"}, brss{"brss"}, srs{"srs"};

  for (int i = 0; i < cfg.replicates; ++i) {
    const std::uint64_t s = derive_seed(cfg.seed, static_cast<std::uint64_t>(i));
    RssDataset u[2], b[2], r[2];
    for (std::size_t g = 0; g < 2; ++g) {
      RankedSetSampler us(*pops[g], cfg.set_size, cfg.pool, derive_seed(s, 10 + g));
      RankedSetSampler bs(*pops[g], cfg.set_size, cfg.pool, derive_seed(s, 20 + g));
      Rng srs_rng(derive_seed(s, 30 + g));
      u[g] = us.draw(cfg.allocations[g]);
      b[g] = bs.draw(cfg.balanced_allocations[g]);
      r[g] = srs_dataset(*pops[g], static_cast<std::size_t>(cfg.allocations[g].total()), srs_rng);
    }
    const auto ci_u = auc_interval(u[0], u[1], truth, cfg.alpha);
    const auto ci_b = auc_interval(b[0], b[1], truth, cfg.alpha);
    const auto ci_r = auc_interval(r[0], r[1], truth, cfg.alpha);
    urss.add(static_cast<double>(u[0].size() + u[1].size()), ci_u.first, ci_u.second, truth);
    brss.add(static_cast<double>(b[0].size() + b[1].size()), ci_b.first, ci_b.second, truth);
    srs.add(static_cast<double>(r[0].size() + r[1].size()), ci_r.first, ci_r.second, truth);
  }
  res.rows = {urss.row(), brss.row(), srs.row()};
  return res;
}

inline BenchResult run_bench(const BenchConfig& cfg) {
  return cfg.scenario == Scenario::one_sample_mean ? bench_one_sample_mean(cfg)
                                                   : bench_two_sample_auc(cfg);
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

inline void write_bench_csv(std::ostream& out, const BenchResult& res) {
  out << "method,mean_n,coverage,mean_ci_length\n";
  for (const auto& r : res.rows) {
    out << r.method << ',' << format_sig(r.mean_n) << ',' << format_sig(r.coverage) << ','
        << format_sig(r.mean_ci_length) << '\n';
  }
}

inline void write_bench_text(std::ostream& out, const BenchResult& res) {
  out << "scenario    " << to_string(res.scenario) << '\n'
      << "replicates  " << res.replicates;
  if (res.skipped > 0) out << " (" << res.skipped << " skipped: stratum with fewer than 2 observations)";
  out << '\n' << "true value  " << format_sig(res.true_value) << "\n\n";
  char line[128];
  std::snprintf(line, sizeof line, "%-15s %12s %12s %16s\n", "method", "mean_n", "coverage", "mean_ci_length");
  out << line;
  for (const auto& r : res.rows) {
    std::snprintf(line, sizeof line, "%-15s %12s %12s %16s\n", r.method.c_str(),
                  format_sig(r.mean_n).c_str(), format_sig(r.coverage).c_str(),
                  format_sig(r.mean_ci_length).c_str());
    out << line;
  }
}

}  // namespace rss
