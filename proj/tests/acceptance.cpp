// Acceptance run: one PASS/FAIL line per criterion, tolerances and runtime
// budgets fixed below. Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "rss/rss.hpp"

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

int failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.ok = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > budget_s) o.require(false, fmt("runtime %.2fs over budget %.0fs", secs, budget_s));
  std::printf("%s %2d %-34s %8.2fs  %s\n", o.ok ? "PASS" : "FAIL", id, name, secs, o.detail.c_str());
  std::fflush(stdout);
  if (!o.ok) ++failures;
}

rss::RssDataset simulated(rss::Allocation a, std::uint64_t seed, double rho = 1.0,
                          rss::Distribution dist = rss::Distribution::normal, double delta = 0.0) {
  rss::SimConfig c;
  c.set_size = a.set_size();
  c.allocation = std::move(a);
  c.dist = dist;
  c.rho = rho;
  c.delta = delta;
  c.seed = seed;
  return rss::rss_simulate(c);
}

rss::RssDataset from_strata(const std::vector<std::vector<double>>& strata, rss::OutcomeKind kind) {
  rss::RssDataset d;
  d.set_size = static_cast<int>(strata.size());
  d.kind = kind;
  for (std::size_t h = 0; h < strata.size(); ++h)
    for (double y : strata[h]) d.records.push_back({static_cast<int>(h + 1), std::nullopt, y});
  return d;
}

rss::StratumStats stats_of(const std::vector<double>& sd) {
  rss::StratumStats st;
  st.sd = sd;
  st.counts = rss::Allocation(std::vector<int>(sd.size(), 2));
  return st;
}

// Exact E of the k-th of n standard normal order statistics (Simpson on [-10, 10]).
double normal_order_mean(int k, int n) {
  auto Phi = [](double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); };
  auto phi = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); };
  const double c = std::tgamma(n + 1.0) / (std::tgamma(k) * std::tgamma(n - k + 1.0));
  auto g = [&](double x) {
    const double F = Phi(x);
    return x * c * std::pow(F, k - 1) * std::pow(1.0 - F, n - k) * phi(x);
  };
  const int steps = 20000;
  const double a = -10.0, h = 20.0 / steps;
  double s = g(a) + g(-a);
  for (int i = 1; i < steps; ++i) s += (i % 2 ? 4.0 : 2.0) * g(a + i * h);
  return s * h / 3.0;
}

double min_composition_objective(const std::vector<double>& s, int N) {
  const int H = static_cast<int>(s.size());
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> n(static_cast<std::size_t>(H), 1);
  std::function<void(int, int)> rec = [&](int h, int left) {
    if (h == H - 1) {
      n[static_cast<std::size_t>(h)] = left;
      double v = 0.0;
      for (int k = 0; k < H; ++k) v += s[static_cast<std::size_t>(k)] * s[static_cast<std::size_t>(k)] / n[static_cast<std::size_t>(k)];
      best = std::min(best, v);
      return;
    }
    for (int c = 1; c <= left - (H - 1 - h); ++c) {
      n[static_cast<std::size_t>(h)] = c;
      rec(h + 1, left - c);
    }
  };
  rec(0, N);
  return best;
}

std::string bench_line(const rss::BenchResult& r) {
  std::string s;
  for (const auto& row : r.rows) {
    s += row.method + " cov=" + rss::format_sig(row.coverage, 4) + " len=" + rss::format_sig(row.mean_ci_length, 4) + " ";
  }
  return s;
}

}  // namespace

int main() {
  criterion(1, "Neyman allocation for a proportion", 1.0, [] {
    Outcome o;
    const auto n = rss::neyman_proportion(0.5, 3, 45);
    const double want[3] = {12.814, 19.373, 12.814};
    for (int h = 0; h < 3; ++h) o.require(std::abs(n[static_cast<std::size_t>(h)] - want[h]) <= 1e-3, fmt("n%.0f off", h + 1.0));
    o.detail = o.ok ? fmt("(%.4f, %.4f, %.4f) tol 1e-3", n[0], n[1], n[2]) : o.detail;
    return o;
  });

  criterion(2, "proportion test reproduction", 1.0, [] {
    Outcome o;
    std::vector<std::vector<double>> s(3);
    const int n[3] = {12, 9, 6}, k[3] = {3, 5, 4};
    for (int h = 0; h < 3; ++h)
      for (int i = 0; i < n[h]; ++i) s[static_cast<std::size_t>(h)].push_back(i < k[h] ? 1.0 : 0.0);
    const auto r = rss::rss_prop_test(from_strata(s, rss::OutcomeKind::binary), 0.2);
    o.require(std::abs(r.estimate - 0.4907407) <= 1e-7, "estimate");
    o.require(std::abs(r.statistic - 3.700841) <= 1e-5, "statistic");
    o.require(std::abs(r.p_value - 2.148859e-4) <= 1e-8, "p-value");
    o.require(std::abs(r.ci_lower - 0.3367646) <= 1e-6, "ci lower");
    o.require(std::abs(r.ci_upper - 0.6447169) <= 1e-6, "ci upper");
    if (o.ok) {
      o.detail = fmt("p=%.7f z=%.6f p-value=%.6e", r.estimate, r.statistic, r.p_value) +
                 fmt(" ci=(%.7f, %.7f)", r.ci_lower, r.ci_upper);
    }
    return o;
  });

  criterion(3, "adjusted and integer Neyman", 5.0, [] {
    Outcome o;
    o.require(rss::componentwise_max({3, 10, 5}, {4, 5, 9}) == rss::Allocation{4, 10, 9}, "(4,10,9)");
    rss::Rng rng(2024);
    int cases = 0;
    for (int rep = 0; rep < 50; ++rep) {
      for (int H = 1; H <= 4; ++H) {
        std::vector<double> s;
        for (int h = 0; h < H; ++h) s.push_back(0.05 + 3.0 * rng.uniform());
        for (int N = H; N <= 20; ++N) {
          const auto got = rss::integer_neyman(stats_of(s), N);
          double v = 0.0;
          for (int h = 1; h <= H; ++h) v += s[static_cast<std::size_t>(h - 1)] * s[static_cast<std::size_t>(h - 1)] / got.count(h);
          const double best = min_composition_objective(s, N);
          o.require(got.total() == N && v <= best * (1.0 + 1e-12), fmt("H=%.0f N=%.0f", H, N));
          ++cases;
        }
      }
    }
    if (o.ok) o.detail = "(4,10,9) exact; " + std::to_string(cases) + " exhaustive cases, rel tol 1e-12";
    return o;
  });

  criterion(4, "naive degrees of freedom", 1.0, [] {
    Outcome o;
    const auto d1 = simulated({6, 6, 6}, 1), d2 = simulated({8, 8, 8}, 2);
    const auto r = rss::rss_t_test(d1, &d2, 0.0, 0.05, rss::Alternative::two_sided, rss::DfMethod::naive);
    o.require(r.df && *r.df == 36.0, "df != 36");
    if (o.ok) o.detail = "df = 36 exactly";
    return o;
  });

  criterion(5, "chi-square calibration and ELR zero", 5.0, [] {
    Outcome o;
    const double p = rss::chisq1_sf(0.1488371);
    o.require(std::abs(p - 0.6996491) <= 1e-6, fmt("p=%.8f", p));
    double worst = 0.0;
    rss::Rng rng(55);
    for (int rep = 0; rep < 100; ++rep) {
      const int H = 2 + static_cast<int>(rng.below(4));
      std::vector<int> n;
      for (int h = 0; h < H; ++h) n.push_back(2 + static_cast<int>(rng.below(10)));
      const auto d = simulated(rss::Allocation(n), rss::derive_seed(55, rep), 0.8, rss::Distribution::lognormal);
      const double mu = rss::mean_summary(d).mu_hat;
      worst = std::max(worst, rss::rss_elr_test(d, mu).result.statistic);
    }
    o.require(worst <= 1e-8, fmt("max stat %.3e", worst));
    if (o.ok) o.detail = fmt("p=%.7f (tol 1e-6); max -2logLR at mean %.2e (tol 1e-8)", p, worst);
    return o;
  });

  criterion(6, "sign test constants", 5.0, [] {
    Outcome o;
    // beta_h = #{subsets with at least h of 3 coins below M} / 8
    const int H = 3, two_h = 1 << H;
    std::int64_t sq = 0;
    const double want[3] = {0.875, 0.5, 0.125};
    for (int h = 1; h <= H; ++h) {
      int c = 0;
      for (int mask = 0; mask < two_h; ++mask)
        if (__builtin_popcount(static_cast<unsigned>(mask)) >= h) ++c;
      o.require(rss::beta_half_cdf(h, H) == static_cast<double>(c) / two_h, "beta vs enumeration");
      o.require(static_cast<double>(c) / two_h == want[h - 1], "beta value");
      sq += static_cast<std::int64_t>(2 * c - two_h) * (2 * c - two_h);
    }
    // eta^2 = (H 4^H - sum (2c - 2^H)^2) / (H 4^H) must equal 5/8.
    const std::int64_t den = H * static_cast<std::int64_t>(two_h) * two_h;
    o.require((den - sq) * 8 == 5 * den, "eta^2 rational != 5/8");
    o.require(rss::sign_eta_squared(3) == 0.625, "eta^2 double != 0.625");

    rss::Rng rng(66);
    double worst = 0.0;
    int datasets = 0;
    for (int Hs = 2; Hs <= 6; ++Hs) {
      for (int rep = 0; rep < 100; ++rep) {
        const int m = 1 + static_cast<int>(rng.below(10));
        std::vector<std::vector<double>> strata(static_cast<std::size_t>(Hs));
        for (auto& s : strata)
          for (int i = 0; i < m; ++i) s.push_back(rng.normal());
        const auto st = rss::sign_statistic(strata, 0.0);
        worst = std::max(worst, std::abs(st.z - rss::brss_sign_z(st.s_plus, st.n, Hs)));
        ++datasets;
      }
    }
    o.require(worst <= 1e-12, fmt("max diff %.3e", worst));
    if (o.ok) o.detail = fmt("exact rationals; %.0f datasets, max |dz| %.1e (tol 1e-12)", datasets, worst);
    return o;
  });

  criterion(7, "simulation calibration", 30.0, [] {
    Outcome o;
    std::string d;
    for (double rho : {0.5, 0.8, 1.0}) {
      double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0, n = 0;
      auto obs = [&](const rss::SimulatedSet& s) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
          sx += s.x[i]; sy += s.y[i]; sxx += s.x[i] * s.x[i]; syy += s.y[i] * s.y[i]; sxy += s.x[i] * s.y[i];
          n += 1;
        }
      };
      rss::SimConfig c;
      c.set_size = 3;
      c.allocation = {33334, 33333, 33333};
      c.rho = rho;
      c.seed = 700 + static_cast<std::uint64_t>(rho * 10);
      rss::rss_simulate(c, obs);
      const double cov = sxy / n - sx * sy / (n * n);
      const double r = cov / std::sqrt((sxx / n - sx * sx / (n * n)) * (syy / n - sy * sy / (n * n)));
      o.require(n >= 1e5 && std::abs(r - rho) <= 0.01, fmt("corr %.4f vs %.1f", r, rho));
      d += fmt("corr %.4f/%.1f ", r, rho);
    }
    const int m = 100000;
    const auto data = simulated({m, m, m}, 707);
    const auto strata = rss::partition_by_rank(data);
    for (int h = 1; h <= 3; ++h) {
      const double mean = rss::sample_mean(strata[static_cast<std::size_t>(h - 1)]);
      const double exact = normal_order_mean(h, 3);
      o.require(std::abs(mean - exact) <= 0.01, fmt("stratum %.0f mean %.4f", h, mean));
      d += fmt("mean%.0f %.4f ", h, mean);
    }
    if (o.ok) o.detail = d + "(tol 0.01)";
    return o;
  });

  criterion(8, "one-sample mean bench", 120.0, [] {
    Outcome o;
    const auto res = rss::run_bench(rss::default_bench_config(rss::Scenario::one_sample_mean));
    for (const auto& row : res.rows) {
      o.require(row.coverage >= 0.93 && row.coverage <= 0.97, row.method + " coverage");
    }
    const double upd = res.rows[1].mean_ci_length, srs = res.rows[2].mean_ci_length;
    const double margin = (srs - upd) / srs;
    o.require(margin >= 0.05, fmt("length margin %.3f < 0.05", margin));
    o.detail = bench_line(res) + fmt("margin %.3f", margin) + (o.ok ? "" : " | " + o.detail);
    return o;
  });

  criterion(9, "two-sample AUC bench", 300.0, [] {
    Outcome o;
    const auto res = rss::run_bench(rss::default_bench_config(rss::Scenario::two_sample_auc));
    for (const auto& row : res.rows) {
      o.require(row.coverage >= 0.91 && row.coverage <= 0.97, row.method + " coverage");
    }
    const double u = res.rows[0].mean_ci_length, b = res.rows[1].mean_ci_length, s = res.rows[2].mean_ci_length;
    // Ordering may be violated by at most 2% relative Monte Carlo slack.
    o.require(u <= b * 1.02, "URSS > BRSS");
    o.require(b <= s * 1.02, "BRSS > SRS");
    const double margin = (s - u) / s;
    o.require(margin >= 0.03, fmt("URSS/SRS margin %.3f < 0.03", margin));
    o.detail = bench_line(res) + fmt("truth %.4f margin %.3f", res.true_value, margin) + (o.ok ? "" : " | " + o.detail);
    return o;
  });

  criterion(10, "property suite", 120.0, [] {
    Outcome o;

    // Allocation fidelity of sampling.
    rss::PopulationFrame pop;
    rss::Rng prng(1);
    for (int i = 0; i < 3000; ++i) {
      const double y = prng.normal();
      pop.rows.push_back({std::to_string(i), y + 0.4 * prng.normal(), y});
    }
    for (int rep = 0; rep < 200; ++rep) {
      const int H = 2 + static_cast<int>(prng.below(4));
      std::vector<int> counts;
      for (int h = 0; h < H; ++h) counts.push_back(static_cast<int>(prng.below(7)));
      counts[static_cast<std::size_t>(rep % H)] += 1;
      const rss::Allocation a(counts);
      const auto d = rss::rss_sample(pop, {H, a, rep % 2 ? rss::PoolPolicy::return_unmeasured : rss::PoolPolicy::discard_set,
                                           static_cast<std::uint64_t>(rep)});
      if (!(rss::stratum_counts(d) == a)) {
        o.require(false, "allocation fidelity");
        break;
      }
    }

    // Unbiasedness of the RSS mean under perfect ranking.
    {
      const int reps = 2000;
      double sum = 0.0, sum2 = 0.0;
      for (int i = 0; i < reps; ++i) {
        const double mu = rss::mean_summary(simulated({3, 10, 5}, rss::derive_seed(10, i))).mu_hat;
        sum += mu;
        sum2 += mu * mu;
      }
      const double mean = sum / reps;
      const double se = std::sqrt((sum2 / reps - mean * mean) / (reps - 1));
      o.require(std::abs(mean) <= 3.0 * se, fmt("mean %.4f beyond 3 SE %.4f", mean, 3 * se));
    }

    // ELR constraint residuals.
    {
      double worst_mass = 0.0, worst_mean = 0.0;
      rss::Rng rng(11);
      for (int rep = 0; rep < 100; ++rep) {
        const auto d = simulated({2 + static_cast<int>(rng.below(8)), 2 + static_cast<int>(rng.below(8)),
                                  2 + static_cast<int>(rng.below(8))},
                                 rss::derive_seed(11, rep), 0.8, rss::Distribution::t);
        const auto strata = rss::partition_by_rank(d);
        double lo = 0, hi = 0;
        for (const auto& ys : strata) {
          lo += *std::min_element(ys.begin(), ys.end()) / 3.0;
          hi += *std::max_element(ys.begin(), ys.end()) / 3.0;
        }
        const double mu0 = lo + (hi - lo) * (0.05 + 0.9 * rng.uniform());
        const auto p = rss::elr_profile(strata, mu0);
        double mean = 0.0;
        for (std::size_t h = 0; h < strata.size(); ++h) {
          double mass = 0.0;
          for (std::size_t r = 0; r < strata[h].size(); ++r) {
            if (!(p.weights[h][r] > 0.0)) o.require(false, "non-positive weight");
            mass += p.weights[h][r];
            mean += p.weights[h][r] * strata[h][r];
          }
          worst_mass = std::max(worst_mass, std::abs(mass - 1.0 / 3.0));
        }
        worst_mean = std::max(worst_mean, std::abs(mean - mu0) / std::max(1.0, hi - lo));
      }
      o.require(worst_mass <= 1e-10, fmt("mass residual %.2e", worst_mass));
      o.require(worst_mean <= 1e-8, fmt("mean residual %.2e", worst_mean));
    }

    // AUC invariance under a strictly increasing transform.
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      auto d1 = simulated({3, 4, 5}, seed, 0.8);
      auto d2 = simulated({5, 4, 3}, 100 + seed, 0.8, rss::Distribution::normal, 0.7);
      const double base = rss::rss_auc_estimate(d1, d2);
      for (auto* d : {&d1, &d2})
        for (auto& r : d->records) *r.y = std::exp(*r.y) + std::pow(*r.y, 3);
      if (rss::rss_auc_estimate(d1, d2) != base) {
        o.require(false, "AUC transform invariance");
        break;
      }
    }

    // Location-shift equivariance.
    {
      const double c = 7.25;
      double worst = 0.0;
      for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const auto d = simulated({4, 6, 5}, 200 + seed, 0.7);
        auto sd = d;
        for (auto& r : sd.records) *r.y += c;
        const auto a = rss::rss_t_test(d, nullptr, 0.1), b = rss::rss_t_test(sd, nullptr, 0.1 + c);
        const auto za = rss::rss_z_test(d, nullptr, 0.1), zb = rss::rss_z_test(sd, nullptr, 0.1 + c);
        const auto ea = rss::rss_elr_test(d, 0.1).result, eb = rss::rss_elr_test(sd, 0.1 + c).result;
        worst = std::max({worst, std::abs(b.statistic - a.statistic), std::abs(zb.statistic - za.statistic),
                          std::abs(b.ci_lower - a.ci_lower - c), std::abs(b.ci_upper - a.ci_upper - c),
                          std::abs(rss::mean_summary(sd).mu_hat - rss::mean_summary(d).mu_hat - c)});
        o.require(std::abs(eb.statistic - ea.statistic) <= 1e-8, "ELR statistic shift");
        o.require(std::abs(eb.ci_lower - ea.ci_lower - c) <= 1e-7 && std::abs(eb.ci_upper - ea.ci_upper - c) <= 1e-7,
                  "ELR interval shift");
      }
      o.require(worst <= 1e-10, fmt("z/t shift residual %.2e", worst));
    }

    // End-to-end determinism: identical bytes from two full pipelines.
    auto pipeline = [&] {
      std::ostringstream out;
      rss::SimConfig c;
      c.set_size = 3;
      c.allocation = {4, 6, 5};
      c.dist = rss::Distribution::lognormal;
      c.rho = 0.8;
      c.seed = 31;
      const auto sim = rss::rss_simulate(c);
      rss::write_rss_csv(out, sim);
      const auto s = rss::rss_sample(pop, {3, {3, 5, 4}, rss::PoolPolicy::discard_set, 32});
      rss::write_rss_csv(out, s);
      out << rss::to_json(rss::rss_t_test(s, nullptr, 0.0)).dump(2);
      out << rss::to_json(rss::rss_elr_test(sim, 1.5).result).dump(2);
      out << rss::to_json(rss::design_report(s, false)).dump(2);
      auto cfg = rss::default_bench_config(rss::Scenario::one_sample_mean);
      cfg.replicates = 20;
      rss::write_bench_csv(out, rss::run_bench(cfg));
      return out.str();
    };
    o.require(pipeline() == pipeline(), "pipeline output differs between runs");

    if (o.ok) o.detail = "fidelity, unbiasedness (3 SE), ELR residuals, AUC invariance, shift equivariance, determinism";
    return o;
  });

  std::printf("%s: %d of 10 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
