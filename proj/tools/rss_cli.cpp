// Command-line front end: sampling, simulation, design and inference on CSV
// files, plus the replicated coverage bench.
//
// Exit codes: 0 ok, 2 usage, 3 data or format, 4 numerical or infeasible.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rss/rss.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw rss::DataError("cannot open " + path);
  return in;
}

// Writes to --out when given, stdout otherwise.
template <class Fn>
void emit(const std::string& out_path, Fn&& write) {
  if (out_path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw rss::DataError("cannot write " + out_path);
  write(out);
}

rss::Allocation parse_allocation(const std::vector<int>& nsamp, int H) {
  if (static_cast<int>(nsamp.size()) != H) {
    throw rss::DataError("--nsamp has " + std::to_string(nsamp.size()) + " entries but --H is " +
                         std::to_string(H));
  }
  return rss::Allocation(nsamp);
}

rss::PoolPolicy parse_pool(const std::string& s) {
  if (s == "discard") return rss::PoolPolicy::discard_set;
  if (s == "return") return rss::PoolPolicy::return_unmeasured;
  throw UsageError("--pool must be discard or return");
}

// Loads a sample file for inference. Rows without an outcome are dropped
// with a note; a file without any outcome is a selection sheet.
rss::RssDataset load_for_inference(const std::string& path, rss::OutcomeKind kind,
                                   std::optional<int> H) {
  auto in = open_input(path);
  auto data = rss::read_rss_csv(in, kind, H);
  if (!data.has_outcomes()) {
    throw rss::DataError(path + " has no outcome values (a selection sheet); measure y first");
  }
  const auto before = data.size();
  data = rss::drop_missing(std::move(data));
  if (data.size() < before) {
    std::cerr << "note: dropped " << (before - data.size()) << " record(s) with missing y from "
              << path << '\n';
  }
  return data;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ranked set sampling: sampling, allocation and inference"};
  app.require_subcommand(1);

  // sample / prop-sample
  std::string pop_path, out_path, pool = "discard";
  int H = 3;
  std::vector<int> nsamp;
  std::uint64_t seed = 0;
  auto add_sample_opts = [&](CLI::App* sub) {
    sub->add_option("--pop", pop_path, "population CSV (ID,X[,Y])")->required();
    sub->add_option("--H", H, "set size")->required();
    sub->add_option("--nsamp", nsamp, "per-stratum counts, e.g. 2,2,2")->required()->delimiter(',');
    sub->add_option("--pool", pool, "discard | return");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--out", out_path, "output CSV (default stdout)");
  };
  auto* sample = app.add_subcommand("sample", "draw a ranked set sample from a population");
  add_sample_opts(sample);
  auto* prop_sample = app.add_subcommand("prop-sample", "draw a ranked set sample on a binary X");
  add_sample_opts(prop_sample);

  // simulate / prop-simulate
  std::string dist = "normal";
  double rho = 1.0, delta = 0.0, t_df = 3.0, p = 0.5;
  auto* simulate = app.add_subcommand("simulate", "simulate a ranked set sample");
  simulate->add_option("--H", H, "set size")->required();
  simulate->add_option("--nsamp", nsamp, "per-stratum counts")->required()->delimiter(',');
  simulate->add_option("--dist", dist, "normal | t | lognormal");
  simulate->add_option("--rho", rho, "ranking correlation in (0,1]");
  simulate->add_option("--delta", delta, "mean shift");
  simulate->add_option("--t-df", t_df, "degrees of freedom for dist t");
  simulate->add_option("--seed", seed, "random seed");
  simulate->add_option("--out", out_path, "output CSV (default stdout)");
  auto* prop_simulate = app.add_subcommand("prop-simulate", "simulate a binary ranked set sample");
  prop_simulate->add_option("--H", H, "set size")->required();
  prop_simulate->add_option("--nsamp", nsamp, "per-stratum counts")->required()->delimiter(',');
  prop_simulate->add_option("--p", p, "success probability")->required();
  prop_simulate->add_option("--seed", seed, "random seed");
  prop_simulate->add_option("--out", out_path, "output CSV (default stdout)");

  // design
  std::string data_path, data2_path;
  std::optional<int> set_size;
  bool prop = false;
  auto* design = app.add_subcommand("design", "allocation report for an existing sample");
  design->add_option("--data", data_path, "sample CSV (rank[,ID],y)")->required();
  design->add_flag("--prop", prop, "binary outcome: Neyman allocation for a proportion");
  design->add_option("--H", set_size, "set size (default: largest rank)");

  // test
  std::string method, alternative = "two.sided", df_method = "sample";
  double alpha = 0.05, mu0 = 0.0, median0 = 0.0, p0 = 0.5, delta0 = 0.5;
  auto* test = app.add_subcommand("test", "hypothesis test and confidence interval");
  test->add_option("method", method, "z | t | elr | sign | prop | auc")
      ->required()
      ->check(CLI::IsMember({"z", "t", "elr", "sign", "prop", "auc"}));
  test->add_option("--data", data_path, "sample CSV")->required();
  test->add_option("--data2", data2_path, "second sample CSV (two-sample z, t; group 2 for auc)");
  test->add_option("--alpha", alpha, "significance level");
  test->add_option("--alternative", alternative, "two.sided | less | greater");
  test->add_option("--mu0", mu0, "hypothesised mean (or mean difference)");
  test->add_option("--median0", median0, "hypothesised median");
  test->add_option("--p0", p0, "hypothesised proportion");
  test->add_option("--delta0", delta0, "hypothesised AUC");
  test->add_option("--df-method", df_method, "naive | sample")->check(CLI::IsMember({"naive", "sample"}));
  test->add_option("--H", set_size, "set size (default: largest rank)");

  // bench
  std::string config_path;
  bool csv_stdout = false;
  auto* bench = app.add_subcommand("bench", "replicated coverage and interval-length comparison");
  bench->add_option("--config", config_path, "bench configuration JSON")->required();
  bench->add_option("--out", out_path, "also write the result table as CSV");
  bench->add_flag("--csv", csv_stdout, "print CSV instead of the text table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*sample || *prop_sample) {
      auto in = open_input(pop_path);
      const auto pop = rss::read_population_csv(in);
      rss::SamplingConfig cfg{H, parse_allocation(nsamp, H), parse_pool(pool), seed};
      const auto data = *sample ? rss::rss_sample(pop, cfg) : rss::rss_prop_sample(pop, cfg);
      emit(out_path, [&](std::ostream& os) { rss::write_rss_csv(os, data); });
    } else if (*simulate) {
      rss::SimConfig cfg;
      cfg.set_size = H;
      cfg.allocation = parse_allocation(nsamp, H);
      cfg.dist = rss::parse_distribution(dist);
      cfg.rho = rho;
      cfg.delta = delta;
      cfg.t_df = t_df;
      cfg.seed = seed;
      const auto data = rss::rss_simulate(cfg);
      emit(out_path, [&](std::ostream& os) { rss::write_rss_csv(os, data); });
    } else if (*prop_simulate) {
      const auto data = rss::rss_prop_simulate(H, parse_allocation(nsamp, H), p, seed);
      emit(out_path, [&](std::ostream& os) { rss::write_rss_csv(os, data); });
    } else if (*design) {
      const auto kind = prop ? rss::OutcomeKind::binary : rss::OutcomeKind::continuous;
      const auto data = load_for_inference(data_path, kind, set_size);
      std::cout << rss::to_json(rss::design_report(data, prop)).dump(2) << '\n';
    } else if (*test) {
      const auto alt = rss::parse_alternative(alternative);
      const auto kind = method == "prop" ? rss::OutcomeKind::binary : rss::OutcomeKind::continuous;
      const auto d1 = load_for_inference(data_path, kind, set_size);
      std::optional<rss::RssDataset> d2;
      if (!data2_path.empty()) d2 = load_for_inference(data2_path, kind, std::nullopt);
      const bool one_sample_only = method == "elr" || method == "sign" || method == "prop";
      if (one_sample_only && d2) throw UsageError("test " + method + " takes a single sample");
      if ((method == "elr" || method == "auc") && alt != rss::Alternative::two_sided) {
        throw UsageError("test " + method + " supports only --alternative two.sided");
      }

      rss::TestResult r;
      if (method == "z") {
        r = rss::rss_z_test(d1, d2 ? &*d2 : nullptr, mu0, alpha, alt);
      } else if (method == "t") {
        r = rss::rss_t_test(d1, d2 ? &*d2 : nullptr, mu0, alpha, alt, rss::parse_df_method(df_method));
      } else if (method == "elr") {
        r = rss::rss_elr_test(d1, mu0, alpha).result;
      } else if (method == "sign") {
        r = rss::rss_sign_test(d1, median0, alpha, alt);
      } else if (method == "prop") {
        r = rss::rss_prop_test(d1, p0, alpha, alt);
      } else {
        if (!d2) throw UsageError("test auc needs --data2");
        r = rss::rss_auc_test(d1, *d2, delta0, alpha);
      }
      std::cout << rss::to_json(r).dump(2) << '\n';
      if (!r.feasible) {
        std::cerr << "error: hypothesised value lies outside the region where the likelihood ratio is defined\n";
        return kExitNumerical;
      }
    } else if (*bench) {
      const auto cfg = rss::read_bench_config(config_path);
      const auto res = rss::run_bench(cfg);
      if (csv_stdout) {
        rss::write_bench_csv(std::cout, res);
      } else {
        rss::write_bench_text(std::cout, res);
      }
      if (!out_path.empty()) emit(out_path, [&](std::ostream& os) { rss::write_bench_csv(os, res); });
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const rss::DegenerateError& e) {
    std::cerr << "error: " << e.what() << " (estimate " << rss::format_shortest(e.estimate()) << ")\n";
    return kExitNumerical;
  } catch (const rss::NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const rss::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
