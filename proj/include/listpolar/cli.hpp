#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "listpolar/diagnostics.hpp"
#include "listpolar/estimators.hpp"
#include "listpolar/io.hpp"
#include "listpolar/montecarlo.hpp"
#include "listpolar/plot.hpp"

namespace listpolar::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

inline constexpr std::uint64_t kDefaultSeed = 20240501;

/// Master seed from LISTPOLAR_SEED when set, else the built-in default.
inline std::uint64_t default_seed() {
  if (const char* env = std::getenv("LISTPOLAR_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ConfigError(std::string("LISTPOLAR_SEED is not an unsigned integer: ") + env);
    }
  }
  return kDefaultSeed;
}

struct RunArgs {
  std::size_t reps = 200;
  std::uint64_t seed = kDefaultSeed;
  std::size_t jobs = 1;
  std::string out_dir = ".";
  MisreportCovariates misreport = MisreportCovariates::Full;
};

namespace detail {

// Maps exceptions onto the exit-code contract and reports them on `err`.
template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

inline void write_figure(const std::vector<ScenarioSummary>& rows, int id,
                         const std::filesystem::path& path) {
  auto out = open_out(path);
  out << render_svg(make_figure(id, rows));
}

inline std::vector<ScenarioSummary> run_and_write(const std::vector<ScenarioConfig>& scenarios,
                                                  const RunArgs& args) {
  const std::filesystem::path dir(args.out_dir);
  std::filesystem::create_directories(dir);
  auto records_out = open_out(dir / "records.csv");
  write_record_header(records_out);
  std::vector<RepRecord> all;
  RunOptions opts;
  opts.jobs = args.jobs;
  opts.fit.misreport = args.misreport;
  run_grid(scenarios, args.reps, args.seed, opts, [&](const RepRecord& r) {
    write_record(records_out, r);
    all.push_back(r);
  });
  const auto summary = aggregate(std::move(all), scenarios.front().beta2_a,
                                 scenarios.front().target_prevalence);
  auto summary_out = open_out(dir / "summary.csv");
  write_summary_csv(summary_out, summary);
  return summary;
}

inline void print_estimate(std::ostream& out, const EstimateResult& r) {
  out << "estimator=" << to_string(r.estimator) << '\n'
      << "estimate=" << csv::format_g9(r.estimate) << '\n'
      << "std_error=" << csv::format_g9(r.std_error) << '\n'
      << "n_used=" << r.n_used << '\n';
}

inline std::string join(const Vector& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += csv::format_g9(v[i]);
  }
  return s;
}

inline void print_fit(std::ostream& out, const MlFit& f) {
  out << "estimator=" << to_string(f.estimator) << '\n'
      << "prevalence=" << csv::format_g9(f.prevalence) << '\n'
      << "delta=" << join(f.delta) << '\n'
      << "gamma=" << join(f.gamma) << '\n';
  if (f.kappa) out << "kappa=" << join(*f.kappa) << '\n';
  out << "loglik=" << csv::format_g9(f.loglik) << '\n'
      << "converged=" << (f.converged ? 1 : 0) << '\n'
      << "grad_norm=" << csv::format_g9(f.grad_norm) << '\n'
      << "iterations=" << f.iterations << '\n'
      << "n_used=" << f.n_used << '\n';
}

}  // namespace detail

/// Runs every scenario of a JSON config; writes records.csv and summary.csv.
inline int cmd_simulate(const std::string& config_path, const RunArgs& args, std::ostream& out,
                        std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto scenarios = read_scenarios_file(config_path);
    const auto summary = detail::run_and_write(scenarios, args);
    out << "scenarios=" << summary.size() << '\n' << "reps=" << args.reps << '\n';
    return kExitOk;
  });
}

/// Full default grid plus figures 1-4.
inline int cmd_replicate(const RunArgs& args, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto summary = detail::run_and_write(default_grid(), args);
    const std::filesystem::path dir(args.out_dir);
    for (int id = 1; id <= 4; ++id) {
      detail::write_figure(summary, id, dir / ("figure" + std::to_string(id) + ".svg"));
    }
    out << "scenarios=" << summary.size() << '\n' << "reps=" << args.reps << '\n';
    return kExitOk;
  });
}

/// Writes one generated dataset for a single-scenario config.
inline int cmd_generate(const std::string& config_path, std::uint64_t seed,
                        const std::string& out_path, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto scenarios = read_scenarios_file(config_path);
    if (scenarios.size() != 1) throw ConfigError("generate needs a single-scenario config");
    write_dataset_file(out_path, generate_dataset(scenarios.front(), seed));
    return kExitOk;
  });
}

inline int cmd_estimate(const std::string& dataset_path, const std::string& estimator,
                        const DesignInfo& design, MisreportCovariates misreport, std::ostream& out,
                        std::ostream& err) {
  return detail::guarded(err, [&] {
    static const std::vector<std::string> known{"dim", "direct", "sensitivity_bias",
                                                "standard_ml", "combined_ml", "all"};
    if (std::find(known.begin(), known.end(), estimator) == known.end()) {
      throw InputError("unknown estimator '" + estimator + "'");
    }
    const Dataset ds = read_dataset_file(dataset_path, design);
    const bool all = estimator == "all";
    const bool needs_direct = all || estimator == "direct" || estimator == "sensitivity_bias" ||
                              estimator == "combined_ml";
    if (needs_direct && !ds.has_direct) {
      throw InputError("line 1: estimator '" + estimator + "' needs a 'd' column");
    }
    FitOptions fit;
    fit.misreport = misreport;
    bool first = true;
    auto sep = [&] {
      if (!first) out << '\n';
      first = false;
    };
    if (all || estimator == "dim") { sep(); detail::print_estimate(out, estimate_dim(ds)); }
    if (all || estimator == "direct") { sep(); detail::print_estimate(out, estimate_direct_prevalence(ds)); }
    if (all || estimator == "sensitivity_bias") { sep(); detail::print_estimate(out, estimate_sensitivity_bias(ds)); }
    if (all || estimator == "standard_ml") { sep(); detail::print_fit(out, estimate_standard_ml(ds, fit)); }
    if (all || estimator == "combined_ml") { sep(); detail::print_fit(out, estimate_combined_ml(ds, fit)); }
    return kExitOk;
  });
}

inline int cmd_diagnose(const std::string& dataset_path, const DesignInfo& design,
                        std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const Dataset ds = read_dataset_file(dataset_path, design);
    if (!ds.has_direct) throw InputError("line 1: diagnose needs a 'd' column");
    try {
      const TestResult t = placebo_test(ds);
      out << "placebo_statistic=" << csv::format_g9(t.statistic) << '\n'
          << "placebo_p=" << csv::format_g9(t.p_value) << '\n'
          << "dim_confessors=" << csv::format_g9(t.dim_confessors) << '\n'
          << "n_confessors_treat=" << t.n_confessors_treat << '\n'
          << "n_confessors_control=" << t.n_confessors_control << '\n';
    } catch (const TestInapplicable& e) {
      err << "warning: " << e.what() << '\n';
      out << "placebo_p=nan\n"
          << "n_confessors_treat=" << e.confessors_treat() << '\n'
          << "n_confessors_control=" << e.confessors_control() << '\n';
    }
    out << "top_coders=" << detect_top_coders(ds).size() << '\n';
    const auto ext = extreme_response_summary(ds);
    out << "bottom_share_control=" << csv::format_g9(ext.bottom_control) << '\n'
        << "top_share_control=" << csv::format_g9(ext.top_control) << '\n'
        << "bottom_share_treat=" << csv::format_g9(ext.bottom_treat) << '\n'
        << "top_share_treat=" << csv::format_g9(ext.top_treat) << '\n';
    return kExitOk;
  });
}

inline int cmd_plot(const std::string& summary_path, int figure_id, const std::string& out_path,
                    std::ostream& err) {
  return detail::guarded(err, [&] {
    if (figure_id < 1 || figure_id > 4) {
      throw InputError("unknown figure id " + std::to_string(figure_id) + " (expected 1-4)");
    }
    std::ifstream in(summary_path);
    if (!in) throw InputError("cannot open summary file '" + summary_path + "'");
    const auto rows = read_summary_csv(in);
    detail::write_figure(rows, figure_id, out_path);
    return kExitOk;
  });
}

}  // namespace listpolar::cli
