// Command-line front end: simulate, replicate, generate, estimate, diagnose, plot.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "listpolar/cli.hpp"

namespace {

listpolar::MisreportCovariates parse_misreport(const std::string& s) {
  if (s == "full") return listpolar::MisreportCovariates::Full;
  if (s == "x3") return listpolar::MisreportCovariates::InterceptX3;
  throw listpolar::ConfigError("--misreport must be 'full' or 'x3'");
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = listpolar::cli;
  CLI::App app{"Simulation and estimation for list experiments with non-uniform polarity"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  try {
    seed = cli::default_seed();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitConfig;
  }

  cli::RunArgs run;
  run.seed = seed;
  std::string misreport = "full";
  std::string config_path;
  std::size_t replicate_reps = 1000;
  auto add_run_flags = [&](CLI::App* sub, std::size_t& reps) {
    sub->add_option("--reps", reps, "Replicates per scenario");
    sub->add_option("--seed", run.seed, "Master seed (default: $LISTPOLAR_SEED or built-in)");
    sub->add_option("--jobs", run.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", run.out_dir, "Output directory");
    sub->add_option("--misreport", misreport, "Combined-ML misreport covariates: full or x3");
  };

  auto* simulate = app.add_subcommand("simulate", "Run the scenarios of a JSON config");
  simulate->add_option("--config", config_path, "Scenario config (JSON)")->required();
  add_run_flags(simulate, run.reps);

  auto* replicate = app.add_subcommand("replicate", "Run the built-in grid and emit figures 1-4");
  add_run_flags(replicate, replicate_reps);

  std::string out_path;
  std::uint64_t gen_seed = seed;
  auto* generate = app.add_subcommand("generate", "Write one simulated dataset as CSV");
  generate->add_option("--config", config_path, "Single-scenario config (JSON)")->required();
  generate->add_option("--seed", gen_seed, "Dataset seed");
  generate->add_option("--out", out_path, "Output CSV path")->required();

  std::string data_path;
  std::string estimator = "all";
  int j_items = 0;
  bool zero_item = false;
  auto add_design_flags = [&](CLI::App* sub) {
    sub->add_option("--data", data_path, "Dataset CSV")->required();
    sub->add_option("--j-items", j_items, "Control items (default: infer from control-arm maximum)");
    sub->add_flag("--zero-item", zero_item, "Design carries an extra always-zero control item");
  };
  auto* estimate = app.add_subcommand("estimate", "Fit estimators to a dataset");
  add_design_flags(estimate);
  estimate->add_option("--estimator", estimator,
                       "dim, direct, sensitivity_bias, standard_ml, combined_ml or all");
  estimate->add_option("--misreport", misreport, "Combined-ML misreport covariates: full or x3");

  auto* diagnose = app.add_subcommand("diagnose", "Placebo test and response diagnostics");
  add_design_flags(diagnose);

  std::string summary_path;
  int figure_id = 1;
  auto* plot = app.add_subcommand("plot", "Render one figure from a summary CSV");
  plot->add_option("--summary", summary_path, "Summary CSV")->required();
  plot->add_option("--figure", figure_id, "Figure id (1-4)")->required();
  plot->add_option("--out", out_path, "Output SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kExitConfig;
  }

  listpolar::MisreportCovariates mis{};
  try {
    mis = parse_misreport(misreport);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitConfig;
  }
  run.misreport = mis;
  listpolar::DesignInfo design;
  if (j_items > 0) design.j_items = j_items;
  design.append_zero_item = zero_item;

  if (*simulate) return cli::cmd_simulate(config_path, run, std::cout, std::cerr);
  if (*replicate) {
    run.reps = replicate_reps;
    return cli::cmd_replicate(run, std::cout, std::cerr);
  }
  if (*generate) return cli::cmd_generate(config_path, gen_seed, out_path, std::cerr);
  if (*estimate) return cli::cmd_estimate(data_path, estimator, design, mis, std::cout, std::cerr);
  if (*diagnose) return cli::cmd_diagnose(data_path, design, std::cout, std::cerr);
  if (*plot) return cli::cmd_plot(summary_path, figure_id, out_path, std::cerr);
  return cli::kExitConfig;
}
