// Command-line front end: run / sweep / check / gen-data.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ahead/harness.hpp"

namespace {

ahead::ExperimentConfig load_config(const std::string& path,
                                    std::optional<std::uint64_t> seed_override,
                                    const std::string& out_override) {
  ahead::ExperimentConfig cfg = ahead::parse_config(path);
  if (seed_override) cfg.init_seed = *seed_override;
  if (!out_override.empty()) cfg.output_dir = out_override;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AHEAD distributed bilevel optimization simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir, axis_name, scaling_name = "fixed";
  std::string metrics_path, snapshots_path, data_out;
  std::optional<std::uint64_t> seed_override;
  std::vector<double> sweep_values;
  int features = 20, samples_per_node = 100, nodes = 10;
  double separation = 4.0;
  std::uint64_t data_seed = 0;

  auto* run_cmd = app.add_subcommand("run", "run one experiment from a config");
  run_cmd->add_option("--config", config_path, "config file")->required();
  run_cmd->add_option("--seed", seed_override, "override the init seed");
  run_cmd->add_option("--out", out_dir,
                      "output directory (default: config, then $AHEAD_OUT_DIR)");

  auto* sweep_cmd =
      app.add_subcommand("sweep", "run one experiment per axis value");
  sweep_cmd->add_option("--config", config_path, "config file")->required();
  sweep_cmd->add_option("--axis", axis_name, "lambda | K | rho-proxy")
      ->required();
  sweep_cmd->add_option("--values", sweep_values, "axis values")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--scaling", scaling_name,
                        "fixed | corollary1 (K axis only)");
  sweep_cmd->add_option("--seed", seed_override, "override the init seed");
  sweep_cmd->add_option("--out", out_dir, "output directory");

  auto* check_cmd = app.add_subcommand(
      "check", "re-run bound checks on an existing log + snapshots");
  check_cmd->add_option("--config", config_path, "config file")->required();
  check_cmd->add_option("--metrics", metrics_path, "metrics.csv from a run")
      ->required();
  check_cmd->add_option("--snapshots", snapshots_path,
                        "snapshots.txt from a run")
      ->required();
  check_cmd->add_option("--out", out_dir, "output directory");

  auto* gen_cmd = app.add_subcommand(
      "gen-data", "generate a two-cluster classification dataset");
  gen_cmd->add_option("--features", features, "feature dimension")->required();
  gen_cmd->add_option("--samples-per-node", samples_per_node,
                      "samples per node")
      ->required();
  gen_cmd->add_option("--nodes", nodes, "node count")->required();
  gen_cmd->add_option("--separation", separation, "cluster separation");
  gen_cmd->add_option("--seed", data_seed, "generator seed");
  gen_cmd->add_option("--out", data_out, "output file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      ahead::RunArtifacts art =
          ahead::cmd_run(load_config(config_path, seed_override, out_dir));
      std::cout << "run finished: k=" << art.log.final_state.k
                << " rho=" << art.rho << " -> " << art.dir.string() << "\n";
      if (art.log.diverged)
        std::cerr << "diverged: " << art.log.divergence_message << "\n";
      if (art.bounds) std::cout << ahead::render_bound_report(*art.bounds);
      return art.exit_code;
    }
    if (*sweep_cmd) {
      ahead::SweepAxis axis;
      if (axis_name == "lambda") axis = ahead::SweepAxis::kLambda;
      else if (axis_name == "K") axis = ahead::SweepAxis::kK;
      else if (axis_name == "rho-proxy") axis = ahead::SweepAxis::kRhoProxy;
      else throw ahead::ConfigError("unknown sweep axis: " + axis_name);
      ahead::SweepScaling scaling;
      if (scaling_name == "fixed") scaling = ahead::SweepScaling::kFixed;
      else if (scaling_name == "corollary1")
        scaling = ahead::SweepScaling::kCorollary1;
      else throw ahead::ConfigError("unknown scaling: " + scaling_name);

      ahead::ExperimentConfig cfg =
          load_config(config_path, seed_override, out_dir);
      auto rows = ahead::cmd_sweep(cfg, axis, sweep_values, scaling);
      const std::string table = ahead::render_sweep_table(rows, axis_name);
      std::cout << table;
      const auto dir = ahead::default_output_dir(cfg);
      std::filesystem::create_directories(dir);
      std::ofstream out(dir / "sweep.csv");
      out << table;
      for (const auto& row : rows)
        if (row.failed) return 2;
      return 0;
    }
    if (*check_cmd) {
      ahead::ExperimentConfig cfg =
          load_config(config_path, std::nullopt, out_dir);
      ahead::BoundReport report =
          ahead::cmd_check(cfg, metrics_path, snapshots_path);
      std::cout << ahead::render_bound_report(report);
      const auto dir = ahead::default_output_dir(cfg);
      std::filesystem::create_directories(dir);
      ahead::write_bound_report((dir / "bounds.txt").string(),
                                (dir / "bounds.kv").string(), report);
      return report.all_pass() ? 0 : 3;
    }
    if (*gen_cmd) {
      auto path = ahead::cmd_gen_data(features, samples_per_node, nodes,
                                      separation, data_seed, data_out);
      std::cout << "wrote " << path.string() << "\n";
      return 0;
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
