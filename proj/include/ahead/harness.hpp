#pragma once

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ahead/config.hpp"
#include "ahead/constants.hpp"
#include "ahead/dataset.hpp"
#include "ahead/log.hpp"
#include "ahead/network.hpp"
#include "ahead/problems.hpp"
#include "ahead/runner.hpp"

namespace ahead {

inline BilevelProblem build_problem(const ExperimentConfig& cfg) {
  if (cfg.problem.family == ProblemFamily::kSynthetic) {
    if (cfg.problem.paper_preset)
      return make_paper_synthetic(cfg.problem.x_box);
    const int m = static_cast<int>(cfg.problem.a.size());
    return make_synthetic_quadratic(m, cfg.problem.a, cfg.problem.b,
                                    cfg.problem.c, cfg.problem.d,
                                    cfg.problem.e, cfg.problem.x_box);
  }
  Dataset ds = load_dataset(cfg.problem.dataset_path, cfg.network.m,
                            cfg.problem.partition);
  return make_logistic_hyperopt(ds, cfg.network.m);
}

inline Graph build_graph(const ExperimentConfig& cfg) {
  switch (cfg.network.model) {
    case NetworkModel::kErdosRenyi:
      return erdos_renyi(cfg.network.m, cfg.network.p, cfg.network.seed);
    case NetworkModel::kRing:
      return Graph::ring(cfg.network.m);
    case NetworkModel::kComplete:
      return Graph::complete(cfg.network.m);
  }
  throw ConfigError("unknown network model");
}

struct ResolvedSteps {
  StepSizes steps;
  StepSizeCaps caps;
};

/// Turns the config's step-size section into concrete values. Auto mode
/// scales every cap by the safety factor (so the Theorem-1 rules hold by
/// construction); explicit steps above the caps require force=true.
inline ResolvedSteps resolve_steps(const ExperimentConfig& cfg,
                                   const AnalysisConstants& constants,
                                   const SmoothnessInput& smoothness,
                                   double rho) {
  ResolvedSteps out;
  out.caps = stepsize_caps(constants, smoothness, rho, cfg.steps.lambda);
  out.steps.lambda = cfg.steps.lambda;
  out.steps.K = cfg.steps.K;
  if (cfg.steps.auto_mode) {
    out.steps.alpha = cfg.steps.safety * out.caps.alpha_max;
    out.steps.beta = cfg.steps.safety * out.caps.beta_max;
    out.steps.gamma = cfg.steps.safety * out.caps.gamma_max;
  } else {
    out.steps.alpha = cfg.steps.alpha;
    out.steps.beta = cfg.steps.beta;
    out.steps.gamma = cfg.steps.gamma;
    const bool over = out.steps.alpha > out.caps.alpha_max ||
                      out.steps.beta > out.caps.beta_max ||
                      out.steps.gamma > out.caps.gamma_max;
    if (over && !cfg.steps.force)
      throw ConfigError(
          "explicit step sizes exceed the theoretical caps; set force=true "
          "under [stepsize] to run anyway (caps are still logged)");
  }
  out.steps.validate();
  return out;
}

/// Heterogeneity probe set: the logged xbar trajectory plus 20 seeded
/// uniform probes in [-x_box, x_box]^n.
inline HeterogeneityEstimate measure_heterogeneity(
    const BilevelProblem& problem, const RunLog& log, double x_box,
    std::uint64_t seed, double tol) {
  std::vector<Eigen::VectorXd> probes;
  probes.reserve(log.states.size() + 20);
  for (const SolverState& st : log.states)
    probes.push_back(st.x.colwise().mean());
  std::mt19937_64 gen(seed ^ 0x9e3779b97f4a7c15ull);
  for (int i = 0; i < 20; ++i) {
    Eigen::VectorXd x(problem.outer_dim());
    for (Eigen::Index j = 0; j < x.size(); ++j)
      x(j) = uniform_in(gen, -x_box, x_box);
    probes.push_back(std::move(x));
  }
  return heterogeneity(problem, probes, tol);
}

struct RunArtifacts {
  std::filesystem::path dir;
  std::filesystem::path header_path, metrics_path, graph_path, mixing_path;
  std::filesystem::path snapshots_path, bounds_text_path, bounds_kv_path;
  RunLog log;
  StepSizes steps;
  StepSizeCaps caps;
  AnalysisConstants constants;
  double rho = 0.0;
  std::optional<BoundReport> bounds;
  std::optional<HeterogeneityEstimate> het;
  int exit_code = 0;
};

inline std::filesystem::path default_output_dir(const ExperimentConfig& cfg) {
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv("AHEAD_OUT_DIR")) return env;
  return ".";
}

/// Full experiment: builds everything from the config, runs, and writes the
/// artifact set (header with constants/caps/rho/config echo, metrics CSV,
/// graph + mixing-matrix exports, optional snapshots and bound report).
/// Returns exit code 0 on completion, 2 on divergence (with partial
/// artifacts).
inline RunArtifacts cmd_run(const ExperimentConfig& cfg) {
  RunArtifacts art;
  art.dir = default_output_dir(cfg);
  std::filesystem::create_directories(art.dir);

  BilevelProblem problem = build_problem(cfg);
  Graph graph = build_graph(cfg);
  MixingMatrix mixing = metropolis_weights(graph);
  art.rho = mixing.rho;
  art.constants = derive_constants(problem.smoothness(), cfg.steps.lambda);
  ResolvedSteps resolved =
      resolve_steps(cfg, art.constants, problem.smoothness(), mixing.rho);
  art.steps = resolved.steps;
  art.caps = resolved.caps;

  RunOptions options;
  options.with_metrics = cfg.with_metrics || cfg.bound_checks;
  options.oracle_tol = cfg.oracle_tol;
  // the recurrence checks need every iterate
  options.log_interval =
      cfg.bound_checks ? 1 : cfg.effective_log_interval();
  options.store_states = cfg.bound_checks || cfg.save_snapshots;

  SolverState init =
      init_state(problem, mixing, cfg.init_mode, cfg.init_seed);
  art.log = run(problem, mixing, art.steps, std::move(init), art.constants,
                options);
  if (art.log.diverged) art.exit_code = 2;

  if (cfg.bound_checks && !art.log.diverged) {
    art.het = measure_heterogeneity(problem, art.log, cfg.problem.x_box,
                                    cfg.init_seed, cfg.oracle_tol);
    art.bounds = check_bounds(art.log, problem, art.constants, art.steps,
                              art.rho, *art.het, cfg.oracle_tol);
  }

  // artifacts
  const auto& s = problem.smoothness();
  std::ostringstream hdr;
  hdr.precision(17);
  hdr << "# ahead-run-header-v1\n";
  hdr << "rho=" << art.rho << "\n";
  hdr << "m=" << problem.num_nodes() << "\nn=" << problem.outer_dim()
      << "\nr=" << problem.inner_dim() << "\n";
  hdr << "mu_g=" << s.mu_g << "\nL_f1=" << s.L_f1 << "\nL_g1=" << s.L_g1
      << "\nL_g2=" << s.L_g2 << "\nC_fy=" << s.C_fy << "\n";
  const AnalysisConstants& c = art.constants;
  hdr << "kappa=" << c.kappa << "\nL=" << c.L << "\nL_ystar=" << c.L_ystar
      << "\nC_in=" << c.C_in << "\nC_ou=" << c.C_ou
      << "\nmu_lambda=" << c.mu_lambda << "\nL_lambda=" << c.L_lambda
      << "\nL_ystar_lambda=" << c.L_ystar_lambda
      << "\nU_lambda_sq=" << c.U_lambda_sq << "\nw_gamma=" << c.w_gamma
      << "\nw_beta=" << c.w_beta << "\nu_beta=" << c.u_beta << "\np1=" << c.p1
      << "\np2=" << c.p2 << "\np3=" << c.p3 << "\nlambda_above_threshold="
      << (c.lambda_above_threshold ? 1 : 0) << "\n";
  hdr << "alpha_max=" << art.caps.alpha_max << "\nbeta_max="
      << art.caps.beta_max << "\ngamma_max=" << art.caps.gamma_max << "\n";
  hdr << "alpha=" << art.steps.alpha << "\nbeta=" << art.steps.beta
      << "\ngamma=" << art.steps.gamma << "\nlambda=" << art.steps.lambda
      << "\nK=" << art.steps.K << "\n";
  hdr << "log_interval=" << options.log_interval << "\n";
  hdr << "diverged=" << (art.log.diverged ? 1 : 0) << "\n";
  if (art.log.diverged) hdr << "divergence=" << art.log.divergence_message
                            << "\n";
  if (art.het) {
    hdr << "b_f_sq=" << art.het->b_f_sq << "\nb_g_sq=" << art.het->b_g_sq
        << "\nhet_probes=" << art.het->probe_count << "\n";
    const ErrorFloors floors = error_floors(art.steps, c, art.rho,
                                            art.het->b_f_sq, art.het->b_g_sq);
    hdr << "C_sq=" << floors.C_sq << "\nB_sq=" << floors.B_sq << "\n";
  }
  hdr << "# config echo\n" << serialize_config(cfg);

  art.header_path = art.dir / "header.txt";
  {
    std::ofstream out(art.header_path);
    if (!out) throw IoError("cannot open for writing: " +
                            art.header_path.string());
    out << hdr.str();
  }

  art.metrics_path = art.dir / "metrics.csv";
  std::vector<std::string> echo{std::string("rho=") + std::to_string(art.rho)};
  write_metrics_csv(art.metrics_path.string(), art.log.records, echo);

  art.graph_path = art.dir / "graph.txt";
  save_edge_list(art.graph_path.string(), graph);
  art.mixing_path = art.dir / "mixing.csv";
  save_matrix_csv(art.mixing_path.string(), mixing.W);

  if (options.store_states) {
    art.snapshots_path = art.dir / "snapshots.txt";
    write_snapshots(art.snapshots_path.string(), art.log.states);
  }
  if (art.bounds) {
    art.bounds_text_path = art.dir / "bounds.txt";
    art.bounds_kv_path = art.dir / "bounds.kv";
    write_bound_report(art.bounds_text_path.string(),
                       art.bounds_kv_path.string(), *art.bounds);
    if (!art.bounds->all_pass() && art.exit_code == 0) art.exit_code = 3;
  }
  return art;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

enum class SweepAxis { kLambda, kK, kRhoProxy };
enum class SweepScaling { kFixed, kCorollary1 };

/// Corollary-1 step-size scalings with the shipped prefactors, as functions
/// of the horizon K and the condition number kappa.
inline StepSizes corollary1_steps(std::int64_t K, double kappa) {
  StepSizes p;
  p.lambda = 0.25 * kappa * std::pow(static_cast<double>(K), 1.0 / 6.0);
  p.alpha = 200.0 * std::pow(kappa, -3.0) *
            std::pow(static_cast<double>(K), -2.0 / 3.0);
  p.beta = std::pow(kappa, -1.0) * std::pow(static_cast<double>(K), -0.5);
  p.gamma = 0.3 * std::pow(static_cast<double>(K), -1.0 / 3.0);
  p.K = K;
  return p;
}

struct SweepRow {
  double value = 0.0;
  bool failed = false;
  std::string error;
  double final_grad_phi_sq = 0.0;
  double mean_grad_phi_sq = 0.0;
  double penalty_gap = 0.0;  // ||y*(0) - y*(0; lambda)|| at the origin probe
  double C_sq = 0.0;
  double B_sq = 0.0;
};

/// Runs one experiment per axis value and summarizes. Lambda sweeps hold the
/// resolved step sizes fixed; K sweeps optionally rescale everything per the
/// Corollary-1 rules; rho-proxy sweeps vary the Erdos-Renyi edge
/// probability. Per-run failures are recorded and the sweep continues.
inline std::vector<SweepRow> cmd_sweep(const ExperimentConfig& base,
                                       SweepAxis axis,
                                       const std::vector<double>& values,
                                       SweepScaling scaling =
                                           SweepScaling::kFixed) {
  if (values.empty())
    throw ConfigError("sweep needs a nonempty, positive value list");
  for (double v : values)
    if (!(v > 0.0)) throw ConfigError("sweep values must be positive");
  if (axis == SweepAxis::kRhoProxy &&
      base.network.model != NetworkModel::kErdosRenyi)
    throw ConfigError("rho-proxy sweeps need an erdos-renyi network");

  std::vector<SweepRow> rows;
  for (double value : values) {
    SweepRow row;
    row.value = value;
    try {
      ExperimentConfig cfg = base;
      cfg.bound_checks = false;
      cfg.save_snapshots = false;
      cfg.with_metrics = true;
      switch (axis) {
        case SweepAxis::kLambda:
          cfg.steps.lambda = value;
          cfg.steps.force = true;  // sweeps are exploratory by design
          break;
        case SweepAxis::kK:
          cfg.steps.K = static_cast<std::int64_t>(value);
          cfg.log_interval = 0;  // rescale the default with K
          if (scaling == SweepScaling::kCorollary1) cfg.steps.force = true;
          break;
        case SweepAxis::kRhoProxy:
          cfg.network.p = value;
          break;
      }

      BilevelProblem problem = build_problem(cfg);
      MixingMatrix mixing = metropolis_weights(build_graph(cfg));
      AnalysisConstants constants =
          derive_constants(problem.smoothness(), cfg.steps.lambda);
      StepSizes steps;
      if (axis == SweepAxis::kK && scaling == SweepScaling::kCorollary1) {
        steps = corollary1_steps(cfg.steps.K, constants.kappa);
        constants = derive_constants(problem.smoothness(), steps.lambda);
      } else {
        steps = resolve_steps(cfg, constants, problem.smoothness(),
                              mixing.rho)
                    .steps;
      }

      RunOptions options;
      options.log_interval = cfg.effective_log_interval();
      options.oracle_tol = cfg.oracle_tol;
      SolverState init =
          init_state(problem, mixing, cfg.init_mode, cfg.init_seed);
      RunLog log =
          run(problem, mixing, steps, std::move(init), constants, options);
      if (log.diverged) {
        row.failed = true;
        row.error = log.divergence_message;
        rows.push_back(row);
        continue;
      }

      double mean = 0.0;
      for (const MetricsRecord& r : log.records) mean += r.grad_phi_sq;
      mean /= static_cast<double>(log.records.size());
      row.mean_grad_phi_sq = mean;
      row.final_grad_phi_sq = log.records.back().grad_phi_sq;

      const Eigen::VectorXd origin =
          Eigen::VectorXd::Zero(problem.outer_dim());
      const SolveResult inner = inner_solve(problem, origin, cfg.oracle_tol);
      const SolveResult pen = penalized_inner_solve(problem, origin,
                                                    steps.lambda,
                                                    cfg.oracle_tol);
      row.penalty_gap = (inner.y - pen.y).norm();

      HeterogeneityEstimate het = measure_heterogeneity(
          problem, log, cfg.problem.x_box, cfg.init_seed, cfg.oracle_tol);
      const ErrorFloors floors = error_floors(steps, constants, mixing.rho,
                                              het.b_f_sq, het.b_g_sq);
      row.C_sq = floors.C_sq;
      row.B_sq = floors.B_sq;
    } catch (const std::exception& ex) {
      row.failed = true;
      row.error = ex.what();
    }
    rows.push_back(row);
  }
  return rows;
}

inline std::string render_sweep_table(const std::vector<SweepRow>& rows,
                                      const std::string& axis_name) {
  std::ostringstream out;
  out << axis_name
      << ",final_grad_phi_sq,mean_grad_phi_sq,penalty_gap,C_sq,B_sq,status\n";
  out.precision(12);
  for (const SweepRow& r : rows) {
    out << r.value << ",";
    if (r.failed) {
      out << ",,,,,failed: " << r.error << "\n";
    } else {
      out << r.final_grad_phi_sq << "," << r.mean_grad_phi_sq << ","
          << r.penalty_gap << "," << r.C_sq << "," << r.B_sq << ",ok\n";
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Data generation and re-checking
// ---------------------------------------------------------------------------

/// Writes a two-cluster classification dataset in the ingestion format
/// (assignment-column variant). Deterministic per seed.
inline std::filesystem::path cmd_gen_data(int n_features, int samples_per_node,
                                          int m, double separation,
                                          std::uint64_t seed,
                                          const std::string& out_path) {
  Dataset ds =
      generate_two_clusters(n_features, samples_per_node, m, separation, seed);
  save_dataset(out_path, ds);
  return out_path;
}

/// Re-runs the bound checks on an existing metrics log plus state snapshots,
/// rebuilding the problem, network, and constants from the config.
inline BoundReport cmd_check(const ExperimentConfig& cfg,
                             const std::string& metrics_path,
                             const std::string& snapshots_path) {
  BilevelProblem problem = build_problem(cfg);
  MixingMatrix mixing = metropolis_weights(build_graph(cfg));
  AnalysisConstants constants =
      derive_constants(problem.smoothness(), cfg.steps.lambda);
  ResolvedSteps resolved =
      resolve_steps(cfg, constants, problem.smoothness(), mixing.rho);

  RunLog log;
  log.records = read_metrics_csv(metrics_path);
  log.states = read_snapshots(snapshots_path);
  if (log.records.size() != log.states.size())
    throw DataError("metrics log and snapshots disagree on record count");

  HeterogeneityEstimate het = measure_heterogeneity(
      problem, log, cfg.problem.x_box, cfg.init_seed, cfg.oracle_tol);
  return check_bounds(log, problem, constants, resolved.steps, mixing.rho,
                      het, cfg.oracle_tol);
}

}  // namespace ahead
