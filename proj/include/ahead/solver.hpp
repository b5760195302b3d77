#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "ahead/constants.hpp"
#include "ahead/errors.hpp"
#include "ahead/metrics.hpp"
#include "ahead/network.hpp"
#include "ahead/problem.hpp"
#include "ahead/random.hpp"

namespace ahead {

/// Stacked per-node iterates: row i of x / y / z belongs to node i.
struct SolverState {
  Eigen::MatrixXd x;  // m x n
  Eigen::MatrixXd y;  // m x r
  Eigen::MatrixXd z;  // m x r
  std::int64_t k = 0;

  bool finite() const {
    return x.allFinite() && y.allFinite() && z.allFinite();
  }
};

/// Stacked gradient directions of the triple update; row i is node i's
/// direction.
struct DirectionFields {
  Eigen::MatrixXd h_x;  // m x n
  Eigen::MatrixXd h_y;  // m x r
  Eigen::MatrixXd h_z;  // m x r
};

enum class InitMode { kZeros, kRandom, kConsensusRandom };

inline SolverState init_state(const BilevelProblem& problem,
                              const MixingMatrix& network, InitMode mode,
                              std::uint64_t seed = 0) {
  const int m = problem.num_nodes();
  if (network.size() != m)
    throw ConfigError("problem has " + std::to_string(m) +
                      " nodes but the network has " +
                      std::to_string(network.size()));
  const int n = problem.outer_dim();
  const int r = problem.inner_dim();
  SolverState state;
  state.x = Eigen::MatrixXd::Zero(m, n);
  state.y = Eigen::MatrixXd::Zero(m, r);
  state.z = Eigen::MatrixXd::Zero(m, r);
  state.k = 0;
  if (mode == InitMode::kZeros) return state;

  std::mt19937_64 gen(seed);
  if (mode == InitMode::kRandom) {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) state.x(i, j) = uniform_pm1(gen);
      for (int j = 0; j < r; ++j) state.y(i, j) = uniform_pm1(gen);
      for (int j = 0; j < r; ++j) state.z(i, j) = uniform_pm1(gen);
    }
  } else {  // one random vector replicated to every node
    Eigen::RowVectorXd xr(n), yr(r), zr(r);
    for (int j = 0; j < n; ++j) xr(j) = uniform_pm1(gen);
    for (int j = 0; j < r; ++j) yr(j) = uniform_pm1(gen);
    for (int j = 0; j < r; ++j) zr(j) = uniform_pm1(gen);
    state.x.rowwise() = xr;
    state.y.rowwise() = yr;
    state.z.rowwise() = zr;
  }
  return state;
}

/// Per-node gradient directions of the triple update, all evaluated at the
/// incoming iterate:
///   h_z,i = grad_y g_i(x_i, z_i)
///   h_y,i = grad_y f_i(x_i, y_i) + lambda grad_y g_i(x_i, y_i)
///   h_x,i = grad_x f_i(x_i, y_i)
///           + lambda (grad_x g_i(x_i, y_i) - grad_x g_i(x_i, z_i))
/// No second-order oracle is touched.
inline DirectionFields directions(const BilevelProblem& problem,
                                  const SolverState& state, double lambda) {
  if (!state.finite())
    throw DivergenceError(state.k, std::numeric_limits<double>::infinity());
  const int m = problem.num_nodes();
  DirectionFields dir;
  dir.h_x.resize(m, problem.outer_dim());
  dir.h_y.resize(m, problem.inner_dim());
  dir.h_z.resize(m, problem.inner_dim());
  for (int i = 0; i < m; ++i) {
    try {
      const Eigen::VectorXd xi = state.x.row(i);
      const Eigen::VectorXd yi = state.y.row(i);
      const Eigen::VectorXd zi = state.z.row(i);
      const GradPair f_y = problem.outer_grad(i, xi, yi);
      const GradPair g_y = problem.inner_grad(i, xi, yi);
      const GradPair g_z = problem.inner_grad(i, xi, zi);
      dir.h_z.row(i) = g_z.y;
      dir.h_y.row(i) = f_y.y + lambda * g_y.y;
      dir.h_x.row(i) = f_y.x + lambda * (g_y.x - g_z.x);
    } catch (const std::exception& ex) {
      throw OracleError(i, ex.what());
    }
  }
  return dir;
}

namespace detail {

constexpr double kDivergenceLimit = 1e12;

inline void check_finite_or_throw(const SolverState& state) {
  double worst = 0.0;
  bool bad = false;
  for (const Eigen::MatrixXd* block : {&state.x, &state.y, &state.z}) {
    const double mx = block->cwiseAbs().maxCoeff();
    worst = std::max(worst, mx);
    if (!block->allFinite() || mx > kDivergenceLimit) bad = true;
  }
  if (bad) throw DivergenceError(state.k, worst);
}

}  // namespace detail

/// One synchronous AHEAD iteration: simultaneous update with every gradient
/// evaluated at the incoming iterate, then blockwise mixing.
///   z' = W z - gamma h_z,  y' = W y - beta h_y,  x' = W x - alpha h_x
inline SolverState step(const BilevelProblem& problem,
                        const MixingMatrix& network, const SolverState& state,
                        const StepSizes& p) {
  p.validate();
  const DirectionFields dir = directions(problem, state, p.lambda);
  SolverState next;
  next.x.noalias() = network.W * state.x;
  next.x -= p.alpha * dir.h_x;
  next.y.noalias() = network.W * state.y;
  next.y -= p.beta * dir.h_y;
  next.z.noalias() = network.W * state.z;
  next.z -= p.gamma * dir.h_z;
  next.k = state.k + 1;
  detail::check_finite_or_throw(next);
  return next;
}

/// Ordered run log: one MetricsRecord per logged iteration, with matching
/// state snapshots when requested (the recurrence checks need them).
struct RunLog {
  std::vector<MetricsRecord> records;
  std::vector<SolverState> states;
  SolverState final_state;
  bool diverged = false;
  std::string divergence_message;
};

struct RunOptions {
  std::int64_t log_interval = 1;
  double oracle_tol = 1e-10;
  bool with_metrics = true;
  bool store_states = true;
};

}  // namespace ahead
