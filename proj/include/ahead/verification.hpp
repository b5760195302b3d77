#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ahead/constants.hpp"
#include "ahead/errors.hpp"
#include "ahead/metrics.hpp"
#include "ahead/network.hpp"
#include "ahead/problem.hpp"
#include "ahead/solver.hpp"

namespace ahead {

struct SolveResult {
  Eigen::VectorXd y;
  bool converged = false;
  double residual = 0.0;
  int iterations = 0;
};

inline constexpr int kDefaultSolveIterationCap = 200000;

/// Gradient descent on y -> (1/m) sum_i g_i(x, y) with the optimal fixed
/// step 2/(mu_g + L_g1), run until ||mean grad_y g|| <= tol. When the
/// problem carries a closed-form argmin it is used as the starting point and
/// cross-checked against the gradient residual.
inline SolveResult inner_solve(
    const BilevelProblem& problem, const Eigen::VectorXd& x, double tol,
    std::optional<Eigen::VectorXd> start = std::nullopt,
    int iteration_cap = kDefaultSolveIterationCap) {
  if (!(tol > 0.0)) throw ConfigError("tolerance must be positive");
  const SmoothnessInput& s = problem.smoothness();
  SolveResult res;
  if (start) {
    res.y = *start;
  } else if (problem.has_exact_inner_argmin()) {
    res.y = problem.exact_inner_argmin(x);
  } else {
    res.y = Eigen::VectorXd::Zero(problem.inner_dim());
  }
  const double step = 2.0 / (s.mu_g + s.L_g1);
  for (int it = 0; it <= iteration_cap; ++it) {
    const Eigen::VectorXd g = problem.averaged_inner_grad(x, res.y).y;
    res.residual = g.norm();
    res.iterations = it;
    if (res.residual <= tol) {
      res.converged = true;
      return res;
    }
    res.y -= step * g;
  }
  res.converged = false;
  return res;
}

/// Gradient descent on the penalty objective
///   y -> (1/m) sum_i [f_i(x, y) + lambda g_i(x, y)]
/// (the y-constant value-function offset is dropped), step
/// 2/(mu_lambda + L_lambda). Starts from the inner solution, which keeps the
/// min-max lambda = 1 case (a y-constant objective) well-defined.
inline SolveResult penalized_inner_solve(
    const BilevelProblem& problem, const Eigen::VectorXd& x, double lambda,
    double tol, std::optional<Eigen::VectorXd> start = std::nullopt,
    int iteration_cap = kDefaultSolveIterationCap) {
  if (!(tol > 0.0)) throw ConfigError("tolerance must be positive");
  if (!(lambda > 0.0)) throw ConfigError("lambda must be strictly positive");
  const SmoothnessInput& s = problem.smoothness();
  SolveResult res;
  if (start) {
    res.y = *start;
  } else if (problem.has_exact_inner_argmin()) {
    res.y = problem.exact_inner_argmin(x);
  } else {
    res.y = inner_solve(problem, x, tol, std::nullopt, iteration_cap).y;
  }
  const double mu_lambda = lambda * s.mu_g / 2.0;
  const double L_lambda = s.L_f1 + lambda * s.L_g1;
  const double step = 2.0 / (mu_lambda + L_lambda);
  for (int it = 0; it <= iteration_cap; ++it) {
    const Eigen::VectorXd g = problem.averaged_outer_grad(x, res.y).y +
                              lambda * problem.averaged_inner_grad(x, res.y).y;
    res.residual = g.norm();
    res.iterations = it;
    if (res.residual <= tol) {
      res.converged = true;
      return res;
    }
    res.y -= step * g;
  }
  res.converged = false;
  return res;
}

/// Phi(x) = (1/m) sum_i f_i(x, y*(x)) with y*(x) from inner_solve.
inline double phi_value(const BilevelProblem& problem, const Eigen::VectorXd& x,
                        double tol, bool* converged = nullptr) {
  SolveResult inner = inner_solve(problem, x, tol);
  if (converged) *converged = inner.converged;
  return problem.averaged_outer_value(x, inner.y);
}

/// Central finite differences of Phi, coordinatewise; every Phi evaluation
/// runs its own inner solve.
inline Eigen::VectorXd finite_diff_hypergradient(const BilevelProblem& problem,
                                                 const Eigen::VectorXd& x,
                                                 double h, double tol = 1e-10) {
  if (!(h > 0.0)) throw ConfigError("finite-difference step must be positive");
  Eigen::VectorXd grad(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    probe(j) = x(j) + h;
    bool up_ok = false, dn_ok = false;
    const double up = phi_value(problem, probe, tol, &up_ok);
    probe(j) = x(j) - h;
    const double dn = phi_value(problem, probe, tol, &dn_ok);
    probe(j) = x(j);
    if (!up_ok || !dn_ok)
      throw NumericalError(
          "inner solve did not converge inside finite_diff_hypergradient");
    grad(j) = (up - dn) / (2.0 * h);
  }
  return grad;
}

struct HypergradResult {
  Eigen::VectorXd grad;
  bool used_finite_diff = false;
  bool converged = true;
};

/// Implicit-differentiation hypergradient:
///   grad Phi(x) = grad_x f(x, y*) - G_xy [G_yy]^{-1} grad_y f(x, y*)
/// with averaged second-order blocks at (x, y*). Falls back to central
/// finite differences when the problem has no second-order oracle.
inline HypergradResult hypergradient(const BilevelProblem& problem,
                                     const Eigen::VectorXd& x, double tol) {
  HypergradResult out;
  if (!problem.has_second_order()) {
    out.used_finite_diff = true;
    const double h = 1e-5 * (1.0 + x.norm());
    out.grad = finite_diff_hypergradient(problem, x, h, tol);
    return out;
  }
  SolveResult inner = inner_solve(problem, x, tol);
  out.converged = inner.converged;
  const HessPair hess = problem.averaged_second_order(x, inner.y);
  const GradPair f = problem.averaged_outer_grad(x, inner.y);
  Eigen::LLT<Eigen::MatrixXd> llt(hess.yy);
  if (llt.info() != Eigen::Success)
    throw NumericalError(
        "averaged inner Hessian is not positive definite in hypergradient");
  out.grad = f.x - hess.xy * llt.solve(f.y);
  return out;
}

/// All per-iteration diagnostics at the averaged iterates, including the
/// potential V^k of the analysis. Oracle non-convergence sets flags but never
/// aborts.
inline MetricsRecord metrics(const BilevelProblem& problem,
                             const MixingMatrix& network,
                             const SolverState& state, const StepSizes& p,
                             const AnalysisConstants& c, double tol = 1e-10) {
  const double m = static_cast<double>(problem.num_nodes());
  MetricsRecord rec;
  rec.k = state.k;

  const Eigen::VectorXd xbar = state.x.colwise().mean();
  const Eigen::VectorXd ybar = state.y.colwise().mean();
  const Eigen::VectorXd zbar = state.z.colwise().mean();

  rec.cons_x_sq =
      (state.x.rowwise() - xbar.transpose()).squaredNorm() / m;
  rec.cons_y_sq =
      (state.y.rowwise() - ybar.transpose()).squaredNorm() / m;
  rec.cons_z_sq =
      (state.z.rowwise() - zbar.transpose()).squaredNorm() / m;

  const SolveResult inner = inner_solve(problem, xbar, tol);
  rec.flags.inner_converged = inner.converged;
  rec.inner_err_sq = (zbar - inner.y).squaredNorm();
  rec.phi = problem.averaged_outer_value(xbar, inner.y);

  const SolveResult pen = penalized_inner_solve(problem, xbar, p.lambda, tol);
  rec.flags.penalized_converged = pen.converged;
  rec.pen_inner_err_sq = (ybar - pen.y).squaredNorm();

  HypergradResult hyper = hypergradient(problem, xbar, tol);
  rec.flags.hypergrad_converged = hyper.converged;
  rec.flags.hypergrad_finite_diff = hyper.used_finite_diff;
  rec.grad_phi_sq = hyper.grad.squaredNorm();

  const DirectionFields dir = directions(problem, state, p.lambda);
  const Eigen::VectorXd hbar_x = dir.h_x.colwise().mean();
  rec.grad_approx_sq = (hyper.grad - hbar_x).squaredNorm();

  const PotentialCoefficients d = potential_coefficients(p, c, network.rho);
  rec.potential = d.d0 * rec.phi + d.d1 * rec.pen_inner_err_sq +
                  d.d2 * rec.inner_err_sq + d.d3 * rec.cons_x_sq +
                  d.d4 * rec.cons_y_sq + d.d5 * rec.cons_z_sq;
  return rec;
}

/// Measured heterogeneity constants (Definition 1 at (x, y*(x))): running
/// suprema of (1/m) sum_i ||grad h_i - grad h||^2 over both partial blocks.
struct HeterogeneityEstimate {
  double b_f_sq = 0.0;
  double b_g_sq = 0.0;
  int probe_count = 0;
  bool all_converged = true;
};

inline HeterogeneityEstimate heterogeneity(
    const BilevelProblem& problem, std::span<const Eigen::VectorXd> x_samples,
    double tol = 1e-10) {
  if (x_samples.empty())
    throw ConfigError("heterogeneity needs at least one probe point");
  const int m = problem.num_nodes();
  HeterogeneityEstimate est;
  for (const Eigen::VectorXd& x : x_samples) {
    const SolveResult inner = inner_solve(problem, x, tol);
    est.all_converged = est.all_converged && inner.converged;
    std::vector<GradPair> fg(m), gg(m);
    GradPair fmean{Eigen::VectorXd::Zero(problem.outer_dim()),
                   Eigen::VectorXd::Zero(problem.inner_dim())};
    GradPair gmean = fmean;
    for (int i = 0; i < m; ++i) {
      fg[i] = problem.outer_grad(i, x, inner.y);
      gg[i] = problem.inner_grad(i, x, inner.y);
      fmean.x += fg[i].x;
      fmean.y += fg[i].y;
      gmean.x += gg[i].x;
      gmean.y += gg[i].y;
    }
    fmean.x /= m; fmean.y /= m; gmean.x /= m; gmean.y /= m;
    double devf = 0.0, devg = 0.0;
    for (int i = 0; i < m; ++i) {
      devf += (fg[i].x - fmean.x).squaredNorm() +
              (fg[i].y - fmean.y).squaredNorm();
      devg += (gg[i].x - gmean.x).squaredNorm() +
              (gg[i].y - gmean.y).squaredNorm();
    }
    est.b_f_sq = std::max(est.b_f_sq, devf / m);
    est.b_g_sq = std::max(est.b_g_sq, devg / m);
    ++est.probe_count;
  }
  return est;
}

// ---------------------------------------------------------------------------
// Numerical checkers for the analysis bounds.
// ---------------------------------------------------------------------------

struct BoundCheck {
  std::string name;
  bool applicable = true;
  bool pass = true;
  int points = 0;
  int violations = 0;
  double worst_lhs = 0.0;
  double worst_rhs = 0.0;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::string note;

  void record(double lhs, double rhs) {
    ++points;
    const double margin = rhs - lhs;
    if (margin < worst_margin) {
      worst_margin = margin;
      worst_lhs = lhs;
      worst_rhs = rhs;
    }
    if (lhs > rhs) {
      ++violations;
      pass = false;
    }
  }
};

struct BoundReport {
  std::vector<BoundCheck> checks;

  bool all_pass() const {
    for (const auto& c : checks)
      if (c.applicable && !c.pass) return false;
    return true;
  }
};

/// Multiplicative slack absorbing oracle residuals in the bound checks.
inline constexpr double kBoundSlack = 1.0 + 1e-6;
/// Absolute slack for bounds whose two sides both sit at numerical zero.
inline constexpr double kBoundAbsSlack = 1e-15;

/// Evaluates grad p*(x; lambda) = grad_x f(x, y_lam) + lambda (grad_x g(x,
/// y_lam) - grad_x g(x, y)) from the two oracle solves (Danskin form; no
/// printed formula exists for it).
inline Eigen::VectorXd penalized_outer_grad(const BilevelProblem& problem,
                                            const Eigen::VectorXd& x,
                                            double lambda, double tol,
                                            bool* converged = nullptr) {
  const SolveResult inner = inner_solve(problem, x, tol);
  const SolveResult pen = penalized_inner_solve(problem, x, lambda, tol);
  if (converged) *converged = inner.converged && pen.converged;
  return problem.averaged_outer_grad(x, pen.y).x +
         lambda * (problem.averaged_inner_grad(x, pen.y).x -
                   problem.averaged_inner_grad(x, inner.y).x);
}

/// Runs every implemented checker over a finished run:
///  (a) Lemma 1 inner penalty gap, (b) Lemma 2 outer penalty gap,
///  (c) Lemma 4 pointwise gradient-approximation bound,
///  (d) Lemma 5/6/7 per-step recurrences (needs consecutive records and
///      state snapshots), (e) Theorem 1 inequality at every prefix.
inline BoundReport check_bounds(const RunLog& log,
                                const BilevelProblem& problem,
                                const AnalysisConstants& c, const StepSizes& p,
                                double rho, const HeterogeneityEstimate& het,
                                double tol = 1e-10) {
  BoundReport report;
  const SmoothnessInput& s = c.smoothness;
  const double lam = p.lambda;
  const double lam_sq = lam * lam;
  const double Lg1_sq = s.L_g1 * s.L_g1;
  const double r1 = 1.0 - rho;
  const bool has_states = log.states.size() == log.records.size() &&
                          !log.states.empty();
  bool consecutive = log.records.size() >= 2;
  for (std::size_t i = 1; i < log.records.size(); ++i)
    consecutive = consecutive &&
                  (log.records[i].k == log.records[i - 1].k + 1);

  // mean direction norms ||hbar_x^k||^2, needed by the (d) recurrences
  std::vector<double> hbar_sq;
  if (has_states) {
    hbar_sq.reserve(log.states.size());
    for (const SolverState& st : log.states) {
      const DirectionFields dir = directions(problem, st, lam);
      hbar_sq.push_back(dir.h_x.colwise().mean().squaredNorm());
    }
  }

  // (a) Lemma 1
  {
    BoundCheck chk;
    chk.name = "lemma1_inner_penalty_gap";
    if (!c.lambda_above_threshold) {
      chk.applicable = false;
      chk.note = "lambda <= 2 L_f1 / mu_g; bound not claimed";
    } else if (!has_states) {
      chk.applicable = false;
      chk.note = "state snapshots unavailable";
    } else {
      const double rhs = c.C_in * c.C_in / lam_sq;
      for (const SolverState& st : log.states) {
        const Eigen::VectorXd xbar = st.x.colwise().mean();
        const SolveResult inner = inner_solve(problem, xbar, tol);
        const SolveResult pen = penalized_inner_solve(problem, xbar, lam, tol);
        const double lhs = (inner.y - pen.y).squaredNorm();
        chk.record(lhs, rhs * kBoundSlack + kBoundAbsSlack);
      }
    }
    report.checks.push_back(chk);
  }

  // (b) Lemma 2
  {
    BoundCheck chk;
    chk.name = "lemma2_outer_penalty_gap";
    if (!c.lambda_above_threshold) {
      chk.applicable = false;
      chk.note = "lambda <= 2 L_f1 / mu_g; bound not claimed";
    } else if (!has_states) {
      chk.applicable = false;
      chk.note = "state snapshots unavailable";
    } else {
      const double rhs = c.C_ou * c.C_ou / lam_sq;
      for (const SolverState& st : log.states) {
        const Eigen::VectorXd xbar = st.x.colwise().mean();
        const Eigen::VectorXd gphi = hypergradient(problem, xbar, tol).grad;
        const Eigen::VectorXd gpen =
            penalized_outer_grad(problem, xbar, lam, tol);
        chk.record((gphi - gpen).squaredNorm(),
                   rhs * kBoundSlack + kBoundAbsSlack);
      }
    }
    report.checks.push_back(chk);
  }

  // (c) Lemma 4, pointwise from the records
  {
    BoundCheck chk;
    chk.name = "lemma4_gradient_approximation";
    for (const MetricsRecord& r : log.records) {
      const double rhs =
          2.0 * c.C_ou * c.C_ou / lam_sq + 12.0 * c.U_lambda_sq * r.pen_inner_err_sq +
          12.0 * Lg1_sq * lam_sq * r.inner_err_sq +
          12.0 * c.U_lambda_sq * r.cons_x_sq +
          12.0 * c.U_lambda_sq * r.cons_y_sq +
          12.0 * Lg1_sq * lam_sq * r.cons_z_sq;
      chk.record(r.grad_approx_sq, rhs * kBoundSlack + kBoundAbsSlack);
    }
    report.checks.push_back(chk);
  }

  // (d) Lemma 5 / 6 / 7 recurrences
  {
    BoundCheck c5, c6, c7;
    c5.name = "lemma5_inner_error_recurrence";
    c6.name = "lemma6_penalized_inner_error_recurrence";
    c7.name = "lemma7_consensus_recurrences";
    const double gamma_cap = std::min(
        2.0 / (s.mu_g + s.L_g1), 0.5 * (s.mu_g + s.L_g1) / (s.mu_g * s.L_g1));
    const double beta_cap =
        std::min(1.0 / (lam * s.L_g1),
                 0.5 / (s.L_f1 + lam * s.L_g1) + 1.0 / (lam * s.mu_g));
    if (!consecutive || !has_states) {
      c5.applicable = c6.applicable = c7.applicable = false;
      c5.note = c6.note = c7.note =
          "needs consecutive records (logging interval 1) and snapshots";
    } else {
      if (p.gamma > gamma_cap) {
        c5.applicable = false;
        c5.note = "gamma exceeds the recurrence precondition";
      }
      if (p.beta > beta_cap) {
        c6.applicable = false;
        c6.note = "beta exceeds the recurrence precondition";
      }
      for (std::size_t i = 0; i + 1 < log.records.size(); ++i) {
        const MetricsRecord& r = log.records[i];
        const MetricsRecord& rn = log.records[i + 1];
        if (c5.applicable) {
          const double rhs =
              (1.0 - s.mu_g * s.L_g1 / (s.mu_g + s.L_g1) * p.gamma) *
                  r.inner_err_sq +
              4.0 * Lg1_sq / c.w_gamma * p.gamma *
                  (r.cons_x_sq + r.cons_z_sq) +
              2.0 * c.L_ystar * c.L_ystar / (p.gamma * c.w_gamma) * p.alpha *
                  p.alpha * hbar_sq[i];
          c5.record(rn.inner_err_sq, rhs * kBoundSlack + kBoundAbsSlack);
        }
        if (c6.applicable) {
          const double rhs =
              (1.0 - c.mu_lambda * c.L_lambda / (c.mu_lambda + c.L_lambda) *
                         p.beta) *
                  r.pen_inner_err_sq +
              8.0 * c.L_lambda / c.w_beta * p.beta *
                  (r.cons_x_sq + r.cons_y_sq) +
              2.0 * c.L_ystar_lambda * c.L_ystar_lambda / (p.beta * c.w_beta) *
                  p.alpha * p.alpha * hbar_sq[i];
          c6.record(rn.pen_inner_err_sq, rhs * kBoundSlack + kBoundAbsSlack);
        }
        // Lemma 7, normalized by m (every printed term carries the factor)
        const double a2 = p.alpha * p.alpha;
        const double b2 = p.beta * p.beta;
        const double g2 = p.gamma * p.gamma;
        const double rhs_x =
            (1.0 - r1 / 2.0) * r.cons_x_sq +
            108.0 * a2 * c.U_lambda_sq / r1 * (r.cons_y_sq + r.cons_x_sq) +
            108.0 * a2 * lam_sq * Lg1_sq / r1 * r.cons_z_sq +
            108.0 * a2 * c.U_lambda_sq / r1 * r.pen_inner_err_sq +
            108.0 * a2 * c.C_in * c.C_in * c.U_lambda_sq / (r1 * lam_sq) +
            108.0 * a2 * lam_sq * Lg1_sq / r1 * r.inner_err_sq +
            6.0 * a2 * het.b_f_sq / r1;
        const double rhs_y =
            (1.0 - r1 / 2.0) * r.cons_y_sq +
            72.0 * b2 * c.U_lambda_sq / r1 * (r.cons_x_sq + r.cons_y_sq) +
            72.0 * b2 * c.U_lambda_sq / r1 * r.pen_inner_err_sq +
            72.0 * b2 * c.C_in * c.C_in * c.U_lambda_sq / (r1 * lam_sq) +
            12.0 * b2 / r1 * (het.b_f_sq + lam_sq * het.b_g_sq);
        const double rhs_z =
            (1.0 - r1 / 2.0) * r.cons_z_sq +
            24.0 * Lg1_sq * g2 / r1 * (r.cons_x_sq + r.cons_z_sq) +
            24.0 * Lg1_sq * g2 / r1 * r.inner_err_sq +
            6.0 * g2 * het.b_g_sq / r1;
        c7.record(rn.cons_x_sq, rhs_x * kBoundSlack + kBoundAbsSlack);
        c7.record(rn.cons_y_sq, rhs_y * kBoundSlack + kBoundAbsSlack);
        c7.record(rn.cons_z_sq, rhs_z * kBoundSlack + kBoundAbsSlack);
      }
    }
    report.checks.push_back(c5);
    report.checks.push_back(c6);
    report.checks.push_back(c7);
  }

  // (e) Theorem 1 at every prefix K'
  {
    BoundCheck chk;
    chk.name = "theorem1_stationarity_bound";
    if (!consecutive) {
      chk.applicable = false;
      chk.note = "needs consecutive records (logging interval 1)";
    } else {
      const ErrorFloors floors = error_floors(p, c, rho, het.b_f_sq,
                                              het.b_g_sq);
      double cum = 0.0;
      for (std::size_t kp = 1; kp < log.records.size(); ++kp) {
        cum += log.records[kp - 1].grad_phi_sq;
        const double lhs = cum / static_cast<double>(kp);
        const double rhs =
            (log.records[0].potential - log.records[kp - 1].potential) /
                (p.alpha * static_cast<double>(kp)) +
            floors.C_sq + floors.B_sq;
        chk.record(lhs, rhs * kBoundSlack + kBoundAbsSlack);
      }
    }
    report.checks.push_back(chk);
  }

  return report;
}

}  // namespace ahead
