#pragma once

#include <cstdint>

namespace ahead {

/// Convergence flags for the oracle solves embedded in one metrics
/// evaluation. Non-convergence is recorded, never fatal.
struct OracleFlags {
  bool inner_converged = true;
  bool penalized_converged = true;
  bool hypergrad_converged = true;
  bool hypergrad_finite_diff = false;

  bool ok() const {
    return inner_converged && penalized_converged && hypergrad_converged;
  }
};

/// Per-iteration diagnostics evaluated at the averaged iterates.
struct MetricsRecord {
  std::int64_t k = 0;
  double phi = 0.0;              // Phi(xbar)
  double grad_phi_sq = 0.0;      // ||grad Phi(xbar)||^2
  double grad_approx_sq = 0.0;   // ||grad Phi(xbar) - hbar_x||^2
  double inner_err_sq = 0.0;     // ||zbar - y*(xbar)||^2
  double pen_inner_err_sq = 0.0; // ||ybar - y*(xbar; lambda)||^2
  double cons_x_sq = 0.0;        // (1/m)||x - 1 (x) xbar||^2
  double cons_y_sq = 0.0;
  double cons_z_sq = 0.0;
  double potential = 0.0;        // V^k
  OracleFlags flags;
};

}  // namespace ahead
