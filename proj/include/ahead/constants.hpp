#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "ahead/errors.hpp"
#include "ahead/problem.hpp"

namespace ahead {

/// Every derived constant of the convergence analysis. All quantities are
/// dimensionless moduli computed from SmoothnessInput and the penalty
/// parameter lambda; the source smoothness is kept for downstream formulas.
struct AnalysisConstants {
  double kappa = 0.0;        // max{L_f1, L_g1, C_fy} / mu_g
  double L = 0.0;            // smoothness of grad Phi
  double L_ystar = 0.0;      // Lipschitz constant of y*(x)
  double C_in = 0.0;         // inner penalty error constant
  double C_ou = 0.0;         // outer penalty error constant
  double mu_lambda = 0.0;    // strong convexity of the penalty function in y
  double L_lambda = 0.0;     // smoothness of the penalty function
  double L_ystar_lambda = 0.0;  // Lipschitz constant of y*(x; lambda)
  double U_lambda_sq = 0.0;  // L_f1^2 + lambda^2 L_g1^2
  double w_gamma = 0.0;
  double w_beta = 0.0;
  double u_beta = 0.0;
  double p1 = 0.0, p2 = 0.0, p3 = 0.0;
  bool lambda_above_threshold = false;  // lambda > 2 L_f1 / mu_g
  SmoothnessInput smoothness;
};

struct StepSizes {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double lambda = 0.0;
  std::int64_t K = 0;

  void validate() const {
    if (!(alpha > 0.0 && beta > 0.0 && gamma > 0.0))
      throw ConfigError("step sizes must be strictly positive");
    if (!(lambda > 0.0)) throw ConfigError("lambda must be strictly positive");
    if (K < 0) throw ConfigError("iteration budget must be nonnegative");
    if (!std::isfinite(alpha) || !std::isfinite(beta) ||
        !std::isfinite(gamma) || !std::isfinite(lambda))
      throw ConfigError("step sizes must be finite");
  }
};

/// Computes the full constant set. When lambda is at or below the
/// 2 L_f1 / mu_g threshold the result is still returned, with
/// lambda_above_threshold cleared (the penalty-error guarantees are not
/// claimed there).
inline AnalysisConstants derive_constants(const SmoothnessInput& s,
                                          double lambda) {
  s.validate();
  if (!(lambda > 0.0)) throw ConfigError("lambda must be strictly positive");
  AnalysisConstants c;
  c.kappa = std::max({s.L_f1, s.L_g1, s.C_fy}) / s.mu_g;
  c.L_ystar = s.L_g1 / s.mu_g;
  c.L = (s.L_f1 + s.L_f1 * s.L_g2 / s.mu_g + s.C_fy * s.L_g2 / s.mu_g +
         s.C_fy * s.L_g2 * s.L_g2 / (s.mu_g * s.mu_g)) *
        (1.0 + c.L_ystar);
  c.C_in = 2.0 * s.C_fy / s.mu_g;
  c.C_ou =
      c.C_in * (1.0 + s.L_g1 / s.mu_g) * (s.L_f1 + s.L_g2 * c.C_in / 2.0);
  c.mu_lambda = lambda * s.mu_g / 2.0;
  c.L_lambda = s.L_f1 + lambda * s.L_g1;
  c.L_ystar_lambda = 2.0 * c.L_lambda / (lambda * s.mu_g);
  c.U_lambda_sq = s.L_f1 * s.L_f1 + lambda * lambda * s.L_g1 * s.L_g1;
  c.w_gamma = 0.5 * s.mu_g * s.L_g1 / (s.mu_g + s.L_g1);
  c.w_beta = 0.5 * c.mu_lambda * c.L_lambda / (c.mu_lambda + c.L_lambda);
  c.u_beta = s.mu_g / (4.0 * s.L_g1);
  const double Lg1_sq = s.L_g1 * s.L_g1;
  c.p1 = (96.0 * Lg1_sq / (c.w_gamma * c.w_gamma) +
          96.0 / (c.u_beta * c.u_beta) + 24.0) *
         Lg1_sq;
  c.p2 = (96.0 / (c.u_beta * c.u_beta) + 24.0) * Lg1_sq;
  c.p3 = (48.0 / (c.u_beta * c.u_beta) + 12.0) * Lg1_sq;
  c.lambda_above_threshold = lambda > 2.0 * s.L_f1 / s.mu_g;
  c.smoothness = s;
  return c;
}

struct StepSizeCaps {
  double alpha_max = 0.0;
  double beta_max = 0.0;
  double gamma_max = 0.0;
};

/// Admissible step-size caps. The alpha rule references beta and gamma; it is
/// evaluated at beta_max and gamma_max, which yields the largest jointly
/// admissible triple under the printed rules.
inline StepSizeCaps stepsize_caps(const AnalysisConstants& c,
                                  const SmoothnessInput& s, double rho,
                                  double lambda) {
  s.validate();
  if (!(lambda > 0.0)) throw ConfigError("lambda must be strictly positive");
  if (!(rho >= 0.0 && rho < 1.0))
    throw ConfigError("rho must lie in [0, 1) for a valid network");
  const double r1 = 1.0 - rho;
  const double sqrt_p1 = std::sqrt(c.p1);
  const double sqrt_p2 = std::sqrt(c.p2);
  const double sqrt_p3 = std::sqrt(c.p3);

  StepSizeCaps caps;
  caps.gamma_max = std::min({2.0 / (s.mu_g + s.L_g1),
                             0.5 * (s.mu_g + s.L_g1) / (s.mu_g * s.L_g1),
                             r1 / (8.0 * sqrt_p3),
                             r1 * sqrt_p1 / (24.0 * s.L_g1 * sqrt_p3),
                             r1 / (16.0 * s.L_g1)});
  caps.beta_max = std::min(
      {1.0 / (lambda * s.L_g1),
       0.5 / (s.L_f1 + lambda * s.L_g1) + 1.0 / (lambda * s.mu_g),
       r1 / (10.0 * lambda * sqrt_p2),
       r1 * sqrt_p1 / (48.0 * s.L_g1 * lambda * sqrt_p2),
       r1 / (32.0 * lambda * s.L_g1)});
  caps.alpha_max = std::min(
      {1.0 / (2.0 * c.L),
       std::pow(r1, 2.0 / 3.0) /
           (8.0 * std::pow(lambda, 2.0 / 3.0) * std::cbrt(c.p1)),
       c.w_gamma * caps.gamma_max / (16.0 * c.L_ystar * lambda),
       s.mu_g * s.mu_g * caps.beta_max / (80.0 * s.L_g1 * s.L_g1),
       r1 / (5.0 * lambda * sqrt_p1),
       r1 * sqrt_p3 / (32.0 * s.L_g1 * lambda * sqrt_p1),
       r1 / (54.0 * s.L_g1 * lambda)});
  return caps;
}

/// Which reading of the y-consensus potential weight to use. The printed
/// block has d4 = d5 = 4 p3 alpha lambda^2 / (1 - rho) while p2 appears only
/// in the error floors; kD4UsesP2 is the plausible-typo variant.
enum class PotentialVariant { kAsPrinted, kD4UsesP2 };

struct PotentialCoefficients {
  double d0 = 0.0, d1 = 0.0, d2 = 0.0, d3 = 0.0, d4 = 0.0, d5 = 0.0;
};

inline PotentialCoefficients potential_coefficients(
    const StepSizes& p, const AnalysisConstants& c, double rho,
    PotentialVariant variant = PotentialVariant::kAsPrinted) {
  if (!(rho >= 0.0 && rho < 1.0))
    throw ConfigError("rho must lie in [0, 1) for a valid network");
  const double Lg1_sq = c.smoothness.L_g1 * c.smoothness.L_g1;
  const double lam_sq = p.lambda * p.lambda;
  PotentialCoefficients d;
  d.d0 = 2.0;
  d.d1 = 12.0 * c.U_lambda_sq * p.alpha / (c.w_beta * p.beta);
  d.d2 = 12.0 * Lg1_sq * lam_sq * p.alpha / (c.w_gamma * p.gamma);
  d.d3 = 4.0 * c.p1 * p.alpha * lam_sq / (1.0 - rho);
  const double p4 = variant == PotentialVariant::kAsPrinted ? c.p3 : c.p2;
  d.d4 = 4.0 * p4 * p.alpha * lam_sq / (1.0 - rho);
  d.d5 = 4.0 * c.p3 * p.alpha * lam_sq / (1.0 - rho);
  return d;
}

/// Error floors of the convergence bound: C^2 collects penalty errors, B^2
/// heterogeneity errors. Term breakdowns are kept for reporting.
struct ErrorFloors {
  double C_sq = 0.0;
  double B_sq = 0.0;
  std::array<double, 3> C_terms{};
  std::array<double, 3> B_terms{};
};

inline ErrorFloors error_floors(const StepSizes& p, const AnalysisConstants& c,
                                double rho, double b_f_sq, double b_g_sq) {
  if (!(rho >= 0.0 && rho < 1.0))
    throw ConfigError("rho must lie in [0, 1) for a valid network");
  if (b_f_sq < 0.0 || b_g_sq < 0.0)
    throw ConfigError("heterogeneity constants must be nonnegative");
  const double r1_sq = (1.0 - rho) * (1.0 - rho);
  const double Lg1_sq = c.smoothness.L_g1 * c.smoothness.L_g1;
  const double lam_sq = p.lambda * p.lambda;
  ErrorFloors f;
  f.C_terms[0] = 2.0 * c.C_ou * c.C_ou / lam_sq;
  f.C_terms[1] = 864.0 * c.C_in * c.C_in * Lg1_sq * c.p1 * lam_sq * p.alpha *
                 p.alpha / r1_sq;
  f.C_terms[2] = 576.0 * c.C_in * c.C_in * Lg1_sq * c.p2 * lam_sq * p.beta *
                 p.beta / r1_sq;
  f.B_terms[0] = 24.0 * c.p1 * lam_sq * p.alpha * p.alpha * b_f_sq / r1_sq;
  f.B_terms[1] = 48.0 * c.p2 * lam_sq * p.beta * p.beta *
                 (b_f_sq + lam_sq * b_g_sq) / r1_sq;
  f.B_terms[2] = 24.0 * c.p3 * lam_sq * p.gamma * p.gamma * b_g_sq / r1_sq;
  f.C_sq = f.C_terms[0] + f.C_terms[1] + f.C_terms[2];
  f.B_sq = f.B_terms[0] + f.B_terms[1] + f.B_terms[2];
  return f;
}

}  // namespace ahead
