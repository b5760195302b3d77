#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ahead/constants.hpp"

using namespace ahead;

namespace {

SmoothnessInput unit_smoothness() {
  SmoothnessInput s;
  s.mu_g = s.L_f1 = s.L_g1 = s.C_fy = s.L_g2 = 1.0;
  return s;
}

}  // namespace

TEST_CASE("derive_constants on the unit instance", "[constants]") {
  AnalysisConstants c = derive_constants(unit_smoothness(), 4.0);
  CHECK(c.kappa == Catch::Approx(1.0));
  CHECK(c.C_in == Catch::Approx(2.0));
  CHECK(c.C_ou == Catch::Approx(8.0));
  CHECK(c.L == Catch::Approx(8.0));
  CHECK(c.L_ystar == Catch::Approx(1.0));
  CHECK(c.mu_lambda == Catch::Approx(2.0));
  CHECK(c.L_lambda == Catch::Approx(5.0));
  CHECK(c.L_ystar_lambda == Catch::Approx(2.5));
  CHECK(c.U_lambda_sq == Catch::Approx(17.0));
  CHECK(c.w_gamma == Catch::Approx(0.25));
  CHECK(c.w_beta == Catch::Approx(5.0 / 7.0));
  CHECK(c.u_beta == Catch::Approx(0.25));
  CHECK(c.p1 == Catch::Approx(3096.0));
  CHECK(c.p2 == Catch::Approx(1560.0));
  CHECK(c.p3 == Catch::Approx(780.0));
  CHECK(c.lambda_above_threshold);  // 4 > 2
}

TEST_CASE("penalty constants vanish with C_fy = 0", "[constants]") {
  SmoothnessInput s = unit_smoothness();
  s.C_fy = 0.0;
  AnalysisConstants c = derive_constants(s, 4.0);
  CHECK(c.C_in == 0.0);
  CHECK(c.C_ou == 0.0);
}

TEST_CASE("L_ystar_lambda tends to twice L_ystar as lambda grows",
          "[constants]") {
  SmoothnessInput s = unit_smoothness();
  AnalysisConstants c = derive_constants(s, 1e12);
  CHECK(c.L_ystar_lambda ==
        Catch::Approx(2.0 * c.L_ystar).epsilon(1e-9));
}

TEST_CASE("lambda threshold flag", "[constants]") {
  SmoothnessInput s = unit_smoothness();
  CHECK_FALSE(derive_constants(s, 2.0).lambda_above_threshold);  // not strict
  CHECK(derive_constants(s, 2.0 + 1e-9).lambda_above_threshold);
}

TEST_CASE("gamma cap on the unit instance equals 1/(8 sqrt(p3))",
          "[constants]") {
  SmoothnessInput s = unit_smoothness();
  AnalysisConstants c = derive_constants(s, 4.0);
  StepSizeCaps caps = stepsize_caps(c, s, 0.0, 4.0);
  CHECK(caps.gamma_max == Catch::Approx(1.0 / (8.0 * std::sqrt(780.0))));
  // the other gamma candidates are 1, 1, sqrt(3096)/(24 sqrt(780)), 1/16
  CHECK(caps.gamma_max == Catch::Approx(0.0044757).margin(1e-6));
}

TEST_CASE("caps shrink termwise as rho grows", "[constants]") {
  SmoothnessInput s = unit_smoothness();
  AnalysisConstants c = derive_constants(s, 4.0);
  StepSizeCaps loose = stepsize_caps(c, s, 0.0, 4.0);
  StepSizeCaps tight = stepsize_caps(c, s, 0.9, 4.0);
  CHECK(tight.alpha_max <= loose.alpha_max);
  CHECK(tight.beta_max <= loose.beta_max);
  CHECK(tight.gamma_max <= loose.gamma_max);
}

TEST_CASE("doubling lambda never increases alpha_max", "[constants]") {
  SmoothnessInput s = unit_smoothness();
  for (double rho : {0.0, 0.3, 0.8}) {
    for (double lambda : {3.0, 4.0, 10.0, 40.0}) {
      StepSizeCaps base =
          stepsize_caps(derive_constants(s, lambda), s, rho, lambda);
      StepSizeCaps doubled = stepsize_caps(derive_constants(s, 2.0 * lambda),
                                           s, rho, 2.0 * lambda);
      CHECK(doubled.alpha_max <= base.alpha_max);
      CHECK(doubled.beta_max <= base.beta_max);
    }
  }
}

TEST_CASE("alpha cap never exceeds the beta cap", "[constants]") {
  // time-scale separation: the alpha rule contains mu_g^2 beta / (80 L_g1^2)
  // and mu_g <= L_g1, so rule-derived alpha <= beta
  SmoothnessInput s = unit_smoothness();
  for (double rho : {0.0, 0.5}) {
    for (double lambda : {3.0, 20.0}) {
      StepSizeCaps caps =
          stepsize_caps(derive_constants(s, lambda), s, rho, lambda);
      CHECK(caps.alpha_max <= caps.beta_max);
    }
  }
}

TEST_CASE("caps are reproducible bitwise", "[constants]") {
  SmoothnessInput s = unit_smoothness();
  AnalysisConstants c = derive_constants(s, 7.5);
  StepSizeCaps a = stepsize_caps(c, s, 0.37, 7.5);
  StepSizeCaps b = stepsize_caps(c, s, 0.37, 7.5);
  CHECK(a.alpha_max == b.alpha_max);
  CHECK(a.beta_max == b.beta_max);
  CHECK(a.gamma_max == b.gamma_max);
}

TEST_CASE("rho at or above one is rejected", "[constants]") {
  SmoothnessInput s = unit_smoothness();
  AnalysisConstants c = derive_constants(s, 4.0);
  REQUIRE_THROWS_AS(stepsize_caps(c, s, 1.0, 4.0), ConfigError);
  REQUIRE_THROWS_AS(stepsize_caps(c, s, -0.1, 4.0), ConfigError);
}

TEST_CASE("potential coefficients match the printed block", "[constants]") {
  SmoothnessInput s = unit_smoothness();
  AnalysisConstants c = derive_constants(s, 4.0);
  StepSizes p;
  p.alpha = p.beta = 1e-3;
  p.gamma = 1e-3;
  p.lambda = 4.0;
  p.K = 1;
  PotentialCoefficients d = potential_coefficients(p, c, 0.0);
  CHECK(d.d0 == 2.0);
  CHECK(d.d3 == Catch::Approx(198.144));  // 4 * 3096 * 1e-3 * 16
  CHECK(d.d4 == d.d5);                    // printed block has d4 = d5

  // d4 variant switch
  PotentialCoefficients dv =
      potential_coefficients(p, c, 0.0, PotentialVariant::kD4UsesP2);
  CHECK(dv.d4 == Catch::Approx(4.0 * c.p2 * p.alpha * 16.0));
  CHECK(dv.d5 == d.d5);
}

TEST_CASE("potential coefficients are linear in alpha", "[constants]") {
  SmoothnessInput s = unit_smoothness();
  AnalysisConstants c = derive_constants(s, 4.0);
  StepSizes p;
  p.alpha = 1e-3;
  p.beta = 2e-3;
  p.gamma = 5e-3;
  p.lambda = 4.0;
  p.K = 1;
  PotentialCoefficients d1 = potential_coefficients(p, c, 0.2);
  StepSizes p2 = p;
  p2.alpha *= 3.0;
  PotentialCoefficients d3 = potential_coefficients(p2, c, 0.2);
  CHECK(d3.d1 == Catch::Approx(3.0 * d1.d1));
  CHECK(d3.d2 == Catch::Approx(3.0 * d1.d2));
  CHECK(d3.d3 == Catch::Approx(3.0 * d1.d3));
  CHECK(d3.d4 == Catch::Approx(3.0 * d1.d4));
  CHECK(d3.d5 == Catch::Approx(3.0 * d1.d5));
  // d1 * beta and d2 * gamma depend on the other steps only through alpha
  StepSizes q = p;
  q.beta *= 10.0;
  q.gamma *= 10.0;
  PotentialCoefficients dq = potential_coefficients(q, c, 0.2);
  CHECK(dq.d1 * q.beta == Catch::Approx(d1.d1 * p.beta));
  CHECK(dq.d2 * q.gamma == Catch::Approx(d1.d2 * p.gamma));
}

TEST_CASE("error floors on the unit instance", "[constants]") {
  SmoothnessInput s = unit_smoothness();
  AnalysisConstants c = derive_constants(s, 4.0);
  StepSizes p;
  p.alpha = p.beta = 1e-3;
  p.gamma = 1e-2;
  p.lambda = 4.0;
  p.K = 1;
  ErrorFloors f = error_floors(p, c, 0.0, 1.0, 1.0);
  // direct formula evaluation: 24*3096*16e-6 + 48*1560*16e-6*17 + 24*780*16e-4
  CHECK(f.B_terms[0] == Catch::Approx(1.188864));
  CHECK(f.B_terms[1] == Catch::Approx(20.36736));
  CHECK(f.B_terms[2] == Catch::Approx(29.952));
  CHECK(f.B_sq == Catch::Approx(51.508224));
}

TEST_CASE("floors vanish in the homogeneous / penalty-free cases",
          "[constants]") {
  SmoothnessInput s = unit_smoothness();
  AnalysisConstants c = derive_constants(s, 4.0);
  StepSizes p;
  p.alpha = p.beta = p.gamma = 1e-3;
  p.lambda = 4.0;
  p.K = 1;
  CHECK(error_floors(p, c, 0.0, 0.0, 0.0).B_sq == 0.0);

  SmoothnessInput s0 = s;
  s0.C_fy = 0.0;
  AnalysisConstants c0 = derive_constants(s0, 4.0);
  CHECK(error_floors(p, c0, 0.0, 1.0, 1.0).C_sq == 0.0);
}

TEST_CASE("first C^2 term is quartered exactly when lambda doubles",
          "[constants]") {
  SmoothnessInput s = unit_smoothness();
  s.C_fy = 18.0;  // arbitrary nonzero
  s.L_f1 = 4.0;
  s.L_g1 = 32.0;
  s.mu_g = 4.0;
  s.L_g2 = 0.0;
  for (double lambda : {5.0, 10.0, 20.0, 40.0}) {
    AnalysisConstants c1 = derive_constants(s, lambda);
    AnalysisConstants c2 = derive_constants(s, 2.0 * lambda);
    REQUIRE(c1.lambda_above_threshold);
    StepSizes p;
    p.alpha = p.beta = p.gamma = 1e-4;
    p.K = 1;
    p.lambda = lambda;
    ErrorFloors f1 = error_floors(p, c1, 0.1, 0.5, 0.5);
    p.lambda = 2.0 * lambda;
    ErrorFloors f2 = error_floors(p, c2, 0.1, 0.5, 0.5);
    CHECK(f2.C_terms[0] == f1.C_terms[0] / 4.0);  // exact in IEEE
  }
}
