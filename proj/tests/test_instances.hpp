// Shared problem builders for the test suites.
#pragma once

#include <Eigen/Dense>
#include <memory>
#include <random>
#include <vector>

#include "ahead/problems.hpp"
#include "ahead/random.hpp"

namespace test_instances {

/// Strongly-concave quadratic min-max instance:
///   f_i(x, y) = x^T A_i y - 1/2 y^T B_i y + c_i^T x
/// with SPD B_i (eigenvalues in [1.5, 3]). The averaged argmax is
/// y*(x) = Bbar^{-1} Abar^T x.
inline ahead::BilevelProblem quadratic_saddle_minmax(int m, int dim,
                                                     std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  auto A = std::make_shared<std::vector<Eigen::MatrixXd>>();
  auto B = std::make_shared<std::vector<Eigen::MatrixXd>>();
  auto c = std::make_shared<std::vector<Eigen::VectorXd>>();
  for (int i = 0; i < m; ++i) {
    Eigen::MatrixXd rand_mat(dim, dim);
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b) rand_mat(a, b) = ahead::uniform_pm1(gen);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(rand_mat);
    Eigen::MatrixXd Q = qr.householderQ();
    Eigen::VectorXd eigs(dim);
    for (int a = 0; a < dim; ++a) eigs(a) = 1.5 + 1.5 * ahead::uniform01(gen);
    B->push_back(Q * eigs.asDiagonal() * Q.transpose());
    Eigen::MatrixXd Ai(dim, dim);
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b) Ai(a, b) = ahead::uniform_pm1(gen);
    A->push_back(Ai);
    Eigen::VectorXd ci(dim);
    for (int a = 0; a < dim; ++a) ci(a) = ahead::uniform_pm1(gen);
    c->push_back(ci);
  }

  Eigen::MatrixXd Abar = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd Bbar = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < m; ++i) {
    Abar += (*A)[i];
    Bbar += (*B)[i];
  }
  Abar /= m;
  Bbar /= m;
  auto solver = std::make_shared<Eigen::LLT<Eigen::MatrixXd>>(Bbar);
  auto AbarT = std::make_shared<Eigen::MatrixXd>(Abar.transpose());

  ahead::MinMaxObjective f;
  f.m = m;
  f.n = dim;
  f.r = dim;
  f.value = [A, B, c](int i, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& y) {
    return x.dot((*A)[i] * y) - 0.5 * y.dot((*B)[i] * y) + (*c)[i].dot(x);
  };
  f.grad = [A, B, c](int i, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& y) {
    ahead::GradPair g;
    g.x = (*A)[i] * y + (*c)[i];
    g.y = (*A)[i].transpose() * x - (*B)[i] * y;
    return g;
  };
  f.second_order = [A, B](int i, const Eigen::VectorXd&,
                          const Eigen::VectorXd&) {
    ahead::HessPair h;
    h.xy = (*A)[i];
    h.yy = -(*B)[i];
    return h;
  };
  f.exact_argmax = [solver, AbarT](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const Eigen::VectorXd rhs = (*AbarT) * x;
    return solver->solve(rhs);
  };

  ahead::SmoothnessInput s;
  s.mu_g = std::numeric_limits<double>::infinity();
  s.L_g1 = 0.0;
  s.L_g2 = 0.0;
  for (int i = 0; i < m; ++i) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es((*B)[i]);
    s.mu_g = std::min(s.mu_g, es.eigenvalues().minCoeff());
    Eigen::MatrixXd joint(2 * dim, 2 * dim);
    joint.setZero();
    joint.topRightCorner(dim, dim) = (*A)[i];
    joint.bottomLeftCorner(dim, dim) = (*A)[i].transpose();
    joint.bottomRightCorner(dim, dim) = (*B)[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> js(joint,
                                                      Eigen::EigenvaluesOnly);
    s.L_g1 = std::max(s.L_g1, js.eigenvalues().cwiseAbs().maxCoeff());
  }
  s.L_f1 = s.L_g1;
  // measured bound on ||grad_y f_i(x, y*(x))|| over the probe box, padded
  double cfy = 0.0;
  std::mt19937_64 probe_gen(seed ^ 0xabcdef);
  for (int rep = 0; rep < 50; ++rep) {
    Eigen::VectorXd x(dim);
    for (int a = 0; a < dim; ++a)
      x(a) = ahead::uniform_in(probe_gen, -2.0, 2.0);
    const Eigen::VectorXd ystar = f.exact_argmax(x);
    for (int i = 0; i < m; ++i)
      cfy = std::max(cfy,
                     ((*A)[i].transpose() * x - (*B)[i] * ystar).norm());
  }
  s.C_fy = 2.0 * cfy;
  return ahead::make_minmax(f, s);
}

/// Single-node scalar saddle f(x, y) = x y - y^2 / 2, argmax_y f = x.
inline ahead::BilevelProblem scalar_saddle_minmax() {
  ahead::MinMaxObjective f;
  f.m = 1;
  f.n = 1;
  f.r = 1;
  f.value = [](int, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    return x(0) * y(0) - 0.5 * y(0) * y(0);
  };
  f.grad = [](int, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    ahead::GradPair g{Eigen::VectorXd(1), Eigen::VectorXd(1)};
    g.x(0) = y(0);
    g.y(0) = x(0) - y(0);
    return g;
  };
  f.second_order = [](int, const Eigen::VectorXd&, const Eigen::VectorXd&) {
    ahead::HessPair h{Eigen::MatrixXd(1, 1), Eigen::MatrixXd(1, 1)};
    h.xy(0, 0) = 1.0;
    h.yy(0, 0) = -1.0;
    return h;
  };
  f.exact_argmax = [](const Eigen::VectorXd& x) { return x; };
  ahead::SmoothnessInput s;
  s.mu_g = 1.0;
  s.L_f1 = 1.0;
  s.L_g1 = 1.0;
  s.C_fy = 4.0;  // |x - y*(x)| = 0 on the path; padded for the box
  return ahead::make_minmax(f, s);
}

/// Homogeneous scalar quadratic bilevel instance (identical nodes), handy
/// for exact-consensus arguments.
inline ahead::BilevelProblem homogeneous_quadratic(int m) {
  std::vector<double> a(m, 2.0), b(m, 3.0), c(m, 1.0), d(m, 2.0), e(m, 5.0);
  return ahead::make_synthetic_quadratic(m, a, b, c, d, e);
}

/// Tiny logistic instance for oracle cross-checks.
inline ahead::Dataset small_logistic_dataset(int m = 2, int per_node = 8,
                                             int dim = 4,
                                             std::uint64_t seed = 11) {
  return ahead::generate_two_clusters(dim, per_node, m, 1.5, seed);
}

}  // namespace test_instances
