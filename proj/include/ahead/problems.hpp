#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <tuple>
#include <utility>
#include <vector>

#include "ahead/dataset.hpp"
#include "ahead/errors.hpp"
#include "ahead/problem.hpp"

namespace ahead {

// ---------------------------------------------------------------------------
// Synthetic quadratic family:
//   f_i(x, y) = 1/2 (a_i y - b_i)^2,   g_i(x, y) = 1/2 (c_i x + d_i y - e_i)^2
// with scalar x and y. Everything (inner argmin, outer optimum, Hessians,
// smoothness constants) is available in closed form.
// ---------------------------------------------------------------------------

/// Builds the scalar quadratic instance. x_box bounds the x-range over which
/// C_fy = max_i ||grad_y f_i(x, y*(x))|| is evaluated (the gradient along
/// the solution path is affine in x, so box corners suffice).
inline BilevelProblem make_synthetic_quadratic(
    int m, std::vector<double> a, std::vector<double> b, std::vector<double> c,
    std::vector<double> d, std::vector<double> e, double x_box = 2.0) {
  const auto mm = static_cast<std::size_t>(m);
  if (m <= 0 || a.size() != mm || b.size() != mm || c.size() != mm ||
      d.size() != mm || e.size() != mm)
    throw ConfigError(
        "synthetic quadratic: all parameter sequences must have length m");
  if (!(x_box > 0.0)) throw ConfigError("x_box must be positive");
  double sum_d2 = 0.0, sum_cd = 0.0, sum_de = 0.0, sum_a2 = 0.0, sum_ab = 0.0;
  for (int i = 0; i < m; ++i) {
    if (d[static_cast<std::size_t>(i)] == 0.0)
      throw ConfigError("synthetic quadratic: d_i = 0 at node " +
                        std::to_string(i + 1) +
                        " violates inner strong convexity");
    sum_d2 += d[i] * d[i];
    sum_cd += c[i] * d[i];
    sum_de += d[i] * e[i];
    sum_a2 += a[i] * a[i];
    sum_ab += a[i] * b[i];
  }

  // y*(x) = (sum d_i e_i - sum c_i d_i x) / sum d_i^2, affine in x
  const double slope = -sum_cd / sum_d2;
  const double offset = sum_de / sum_d2;
  auto ystar = [slope, offset](double x) { return offset + slope * x; };

  SmoothnessInput s;
  s.mu_g = std::numeric_limits<double>::infinity();
  s.L_g1 = 0.0;
  s.L_f1 = 0.0;
  s.L_g2 = 0.0;
  s.C_fy = 0.0;
  for (int i = 0; i < m; ++i) {
    s.mu_g = std::min(s.mu_g, d[i] * d[i]);
    // joint Hessian of g_i is the rank-one [c_i d_i]^T[c_i d_i]
    s.L_g1 = std::max(s.L_g1, c[i] * c[i] + d[i] * d[i]);
    s.L_f1 = std::max(s.L_f1, a[i] * a[i]);
    for (double x : {-x_box, x_box})
      s.C_fy = std::max(s.C_fy, std::abs(a[i] * (a[i] * ystar(x) - b[i])));
  }
  if (s.L_f1 == 0.0) s.L_f1 = s.mu_g;  // degenerate all-zero a_i
  s.validate();

  auto av = std::make_shared<std::vector<double>>(std::move(a));
  auto bv = std::make_shared<std::vector<double>>(std::move(b));
  auto cv = std::make_shared<std::vector<double>>(std::move(c));
  auto dv = std::make_shared<std::vector<double>>(std::move(d));
  auto ev = std::make_shared<std::vector<double>>(std::move(e));

  BilevelProblem problem(
      m, 1, 1, s,
      [av, bv](int i, const Eigen::VectorXd&, const Eigen::VectorXd& y) {
        double t = (*av)[i] * y(0) - (*bv)[i];
        return 0.5 * t * t;
      },
      [cv, dv, ev](int i, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
        double t = (*cv)[i] * x(0) + (*dv)[i] * y(0) - (*ev)[i];
        return 0.5 * t * t;
      },
      [av, bv](int i, const Eigen::VectorXd&, const Eigen::VectorXd& y) {
        GradPair g{Eigen::VectorXd::Zero(1), Eigen::VectorXd(1)};
        g.y(0) = (*av)[i] * ((*av)[i] * y(0) - (*bv)[i]);
        return g;
      },
      [cv, dv, ev](int i, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
        double t = (*cv)[i] * x(0) + (*dv)[i] * y(0) - (*ev)[i];
        GradPair g{Eigen::VectorXd(1), Eigen::VectorXd(1)};
        g.x(0) = (*cv)[i] * t;
        g.y(0) = (*dv)[i] * t;
        return g;
      });

  problem.set_second_order(
      [cv, dv](int i, const Eigen::VectorXd&, const Eigen::VectorXd&) {
        HessPair h{Eigen::MatrixXd(1, 1), Eigen::MatrixXd(1, 1)};
        h.xy(0, 0) = (*cv)[i] * (*dv)[i];
        h.yy(0, 0) = (*dv)[i] * (*dv)[i];
        return h;
      });
  problem.set_exact_inner_argmin([slope, offset](const Eigen::VectorXd& x) {
    Eigen::VectorXd y(1);
    y(0) = offset + slope * x(0);
    return y;
  });
  if (sum_cd != 0.0 && sum_a2 > 0.0) {
    // stationarity of Phi along the affine solution path
    const double y_opt = sum_ab / sum_a2;
    const double x_opt = (sum_de - sum_d2 * y_opt) / sum_cd;
    Eigen::VectorXd xs(1), ys(1);
    xs(0) = x_opt;
    ys(0) = y_opt;
    problem.set_exact_outer_optimum(xs, ys);
  }
  return problem;
}

/// The published benchmark instance: m = 10, a_i = 2, b_i = i,
/// (c, d, e) = (2, 2, 10) on the first five nodes and (4, 4, 10) on the
/// rest. Optimum (x*, y*) = (0.25, 2.75).
inline BilevelProblem make_paper_synthetic(double x_box = 2.0) {
  const int m = 10;
  std::vector<double> a(m, 2.0), b(m), c(m), d(m), e(m, 10.0);
  for (int i = 0; i < m; ++i) {
    b[i] = i + 1.0;
    c[i] = d[i] = (i < 5) ? 2.0 : 4.0;
  }
  return make_synthetic_quadratic(m, a, b, c, d, e, x_box);
}

// ---------------------------------------------------------------------------
// l2-regularized logistic hyperparameter optimization (x = eta):
//   f_i(eta, y) = sum_{val i}   log(1 + exp(-b s^T y))
//   g_i(eta, y) = sum_{train i} log(1 + exp(-b s^T y)) + y^T diag(e^eta) y
// The regularizer appears in every g_i so each node's inner objective is
// strongly convex on its own.
// ---------------------------------------------------------------------------

namespace detail {

inline double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double et = std::exp(t);
  return et / (1.0 + et);
}

inline double softplus(double t) {  // log(1 + e^t), overflow-safe
  return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t)));
}

struct LogisticData {
  Eigen::MatrixXd features;
  std::vector<int> labels;
  std::vector<std::vector<int>> train;  // per-node sample indices
  std::vector<std::vector<int>> val;
};

inline double logistic_sum(const LogisticData& data,
                           const std::vector<int>& idx,
                           const Eigen::VectorXd& y) {
  double s = 0.0;
  for (int k : idx)
    s += softplus(-data.labels[k] * data.features.row(k).dot(y));
  return s;
}

inline Eigen::VectorXd logistic_grad_sum(const LogisticData& data,
                                         const std::vector<int>& idx,
                                         const Eigen::VectorXd& y) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(y.size());
  for (int k : idx) {
    const double b = data.labels[k];
    const double u = b * data.features.row(k).dot(y);
    g -= b * sigmoid(-u) * data.features.row(k).transpose();
  }
  return g;
}

}  // namespace detail

/// Conservative smoothness bounds for the logistic family over the boxes
/// ||eta||_inf <= eta_box and ||y||_inf-ish ||y|| <= y_box. These feed the
/// analysis constants only; the oracles themselves are exact.
inline SmoothnessInput logistic_smoothness_bounds(const Dataset& ds,
                                                  double eta_box = 1.0,
                                                  double y_box = 2.0) {
  ds.validate();
  double s_train = 0.0, s_val = 0.0, cube_sum = 0.0, cfy = 0.0;
  for (int i = 0; i < ds.num_nodes; ++i) {
    auto bound = [&](const std::vector<int>& idx) {
      Eigen::MatrixXd gram =
          Eigen::MatrixXd::Zero(ds.feature_dim(), ds.feature_dim());
      double cubes = 0.0, norms = 0.0;
      for (int k : idx) {
        gram += ds.features.row(k).transpose() * ds.features.row(k);
        const double nk = ds.features.row(k).norm();
        cubes += nk * nk * nk;
        norms += nk;
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
          gram, Eigen::EigenvaluesOnly);
      return std::tuple<double, double, double>(
          es.eigenvalues().maxCoeff(), cubes, norms);
    };
    auto [lt, ct, nt] = bound(ds.indices(i, SampleRole::kTrain));
    auto [lv, cv, nv] = bound(ds.indices(i, SampleRole::kVal));
    s_train = std::max(s_train, lt);
    s_val = std::max(s_val, lv);
    cube_sum = std::max(cube_sum, ct);
    cfy = std::max(cfy, nv);  // |b| = 1 and |sigmoid| <= 1
  }
  const double emax = std::exp(eta_box);
  SmoothnessInput s;
  s.mu_g = 2.0 * std::exp(-eta_box);
  s.L_f1 = 0.25 * s_val;
  // block norms: yy <= S/4 + 2 e^b, eta-y <= 2 e^b y_box, eta-eta <= e^b y^2
  s.L_g1 = 0.25 * s_train + 2.0 * emax + 2.0 * emax * y_box +
           emax * y_box * y_box;
  s.L_g1 = std::max(s.L_g1, s.mu_g);
  s.L_g2 = 0.1 * cube_sum + emax * (y_box * y_box + 4.0 * y_box + 2.0);
  s.C_fy = cfy;
  s.validate();
  return s;
}

/// Builds the hyperparameter-optimization instance from a partitioned
/// dataset. Outer and inner dimensions both equal the feature dimension.
inline BilevelProblem make_logistic_hyperopt(
    const Dataset& ds, int m,
    std::optional<SmoothnessInput> smoothness = std::nullopt) {
  if (m != ds.num_nodes)
    throw ConfigError("node count does not match the dataset partition");
  ds.validate();
  const int n = ds.feature_dim();

  auto data = std::make_shared<detail::LogisticData>();
  data->features = ds.features;
  data->labels = ds.labels;
  data->train.resize(m);
  data->val.resize(m);
  for (int i = 0; i < m; ++i) {
    data->train[i] = ds.indices(i, SampleRole::kTrain);
    data->val[i] = ds.indices(i, SampleRole::kVal);
  }

  SmoothnessInput s =
      smoothness ? *smoothness : logistic_smoothness_bounds(ds);

  BilevelProblem problem(
      m, n, n, s,
      [data](int i, const Eigen::VectorXd&, const Eigen::VectorXd& y) {
        return detail::logistic_sum(*data, data->val[i], y);
      },
      [data](int i, const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
        double reg = 0.0;
        for (Eigen::Index t = 0; t < y.size(); ++t)
          reg += std::exp(eta(t)) * y(t) * y(t);
        return detail::logistic_sum(*data, data->train[i], y) + reg;
      },
      [data](int i, const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
        GradPair g;
        g.x = Eigen::VectorXd::Zero(eta.size());  // f_i is eta-free
        g.y = detail::logistic_grad_sum(*data, data->val[i], y);
        return g;
      },
      [data](int i, const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
        GradPair g;
        g.x.resize(eta.size());
        g.y = detail::logistic_grad_sum(*data, data->train[i], y);
        for (Eigen::Index t = 0; t < eta.size(); ++t) {
          const double w = std::exp(eta(t));
          g.x(t) = w * y(t) * y(t);
          g.y(t) += 2.0 * w * y(t);
        }
        return g;
      });

  problem.set_second_order([data](int i, const Eigen::VectorXd& eta,
                                  const Eigen::VectorXd& y) {
    const auto n = eta.size();
    HessPair h{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n)};
    for (int k : data->train[i]) {
      const double b = data->labels[k];
      const double u = b * data->features.row(k).dot(y);
      const double w = detail::sigmoid(u) * detail::sigmoid(-u);  // b^2 = 1
      h.yy.noalias() +=
          w * data->features.row(k).transpose() * data->features.row(k);
    }
    for (Eigen::Index t = 0; t < n; ++t) {
      const double w = std::exp(eta(t));
      h.yy(t, t) += 2.0 * w;
      h.xy(t, t) = 2.0 * w * y(t);
    }
    return h;
  });
  return problem;
}

// ---------------------------------------------------------------------------
// Min-max reduction: g_i = -f_i turns min_x max_y (1/m) sum f_i into the
// bilevel form. The caller supplies the f oracles and asserts strong
// concavity in y through SmoothnessInput::mu_g.
// ---------------------------------------------------------------------------

/// Outer objective bundle for a distributed min-max problem.
struct MinMaxObjective {
  int m = 0, n = 0, r = 0;
  BilevelProblem::ValueFn value;
  BilevelProblem::GradFn grad;
  BilevelProblem::HessFn second_order;   // of f; optional
  BilevelProblem::ArgminFn exact_argmax; // y*(x); optional
};

inline BilevelProblem make_minmax(const MinMaxObjective& f,
                                  SmoothnessInput smoothness) {
  if (!f.value || !f.grad)
    throw ConfigError("min-max objective needs value and gradient oracles");
  auto value = f.value;
  auto grad = f.grad;
  BilevelProblem problem(
      f.m, f.n, f.r, smoothness,
      value,
      [value](int i, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
        return -value(i, x, y);
      },
      grad,
      [grad](int i, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
        GradPair g = grad(i, x, y);
        g.x = -g.x;
        g.y = -g.y;
        return g;
      });
  if (f.second_order) {
    auto hess = f.second_order;
    problem.set_second_order(
        [hess](int i, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
          HessPair h = hess(i, x, y);
          h.xy = -h.xy;
          h.yy = -h.yy;
          return h;
        });
  }
  if (f.exact_argmax) problem.set_exact_inner_argmin(f.exact_argmax);
  return problem;
}

}  // namespace ahead
