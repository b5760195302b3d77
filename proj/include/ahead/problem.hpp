#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "ahead/errors.hpp"

namespace ahead {

/// Smoothness and strong-convexity moduli of a bilevel instance.
/// mu_g: strong convexity of each g_i in y; L_f1 / L_g1: joint smoothness of
/// f_i / g_i; L_g2: Lipschitz constant of the g_i Hessians; C_fy: bound on
/// ||grad_y f_i(x, y*(x))||.
struct SmoothnessInput {
  double mu_g = 0.0;
  double L_f1 = 0.0;
  double L_g1 = 0.0;
  double L_g2 = 0.0;
  double C_fy = 0.0;

  void validate() const {
    if (!(mu_g > 0.0)) throw ConfigError("mu_g must be strictly positive");
    if (!(L_f1 > 0.0)) throw ConfigError("L_f1 must be strictly positive");
    if (!(L_g1 > 0.0)) throw ConfigError("L_g1 must be strictly positive");
    if (L_g2 < 0.0) throw ConfigError("L_g2 must be nonnegative");
    if (C_fy < 0.0) throw ConfigError("C_fy must be nonnegative");
    if (mu_g > L_g1) throw ConfigError("mu_g must not exceed L_g1");
  }
};

/// Partial gradients (grad_x, grad_y) of a per-node function.
struct GradPair {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
};

/// Second-order blocks (grad^2_xy of size n x r, grad^2_yy of size r x r).
struct HessPair {
  Eigen::MatrixXd xy;
  Eigen::MatrixXd yy;
};

/// Oracle bundle for one distributed bilevel instance:
///   min_x (1/m) sum_i f_i(x, y*(x)),  y*(x) = argmin_y (1/m) sum_i g_i(x, y).
///
/// All oracles are pure functions of their arguments and safe to evaluate
/// concurrently. Second-order access is counted so the solver's
/// Hessian-freeness can be asserted.
class BilevelProblem {
 public:
  using ValueFn = std::function<double(int, const Eigen::VectorXd&,
                                       const Eigen::VectorXd&)>;
  using GradFn = std::function<GradPair(int, const Eigen::VectorXd&,
                                        const Eigen::VectorXd&)>;
  using HessFn = std::function<HessPair(int, const Eigen::VectorXd&,
                                        const Eigen::VectorXd&)>;
  using ArgminFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

  BilevelProblem(int m, int n, int r, SmoothnessInput smoothness,
                 ValueFn outer_value, ValueFn inner_value, GradFn outer_grad,
                 GradFn inner_grad)
      : m_(m),
        n_(n),
        r_(r),
        smoothness_(smoothness),
        outer_value_(std::move(outer_value)),
        inner_value_(std::move(inner_value)),
        outer_grad_(std::move(outer_grad)),
        inner_grad_(std::move(inner_grad)),
        hess_calls_(std::make_shared<std::size_t>(0)) {
    if (m_ <= 0 || n_ <= 0 || r_ <= 0)
      throw ConfigError("problem dimensions must be positive");
    smoothness_.validate();
  }

  int num_nodes() const { return m_; }
  int outer_dim() const { return n_; }
  int inner_dim() const { return r_; }
  const SmoothnessInput& smoothness() const { return smoothness_; }

  double outer_value(int i, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& y) const {
    return outer_value_(i, x, y);
  }
  double inner_value(int i, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& y) const {
    return inner_value_(i, x, y);
  }
  GradPair outer_grad(int i, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& y) const {
    return outer_grad_(i, x, y);
  }
  GradPair inner_grad(int i, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& y) const {
    return inner_grad_(i, x, y);
  }

  bool has_second_order() const { return static_cast<bool>(second_order_); }
  HessPair second_order(int i, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& y) const {
    if (!second_order_)
      throw NumericalError("second-order oracle not available");
    ++*hess_calls_;
    return second_order_(i, x, y);
  }
  std::size_t second_order_calls() const { return *hess_calls_; }
  void reset_second_order_calls() const { *hess_calls_ = 0; }

  bool has_exact_inner_argmin() const {
    return static_cast<bool>(exact_inner_argmin_);
  }
  Eigen::VectorXd exact_inner_argmin(const Eigen::VectorXd& x) const {
    if (!exact_inner_argmin_)
      throw NumericalError("exact inner argmin not available");
    return exact_inner_argmin_(x);
  }

  const std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>>&
  exact_outer_optimum() const {
    return exact_outer_optimum_;
  }

  void set_second_order(HessFn fn) { second_order_ = std::move(fn); }
  void set_exact_inner_argmin(ArgminFn fn) {
    exact_inner_argmin_ = std::move(fn);
  }
  void set_exact_outer_optimum(Eigen::VectorXd x, Eigen::VectorXd y) {
    exact_outer_optimum_ = std::make_pair(std::move(x), std::move(y));
  }

  // network averages, used by the verification oracles

  double averaged_outer_value(const Eigen::VectorXd& x,
                              const Eigen::VectorXd& y) const {
    double s = 0.0;
    for (int i = 0; i < m_; ++i) s += outer_value_(i, x, y);
    return s / m_;
  }
  double averaged_inner_value(const Eigen::VectorXd& x,
                              const Eigen::VectorXd& y) const {
    double s = 0.0;
    for (int i = 0; i < m_; ++i) s += inner_value_(i, x, y);
    return s / m_;
  }
  GradPair averaged_outer_grad(const Eigen::VectorXd& x,
                               const Eigen::VectorXd& y) const {
    GradPair acc{Eigen::VectorXd::Zero(n_), Eigen::VectorXd::Zero(r_)};
    for (int i = 0; i < m_; ++i) {
      GradPair g = outer_grad_(i, x, y);
      acc.x += g.x;
      acc.y += g.y;
    }
    acc.x /= m_;
    acc.y /= m_;
    return acc;
  }
  GradPair averaged_inner_grad(const Eigen::VectorXd& x,
                               const Eigen::VectorXd& y) const {
    GradPair acc{Eigen::VectorXd::Zero(n_), Eigen::VectorXd::Zero(r_)};
    for (int i = 0; i < m_; ++i) {
      GradPair g = inner_grad_(i, x, y);
      acc.x += g.x;
      acc.y += g.y;
    }
    acc.x /= m_;
    acc.y /= m_;
    return acc;
  }
  HessPair averaged_second_order(const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& y) const {
    HessPair acc{Eigen::MatrixXd::Zero(n_, r_), Eigen::MatrixXd::Zero(r_, r_)};
    for (int i = 0; i < m_; ++i) {
      HessPair h = second_order(i, x, y);
      acc.xy += h.xy;
      acc.yy += h.yy;
    }
    acc.xy /= m_;
    acc.yy /= m_;
    return acc;
  }

 private:
  int m_, n_, r_;
  SmoothnessInput smoothness_;
  ValueFn outer_value_, inner_value_;
  GradFn outer_grad_, inner_grad_;
  HessFn second_order_;
  ArgminFn exact_inner_argmin_;
  std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>>
      exact_outer_optimum_;
  std::shared_ptr<std::size_t> hess_calls_;
};

}  // namespace ahead
