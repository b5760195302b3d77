#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ahead/problems.hpp"
#include "ahead/runner.hpp"
#include "ahead/solver.hpp"
#include "test_instances.hpp"

using namespace ahead;

namespace {

/// Single-node instance f = 1/2 (y - 1)^2, g = 1/2 (x + y)^2.
BilevelProblem toy_single_node() {
  return make_synthetic_quadratic(1, {1.0}, {1.0}, {1.0}, {1.0}, {0.0});
}

MixingMatrix single_node_network() {
  MixingMatrix mix;
  mix.W = Eigen::MatrixXd::Ones(1, 1);
  mix.rho = 0.0;
  return mix;
}

StepSizes steps_of(double a, double b, double g, double lam,
                   std::int64_t K = 1) {
  StepSizes p;
  p.alpha = a;
  p.beta = b;
  p.gamma = g;
  p.lambda = lam;
  p.K = K;
  return p;
}

}  // namespace

TEST_CASE("init_state modes", "[solver]") {
  BilevelProblem p = make_paper_synthetic();
  MixingMatrix mix = metropolis_weights(erdos_renyi(10, 0.7, 42));

  SolverState zeros = init_state(p, mix, InitMode::kZeros);
  CHECK(zeros.x.isZero());
  CHECK(zeros.y.isZero());
  CHECK(zeros.z.isZero());
  CHECK(zeros.k == 0);
  CHECK(zeros.x.rows() == 10);

  SolverState r1 = init_state(p, mix, InitMode::kRandom, 5);
  SolverState r2 = init_state(p, mix, InitMode::kRandom, 5);
  CHECK(r1.x == r2.x);
  CHECK(r1.y == r2.y);
  CHECK(r1.z == r2.z);
  CHECK(r1.x.cwiseAbs().maxCoeff() <= 1.0);

  SolverState cons = init_state(p, mix, InitMode::kConsensusRandom, 9);
  for (int i = 1; i < 10; ++i) {
    CHECK(cons.x.row(i) == cons.x.row(0));
    CHECK(cons.y.row(i) == cons.y.row(0));
    CHECK(cons.z.row(i) == cons.z.row(0));
  }
}

TEST_CASE("init_state rejects mismatched dimensions", "[solver]") {
  BilevelProblem p = make_paper_synthetic();  // 10 nodes
  MixingMatrix mix = metropolis_weights(Graph::complete(4));
  REQUIRE_THROWS_AS(init_state(p, mix, InitMode::kZeros), ConfigError);
}

TEST_CASE("directions on the single-node toy instance", "[solver]") {
  BilevelProblem p = toy_single_node();
  SolverState st;
  st.x = Eigen::MatrixXd::Zero(1, 1);
  st.y = Eigen::MatrixXd::Zero(1, 1);
  st.z = Eigen::MatrixXd::Zero(1, 1);
  DirectionFields dir = directions(p, st, 2.0);
  CHECK(dir.h_z(0, 0) == Catch::Approx(0.0));   // grad_y g(0,0) = 0
  CHECK(dir.h_y(0, 0) == Catch::Approx(-1.0));  // (y-1) + 2(x+y) = -1
  CHECK(dir.h_x(0, 0) == Catch::Approx(0.0));   // penalty difference cancels
}

TEST_CASE("min-max with lambda = 1 zeroes the y-direction", "[solver]") {
  BilevelProblem p = test_instances::quadratic_saddle_minmax(4, 3, 5);
  MixingMatrix mix = metropolis_weights(Graph::complete(4));
  SolverState st = init_state(p, mix, InitMode::kRandom, 3);
  DirectionFields dir = directions(p, st, 1.0);
  CHECK(dir.h_y.cwiseAbs().maxCoeff() == Catch::Approx(0.0).margin(1e-14));
  // and h_x row i = grad_x f_i(x_i, z_i)
  for (int i = 0; i < 4; ++i) {
    GradPair f = p.outer_grad(i, st.x.row(i), st.z.row(i));
    CHECK((dir.h_x.row(i).transpose() - f.x).norm() ==
          Catch::Approx(0.0).margin(1e-14));
  }
}

TEST_CASE("y = z makes the x-direction the plain outer gradient",
          "[solver]") {
  BilevelProblem p = make_paper_synthetic();
  MixingMatrix mix = metropolis_weights(Graph::complete(10));
  SolverState st = init_state(p, mix, InitMode::kRandom, 21);
  st.z = st.y;
  DirectionFields dir = directions(p, st, 20.0);
  for (int i = 0; i < 10; ++i) {
    GradPair f = p.outer_grad(i, st.x.row(i), st.y.row(i));
    CHECK((dir.h_x.row(i).transpose() - f.x).norm() ==
          Catch::Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("one hand-computed step on the toy instance", "[solver]") {
  BilevelProblem p = toy_single_node();
  MixingMatrix mix = single_node_network();
  SolverState st;
  st.x = Eigen::MatrixXd::Zero(1, 1);
  st.y = Eigen::MatrixXd::Zero(1, 1);
  st.z = Eigen::MatrixXd::Zero(1, 1);
  SolverState next = step(p, mix, st, steps_of(0.1, 0.1, 0.1, 2.0));
  CHECK(next.x(0, 0) == Catch::Approx(0.0));
  CHECK(next.y(0, 0) == Catch::Approx(0.1));
  CHECK(next.z(0, 0) == Catch::Approx(0.0));
  CHECK(next.k == 1);
}

TEST_CASE("steps are bitwise reproducible", "[solver]") {
  BilevelProblem p = make_paper_synthetic();
  MixingMatrix mix = metropolis_weights(erdos_renyi(10, 0.7, 1));
  StepSizes s = steps_of(7e-4, 1e-3, 1e-2, 20.0);
  SolverState a = init_state(p, mix, InitMode::kRandom, 7);
  SolverState b = init_state(p, mix, InitMode::kRandom, 7);
  for (int k = 0; k < 2; ++k) {
    a = step(p, mix, a, s);
    b = step(p, mix, b, s);
  }
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
  CHECK(a.z == b.z);
}

TEST_CASE("mixing preserves column means", "[solver]") {
  BilevelProblem p = make_paper_synthetic();
  MixingMatrix mix = metropolis_weights(erdos_renyi(10, 0.7, 3));
  SolverState st = init_state(p, mix, InitMode::kRandom, 11);
  StepSizes s = steps_of(1e-3, 1e-3, 1e-3, 20.0);

  // the averaged update must match a directly computed centralized update
  DirectionFields dir = directions(p, st, s.lambda);
  Eigen::VectorXd zbar_direct =
      st.z.colwise().mean().transpose() -
      s.gamma * dir.h_z.colwise().mean().transpose();
  Eigen::VectorXd ybar_direct =
      st.y.colwise().mean().transpose() -
      s.beta * dir.h_y.colwise().mean().transpose();
  Eigen::VectorXd xbar_direct =
      st.x.colwise().mean().transpose() -
      s.alpha * dir.h_x.colwise().mean().transpose();

  SolverState next = step(p, mix, st, s);
  CHECK((next.z.colwise().mean().transpose() - zbar_direct).norm() < 1e-12);
  CHECK((next.y.colwise().mean().transpose() - ybar_direct).norm() < 1e-12);
  CHECK((next.x.colwise().mean().transpose() - xbar_direct).norm() < 1e-12);
}

TEST_CASE("complete graph is a fixed point under zero-ish steps from "
          "consensus",
          "[solver]") {
  // homogeneous nodes: identical oracles keep consensus exact forever
  BilevelProblem p = test_instances::homogeneous_quadratic(6);
  MixingMatrix mix = metropolis_weights(Graph::complete(6));
  SolverState st = init_state(p, mix, InitMode::kConsensusRandom, 13);
  StepSizes s = steps_of(1e-3, 1e-3, 1e-3, 5.0, 50);
  AnalysisConstants c = derive_constants(p.smoothness(), s.lambda);
  RunOptions opt;
  opt.log_interval = 10;
  RunLog log = run(p, mix, s, st, c, opt);
  for (const MetricsRecord& r : log.records) {
    CHECK(r.cons_x_sq <= 1e-20);
    CHECK(r.cons_y_sq <= 1e-20);
    CHECK(r.cons_z_sq <= 1e-20);
  }
}

TEST_CASE("divergence raises with iteration and magnitude attached",
          "[solver]") {
  BilevelProblem p = toy_single_node();
  MixingMatrix mix = single_node_network();
  SolverState st;
  st.x = Eigen::MatrixXd::Constant(1, 1, 1.0);
  st.y = Eigen::MatrixXd::Constant(1, 1, 1.0);
  st.z = Eigen::MatrixXd::Constant(1, 1, 1.0);
  StepSizes bad = steps_of(1e9, 1e9, 1e9, 1e6);
  bool threw = false;
  for (int k = 0; k < 40; ++k) {
    try {
      st = step(p, mix, st, bad);
    } catch (const DivergenceError& err) {
      threw = true;
      CHECK(err.iteration() == st.k + 1);
      CHECK(err.worst_entry() > detail::kDivergenceLimit);
      break;
    }
  }
  CHECK(threw);
}

TEST_CASE("run preserves a partial log on divergence", "[solver]") {
  BilevelProblem p = toy_single_node();
  MixingMatrix mix = single_node_network();
  SolverState st;
  st.x = Eigen::MatrixXd::Constant(1, 1, 1.0);
  st.y = Eigen::MatrixXd::Constant(1, 1, 1.0);
  st.z = Eigen::MatrixXd::Constant(1, 1, 1.0);
  StepSizes bad = steps_of(1e9, 1e9, 1e9, 1e6, 100);
  AnalysisConstants c = derive_constants(p.smoothness(), bad.lambda);
  RunOptions opt;
  opt.with_metrics = false;
  RunLog log = run(p, mix, bad, st, c, opt);
  CHECK(log.diverged);
  CHECK(!log.records.empty());
  CHECK(!log.divergence_message.empty());
}

TEST_CASE("K = 0 leaves only the initial record", "[solver]") {
  BilevelProblem p = make_paper_synthetic();
  MixingMatrix mix = metropolis_weights(Graph::complete(10));
  StepSizes s = steps_of(1e-3, 1e-3, 1e-3, 20.0, 0);
  AnalysisConstants c = derive_constants(p.smoothness(), s.lambda);
  RunLog log = run(p, mix, s, init_state(p, mix, InitMode::kZeros), c);
  REQUIRE(log.records.size() == 1);
  CHECK(log.records[0].k == 0);
}

TEST_CASE("solver paths never touch the second-order oracle", "[solver]") {
  BilevelProblem p = make_paper_synthetic();
  MixingMatrix mix = metropolis_weights(erdos_renyi(10, 0.7, 8));
  p.reset_second_order_calls();
  StepSizes s = steps_of(7e-4, 1e-3, 1e-2, 20.0, 200);
  AnalysisConstants c = derive_constants(p.smoothness(), s.lambda);
  RunOptions opt;
  opt.with_metrics = false;  // metrics belong to the verification layer
  RunLog log = run(p, mix, s, init_state(p, mix, InitMode::kZeros), c, opt);
  CHECK(log.final_state.k == 200);
  CHECK(p.second_order_calls() == 0);
}

TEST_CASE("min-max y-block moves only by mixing at lambda = 1", "[solver]") {
  BilevelProblem p = test_instances::quadratic_saddle_minmax(5, 2, 41);
  MixingMatrix mix = metropolis_weights(erdos_renyi(5, 0.9, 2));
  SolverState st = init_state(p, mix, InitMode::kRandom, 6);
  SolverState next = step(p, mix, st, steps_of(1e-3, 1e-3, 1e-3, 1.0));
  CHECK((next.y - mix.W * st.y).cwiseAbs().maxCoeff() <= 1e-15);
}
