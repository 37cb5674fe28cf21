#include <doctest.h>

#include "tddp/direction.hpp"
#include "tddp/ocp.hpp"
#include "tddp/problems.hpp"
#include "tddp/solver.hpp"
#include "test_util.hpp"

using namespace tddp;
using testutil::LqShape;
using testutil::pipeline;
using testutil::random_lq;
using testutil::saddle_residual;
using testutil::stack_primal;

TEST_CASE("endpoint_multiplier_schur: feasible endpoint gives zero beta") {
  const Matrix rx = Matrix::Identity(2, 2);
  const Matrix dXN = Matrix::Identity(2, 2);
  const Vector beta = direction::endpoint_multiplier_schur(
      rx, Vector::Zero(2), Vector::Zero(2), dXN);
  CHECK(beta.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("endpoint_multiplier_schur: empty endpoint gives empty beta") {
  const Vector beta = direction::endpoint_multiplier_schur(
      Matrix(0, 2), Vector(0), Vector::Zero(2), Matrix(2, 0));
  CHECK(beta.size() == 0);
}

TEST_CASE("endpoint multiplier matches the dense dual on a scalar instance") {
  // One-step scalar LQR with endpoint r(x) = x - 1.
  ocp::LQApproximation lq;
  lq.stages.resize(1);
  auto& s = lq.stages[0];
  s.lxx = s.luu = Matrix::Identity(1, 1);
  s.lxu = Matrix::Zero(1, 1);
  s.lx = s.lu = Vector::Zero(1);
  s.fx = s.fu = Matrix::Identity(1, 1);
  s.fgap = Vector::Zero(1);
  s.hx.resize(0, 1);
  s.hu.resize(0, 1);
  s.hgap.resize(0);
  lq.f0gap = Vector::Zero(1);
  lq.lxN = Vector::Zero(1);
  lq.lxxN = Matrix::Identity(1, 1);
  lq.rx = Matrix::Identity(1, 1);
  lq.rgap = Vector::Constant(1, -1.0);

  const auto dir = pipeline(lq, riccati::Formulation::Forward);
  const auto sol = saddle::solve_kkt_dense(ocp::assemble_dense_kkt(lq));
  CHECK((dir.beta - sol.y).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("endpoint_multiplier_nullspace: equals Schur at full rank") {
  std::mt19937 rng(21);
  LqShape sh;
  sh.N = 4;
  sh.nr = 2;
  const auto lq = random_lq(rng, sh);
  const auto d1 = pipeline(lq, riccati::Formulation::Forward, false);
  const auto d2 = pipeline(lq, riccati::Formulation::Forward, true);
  CHECK((d1.beta - d2.beta).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("duplicated endpoint rows: nullspace path reproduces the "
          "single-row direction, Schur throws") {
  std::mt19937 rng(33);
  LqShape sh;
  sh.N = 4;
  sh.nr = 2;
  const auto lq = random_lq(rng, sh);
  LqShape shd = sh;
  std::mt19937 rng2(33);
  shd.duplicate_r = true;
  const auto lqd = random_lq(rng2, shd);

  const auto base = pipeline(lq, riccati::Formulation::Forward, true);
  const auto dup = pipeline(lqd, riccati::Formulation::Forward, true);
  for (size_t k = 0; k < base.dx.size(); ++k)
    CHECK((base.dx[k] - dup.dx[k]).cwiseAbs().maxCoeff() <= 1e-8);
  for (size_t k = 0; k < base.du.size(); ++k)
    CHECK((base.du[k] - dup.du[k]).cwiseAbs().maxCoeff() <= 1e-8);

  CHECK_THROWS_AS(pipeline(lqd, riccati::Formulation::Forward, false),
                  SingularEndpointOperator);
}

TEST_CASE("contradictory duplicated endpoint rows are reported") {
  std::mt19937 rng(44);
  LqShape sh;
  sh.N = 3;
  sh.nr = 1;
  auto lq = random_lq(rng, sh);
  Matrix rx(2, sh.nx);
  rx << lq.rx, lq.rx;
  Vector rgap(2);
  rgap << lq.rgap(0), lq.rgap(0) + 1.0;  // r(x)-1 and r(x)-2, say
  lq.rx = rx;
  lq.rgap = rgap;
  CHECK_THROWS_AS(pipeline(lq, riccati::Formulation::Forward, true),
                  InconsistentEndpoint);
}

TEST_CASE("combine: zero beta reproduces the hat direction bitwise") {
  std::mt19937 rng(8);
  LqShape sh;
  sh.N = 3;
  sh.nr = 2;
  const auto lq = random_lq(rng, sh);
  auto [pol, val] =
      riccati::backward_pass_hat(lq, 0.0, riccati::Formulation::Forward, 1e-10);
  const auto hat = riccati::rollout_hat(lq, pol, val);
  auto [cpol, cval] = riccati::backward_pass_check(lq, pol);
  const auto chk = riccati::rollout_check(lq, cpol, val, cval);
  const auto dir = direction::combine(hat, chk, Vector::Zero(2));
  for (size_t k = 0; k < hat.dx.size(); ++k)
    CHECK((dir.dx[k] - hat.dx[k]).cwiseAbs().maxCoeff() == 0.0);
  for (size_t k = 0; k < hat.du.size(); ++k)
    CHECK((dir.du[k] - hat.du[k]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("combine: zero hat direction leaves the pure check combination") {
  std::mt19937 rng(9);
  LqShape sh;
  sh.N = 3;
  sh.nr = 2;
  const auto lq = random_lq(rng, sh);
  auto [pol, val] =
      riccati::backward_pass_hat(lq, 0.0, riccati::Formulation::Forward, 1e-10);
  auto hat = riccati::rollout_hat(lq, pol, val);
  for (auto& v : hat.dx) v.setZero();
  for (auto& v : hat.du) v.setZero();
  for (auto& v : hat.dxi) v.setZero();
  auto [cpol, cval] = riccati::backward_pass_check(lq, pol);
  const auto chk = riccati::rollout_check(lq, cpol, val, cval);
  const Vector beta = testutil::random_vector(rng, 2);
  const auto dir = direction::combine(hat, chk, beta);
  for (size_t k = 0; k < dir.dx.size(); ++k)
    CHECK((dir.dx[k] + chk.dX[k] * beta).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("master oracle: combined direction matches the dense KKT solve") {
  std::mt19937 rng(21);
  LqShape sh;
  sh.N = 5;
  sh.nh = 1;
  sh.nr = 2;
  const auto lq = random_lq(rng, sh);
  for (const auto form : {riccati::Formulation::InverseSchur,
                          riccati::Formulation::InverseNullspace}) {
    const auto dir = pipeline(lq, form);
    const auto sys = ocp::assemble_dense_kkt(lq);
    const auto sol = saddle::solve_kkt_dense(sys);
    const Vector w = stack_primal(lq, dir.dx, dir.du, dir.dgamma, dir.dxi);
    CHECK((w - sol.w).cwiseAbs().maxCoeff() <= 1e-8 * (1.0 + sol.w.norm()));
    CHECK((dir.beta - sol.y).cwiseAbs().maxCoeff() <=
          1e-8 * (1.0 + sol.y.norm()));
    const auto [r1, r2] = saddle_residual(sys, w, dir.beta);
    CHECK(r1 <= 1e-8);
    CHECK(r2 <= 1e-8);
  }
}

TEST_CASE("expected improvement: zero at alpha = 0, hat-only at beta = 0") {
  std::mt19937 rng(10);
  LqShape sh;
  sh.N = 4;
  sh.nr = 2;
  const auto lq = random_lq(rng, sh);
  const auto dir = pipeline(lq, riccati::Formulation::Forward);
  CHECK(direction::expected_improvement(dir, 0.0) == 0.0);

  auto [pol, val] =
      riccati::backward_pass_hat(lq, 0.0, riccati::Formulation::Forward, 1e-10);
  const auto hat = riccati::rollout_hat(lq, pol, val);
  const double hat_only =
      direction::total_expected_improvement(hat, lq, Vector::Zero(2), 1.0);
  direction::SearchDirection tmp;
  tmp.beta = Vector::Zero(2);
  direction::attach_expected_improvement(tmp, hat, lq);
  CHECK(hat_only == doctest::Approx(tmp.d1 + 0.5 * tmp.d2));
}

TEST_CASE("expected improvement at alpha = 1 equals the actual LQ cost "
          "decrease") {
  problems::ProblemSpec spec;
  spec.family = "lqr";
  spec.N = 8;
  spec.seed = 4;
  const auto problem = problems::build(spec);
  std::mt19937 rng(12);
  std::vector<Vector> xs(9), us(8);
  for (auto& x : xs) x = testutil::random_vector(rng, 4);
  for (auto& u : us) u = testutil::random_vector(rng, 2);
  const auto it = ocp::evaluate(problem, xs, us);
  const auto lq = ocp::linearize(problem, it);
  const auto dir = pipeline(lq, riccati::Formulation::Forward);

  // Full feasibility-driven step lands exactly on the shifted trajectory.
  const auto cand = solver::rollout(problem, it, dir, 1.0,
                                    solver::RolloutMode::FeasibilityDriven,
                                    nullptr);
  const double actual = cand.cost - it.cost;
  const double predicted = direction::expected_improvement(dir, 1.0);
  CHECK(predicted ==
        doctest::Approx(actual).epsilon(1e-8).scale(1.0 + std::abs(actual)));
}

TEST_CASE("total_expected_improvement validates the step-length range") {
  std::mt19937 rng(13);
  LqShape sh;
  const auto lq = random_lq(rng, sh);
  auto [pol, val] =
      riccati::backward_pass_hat(lq, 0.0, riccati::Formulation::Forward, 1e-10);
  const auto hat = riccati::rollout_hat(lq, pol, val);
  CHECK_THROWS(direction::total_expected_improvement(hat, lq,
                                                     Vector::Zero(sh.nr), 2.0));
}
