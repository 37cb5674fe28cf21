#include <doctest.h>

#include <cmath>

#include "tddp/problems.hpp"
#include "tddp/solver.hpp"
#include "test_util.hpp"

using namespace tddp;
using problems::Integrator;
using problems::ProblemSpec;

namespace {

std::pair<std::vector<Vector>, std::vector<Vector>> random_trajectory(
    const ocp::Problem& problem, Eigen::Index nu, unsigned seed,
    double scale = 0.3) {
  std::mt19937 rng(seed);
  std::vector<Vector> xs(problem.N + 1), us(problem.N);
  for (auto& x : xs)
    x = problem.x0 + scale * testutil::random_vector(rng, problem.n_x());
  for (auto& u : us) u = scale * testutil::random_vector(rng, nu);
  return {xs, us};
}

}  // namespace

TEST_CASE("build: every family produces a well-formed problem") {
  for (const char* family :
       {"lqr", "point-mass", "cartpole", "dpend", "dpend-inverse"}) {
    ProblemSpec spec;
    spec.family = family;
    spec.N = 5;
    const auto problem = problems::build(spec);
    CAPTURE(family);
    CHECK(problem.N == 5);
    CHECK(problem.stages.size() == 5);
    CHECK(problem.x0.size() == problem.n_x());
    CHECK(problem.endpoint.n_r >= 1);
    auto [xs, us] = problems::initial_guess(problem);
    CHECK(xs.size() == 6);
    CHECK(us.size() == 5);
    const auto it = ocp::evaluate(problem, xs, us);
    CHECK(std::isfinite(it.cost));
    CHECK(it.rgap.allFinite());
  }
}

TEST_CASE("build: unknown family and invalid parameters are rejected") {
  ProblemSpec spec;
  spec.family = "no-such-family";
  CHECK_THROWS_AS(problems::build(spec), UnknownFamily);
  spec.family = "lqr";
  spec.N = 0;
  CHECK_THROWS_AS(problems::build(spec), UnknownFamily);
  spec.N = 5;
  spec.dt = -1.0;
  CHECK_THROWS_AS(problems::build(spec), UnknownFamily);
  spec.dt = 0.05;
  spec.nr = 9;  // exceeds nx = 4
  CHECK_THROWS_AS(problems::build(spec), UnknownFamily);
  CHECK_THROWS_AS(problems::integrator_from_string("verlet"), UnknownFamily);
}

TEST_CASE("integrator_from_string round-trips the supported names") {
  for (const auto ig : {Integrator::SemiImplicitEuler, Integrator::ExplicitEuler,
                        Integrator::Rk4})
    CHECK(problems::integrator_from_string(problems::to_string(ig)) == ig);
}

TEST_CASE("duplicate_endpoint/stagewise: copy count below two is rejected") {
  const auto problem = problems::build(ProblemSpec{});
  CHECK_THROWS_AS(problems::duplicate_endpoint(problem, 1),
                  DimensionMismatch);
  CHECK_THROWS_AS(problems::duplicate_stagewise(problem, 1),
                  DimensionMismatch);
}

TEST_CASE("finite differences confirm every analytic derivative") {
  const char* families[] = {"lqr", "point-mass", "cartpole", "dpend",
                            "dpend-inverse"};
  for (int i = 0; i < 5; ++i) {
    for (const auto ig : {Integrator::SemiImplicitEuler,
                          Integrator::ExplicitEuler, Integrator::Rk4}) {
      ProblemSpec spec;
      spec.family = families[i];
      spec.N = 4;
      spec.integrator = ig;
      const auto problem = problems::build(spec);
      auto [xs, us] =
          random_trajectory(problem, problem.stages[0].n_u, 17 + i);
      const double err = ocp::derivative_error(problem, xs, us);
      CAPTURE(families[i]);
      CAPTURE(problems::to_string(ig));
      CHECK(err <= 1e-5);
    }
  }
}

TEST_CASE("dpend energy: closed form at rest and drift of the unforced flow") {
  ProblemSpec spec;
  spec.family = "dpend";
  spec.integrator = Integrator::Rk4;
  spec.dt = 1e-3;
  spec.N = 1;

  // Hanging at rest: pure potential energy.
  const double hand =
      -(spec.m1 + spec.m2) * spec.gravity * spec.l1 -
      spec.m2 * spec.gravity * spec.l2;
  CHECK(problems::dpend_energy(spec, Vector::Zero(4)) ==
        doctest::Approx(hand));

  const auto problem = problems::build(spec);
  Vector x(4);
  x << 1.2, -0.4, 0.0, 0.0;
  const double e0 = problems::dpend_energy(spec, x);
  const Vector tau = Vector::Zero(2);
  for (int k = 0; k < 1000; ++k) x = problem.stages[0].dynamics(x, tau);
  const double e1 = problems::dpend_energy(spec, x);
  CHECK(std::abs(e1 - e0) <= 0.01 * std::abs(e0));
}

TEST_CASE("dpend-inverse constraint vanishes on forward-dynamics "
          "accelerations") {
  ProblemSpec fwd;
  fwd.family = "dpend";
  fwd.integrator = Integrator::SemiImplicitEuler;
  fwd.N = 1;
  const auto forward = problems::build(fwd);
  ProblemSpec inv = fwd;
  inv.family = "dpend-inverse";
  const auto inverse = problems::build(inv);

  std::mt19937 rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    const Vector x = testutil::random_vector(rng, 4);
    const Vector tau = testutil::random_vector(rng, 2);
    // Semi-implicit velocity update exposes the acceleration exactly.
    const Vector xn = forward.stages[0].dynamics(x, tau);
    const Vector a = (xn.tail(2) - x.tail(2)) / fwd.dt;
    Vector u(4);
    u << a, tau;
    const Vector h = inverse.stages[0].constraint(x, u);
    CHECK(h.cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("cartpole state difference wraps the pole angle") {
  ProblemSpec spec;
  spec.family = "cartpole";
  const auto problem = problems::build(spec);
  Vector a = Vector::Zero(4), b = Vector::Zero(4);
  a(1) = 2.0 * EIGEN_PI - 0.1;
  b(1) = -0.1;
  CHECK(problem.diff(a, b).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("duplicated endpoint rows: nullspace resolution reproduces the "
          "single-copy solution, strict Schur fails") {
  ProblemSpec spec;
  spec.family = "lqr";
  spec.N = 10;
  spec.seed = 3;
  const auto base = problems::build(spec);
  ProblemSpec dup = spec;
  dup.endpoint_copies = 3;
  const auto stacked = problems::build(dup);
  CHECK(stacked.endpoint.n_r == 3 * base.endpoint.n_r);

  auto [xs, us] = problems::initial_guess(base);
  solver::SolverOptions opts;
  opts.endpoint = solver::EndpointResolution::Nullspace;
  auto [it_base, s_base] = solver::solve(base, xs, us, opts);
  auto [it_dup, s_dup] = solver::solve(stacked, xs, us, opts);
  REQUIRE(s_base.status == solver::SolveStatus::Converged);
  REQUIRE(s_dup.status == solver::SolveStatus::Converged);
  for (size_t k = 0; k < it_base.xs.size(); ++k)
    CHECK((it_base.xs[k] - it_dup.xs[k]).cwiseAbs().maxCoeff() <= 1e-8);

  solver::SolverOptions strict = opts;
  strict.endpoint = solver::EndpointResolution::Schur;
  CHECK_THROWS_AS(solver::solve(stacked, xs, us, strict),
                  SingularEndpointOperator);
}

TEST_CASE("duplicated stagewise rows: nullspace formulation reproduces the "
          "single-copy solution") {
  ProblemSpec spec;
  spec.family = "dpend-inverse";
  spec.N = 30;
  spec.dt = 0.03;
  const auto base = problems::build(spec);
  ProblemSpec dup = spec;
  dup.stagewise_copies = 2;
  const auto stacked = problems::build(dup);
  CHECK(stacked.stages[0].n_h == 2 * base.stages[0].n_h);

  auto [xs, us] = problems::initial_guess(base);
  solver::SolverOptions opts;
  opts.formulation = riccati::Formulation::InverseNullspace;
  opts.endpoint = solver::EndpointResolution::Nullspace;
  opts.max_iters = 150;
  auto [it_base, s_base] = solver::solve(base, xs, us, opts);
  auto [it_dup, s_dup] = solver::solve(stacked, xs, us, opts);
  REQUIRE(s_base.status == solver::SolveStatus::Converged);
  REQUIRE(s_dup.status == solver::SolveStatus::Converged);
  for (size_t k = 0; k < it_base.xs.size(); ++k)
    CHECK((it_base.xs[k] - it_dup.xs[k]).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("lqr builds are deterministic in the seed") {
  ProblemSpec spec;
  spec.family = "lqr";
  spec.seed = 11;
  const auto p1 = problems::build(spec);
  const auto p2 = problems::build(spec);
  std::mt19937 rng(4);
  const Vector x = testutil::random_vector(rng, 4);
  const Vector u = testutil::random_vector(rng, 2);
  CHECK((p1.stages[0].dynamics(x, u) - p2.stages[0].dynamics(x, u))
            .cwiseAbs()
            .maxCoeff() == 0.0);
}
