#ifndef TDDP_PROBLEMS_HPP
#define TDDP_PROBLEMS_HPP

#include <string>

#include "tddp/ocp.hpp"

namespace tddp::problems {

enum class Integrator { SemiImplicitEuler, ExplicitEuler, Rk4 };

Integrator integrator_from_string(const std::string& name);
const char* to_string(Integrator ig);

/// Declarative description of a benchmark instance. Families:
///   lqr           seeded random linear dynamics, full or partial endpoint
///   point-mass    planar double integrator driven by forces
///   cartpole      cart with a free pole, swing-up to the upright
///   dpend         double pendulum, torque controls (forward dynamics)
///   dpend-inverse double pendulum, controls (accelerations, torques) tied
///                 by the stagewise constraint M(q) a + c(q, v) - tau = 0
struct ProblemSpec {
  std::string family = "lqr";
  int N = 20;
  double dt = 0.05;
  Integrator integrator = Integrator::SemiImplicitEuler;

  // lqr family.
  int nx = 4;
  int nu = 2;
  int nr = -1;  // endpoint rows; <0 means all of x
  unsigned seed = 0;

  // Double pendulum (absolute link angles, measured from the downward
  // vertical; upright is (pi, pi)).
  double m1 = 1.0, m2 = 1.0, l1 = 0.5, l2 = 0.5;

  // Cartpole (state: cart position, pole angle from down, rates).
  double cart_mass = 1.0, pole_mass = 0.3, pole_length = 0.5;

  // Point mass.
  double mass = 1.0;

  double gravity = 9.81;

  // Running costs are pure regularization; the target is enforced by the
  // endpoint constraint.
  double w_state = 1e-4;
  double w_control = 1e-3;

  Vector x0;      // empty: family default
  Vector target;  // empty: family default

  // Rank-deficiency switches; values > 1 stack identical constraint rows.
  int endpoint_copies = 1;
  int stagewise_copies = 1;

  // Advisory, consumed by the harness when choosing solver options.
  std::string formulation = "forward";

  void validate() const;
};

ocp::Problem build(const ProblemSpec& spec);

/// Stacks the endpoint constraint `times` times (consistent but
/// rank-deficient). Requires times >= 2.
ocp::Problem duplicate_endpoint(const ocp::Problem& problem, int times);

/// Stacks every stagewise constraint `times` times. Requires times >= 2.
ocp::Problem duplicate_stagewise(const ocp::Problem& problem, int times);

/// Quiescent warm start: every state at x0, zero controls.
std::pair<std::vector<Vector>, std::vector<Vector>> initial_guess(
    const ocp::Problem& problem);

/// Total mechanical energy of the double pendulum at state x; used to
/// validate the dynamics callbacks via drift of the unforced system.
double dpend_energy(const ProblemSpec& spec, const Vector& x);

}  // namespace tddp::problems

#endif
