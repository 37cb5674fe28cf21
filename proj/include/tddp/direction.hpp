#ifndef TDDP_DIRECTION_HPP
#define TDDP_DIRECTION_HPP

#include "tddp/riccati.hpp"

namespace tddp::direction {

struct SearchDirection {
  std::vector<Vector> dx;      // N+1
  std::vector<Vector> du;      // N
  std::vector<Vector> dgamma;  // N, next-value stagewise multipliers
  std::vector<Vector> dxi;     // N+1, next-value dynamics multipliers
  Vector beta;                 // next-value endpoint multiplier
  // Expected-improvement model dV(alpha) = alpha*d1 + alpha^2/2*d2.
  double d1 = 0.0;
  double d2 = 0.0;
};

/// beta = (rx dX_N)^{-1} (rbar + rx dx_N); requires rx dX_N nonsingular.
Vector endpoint_multiplier_schur(const Matrix& rx, const Vector& rbar,
                                 const Vector& dxN_hat, const Matrix& dXN_theta);

/// Rangespace variant tolerating rank-deficient endpoint operators.
Vector endpoint_multiplier_nullspace(const Matrix& rx, const Vector& rbar,
                                     const Vector& dxN_hat,
                                     const Matrix& dXN_theta, double rank_tol,
                                     saddle::RankRevealing backend =
                                         saddle::RankRevealing::QrColPiv);

SearchDirection combine(const riccati::HatDirection& hat,
                        const riccati::CheckDirection& chk,
                        const Vector& beta);

/// Fills the expected-improvement coefficients of a combined direction from
/// the rollout accumulations; exact for linear-quadratic data.
void attach_expected_improvement(SearchDirection& dir,
                                 const riccati::HatDirection& hat,
                                 const ocp::LQApproximation& lq);

/// Model decrease at step length alpha for the attached coefficients.
double expected_improvement(const SearchDirection& dir, double alpha);

/// Total quadratic-model decrease combining both Riccati passes at the
/// given step length.
double total_expected_improvement(const riccati::HatDirection& hat,
                                  const ocp::LQApproximation& lq,
                                  const Vector& beta, double alpha);

}  // namespace tddp::direction

#endif
