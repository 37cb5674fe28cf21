#include "tddp/direction.hpp"

#include <Eigen/LU>

namespace tddp::direction {

Vector endpoint_multiplier_schur(const Matrix& rx, const Vector& rbar,
                                 const Vector& dxN_hat,
                                 const Matrix& dXN_theta) {
  const Eigen::Index n_r = rbar.size();
  if (n_r == 0) return Vector(0);
  const Matrix op = rx * dXN_theta;
  Eigen::FullPivLU<Matrix> lu(op);
  lu.setThreshold(default_rank_tol(op.rows(), op.cols()));
  if (lu.rank() < n_r)
    throw SingularEndpointOperator("rx dX_N is singular");
  return lu.solve(rbar + rx * dxN_hat);
}

Vector endpoint_multiplier_nullspace(const Matrix& rx, const Vector& rbar,
                                     const Vector& dxN_hat,
                                     const Matrix& dXN_theta, double rank_tol,
                                     saddle::RankRevealing backend) {
  const Eigen::Index n_r = rbar.size();
  if (n_r == 0) return Vector(0);
  const Matrix op = rx * dXN_theta;
  const Vector rhs = rbar + rx * dxN_hat;
  const auto bases = saddle::nullspace_bases(op, rank_tol, backend);
  const Matrix& Y = bases.Y;
  Vector beta = Vector::Zero(n_r);
  if (Y.cols() > 0) {
    const Matrix red = Y.transpose() * op * Y;
    Eigen::FullPivLU<Matrix> lu(red);
    lu.setThreshold(default_rank_tol(red.rows(), red.cols()));
    if (lu.rank() < red.rows())
      throw SingularEndpointOperator("reduced endpoint operator is singular");
    beta = Y * lu.solve(Vector(Y.transpose() * rhs));
  }
  if (bases.Z.cols() > 0) {
    const double resid = (bases.Z.transpose() * (rhs - op * beta))
                             .cwiseAbs()
                             .maxCoeff();
    if (resid > 1e-8 * (1.0 + rhs.norm()))
      throw InconsistentEndpoint("endpoint constraint infeasible as posed");
  }
  return beta;
}

SearchDirection combine(const riccati::HatDirection& hat,
                        const riccati::CheckDirection& chk,
                        const Vector& beta) {
  const size_t N = hat.du.size();
  if (chk.dU.size() != N || chk.dX.size() != hat.dx.size())
    throw DimensionMismatch("hat/check horizons differ");

  SearchDirection dir;
  dir.beta = beta;
  dir.dx.resize(N + 1);
  dir.du.resize(N);
  dir.dgamma.resize(N);
  dir.dxi.resize(N + 1);
  for (size_t k = 0; k <= N; ++k) {
    dir.dx[k] = hat.dx[k] - chk.dX[k] * beta;
    dir.dxi[k] = hat.dxi[k] - chk.dXi[k] * beta;
  }
  for (size_t k = 0; k < N; ++k) {
    dir.du[k] = hat.du[k] - chk.dU[k] * beta;
    dir.dgamma[k] = hat.dgamma[k].size() > 0
                        ? Vector(hat.dgamma[k] - chk.dGamma[k] * beta)
                        : Vector(0);
  }
  return dir;
}

void attach_expected_improvement(SearchDirection& dir,
                                 const riccati::HatDirection& hat,
                                 const ocp::LQApproximation& lq) {
  // For w = w_hat - W_check*beta with A w_hat = a and A W_check = B':
  //   q(alpha w) = -alpha a'w + alpha^2/2 (a'w - b'y),
  // where a'w = a'w_hat - (B w_hat)'beta and B w_hat = rx dx_N.
  const Vector Bw_hat =
      lq.n_r() > 0 ? Vector(lq.rx * hat.dx.back()) : Vector(0);
  const double a_dot_w =
      hat.a_dot_w - (dir.beta.size() > 0 ? Bw_hat.dot(dir.beta) : 0.0);
  const double b_dot_y =
      dir.beta.size() > 0 ? -lq.rgap.dot(dir.beta) : 0.0;
  dir.d1 = -a_dot_w;
  dir.d2 = a_dot_w - b_dot_y;
}

double expected_improvement(const SearchDirection& dir, double alpha) {
  return alpha * dir.d1 + 0.5 * alpha * alpha * dir.d2;
}

double total_expected_improvement(const riccati::HatDirection& hat,
                                  const ocp::LQApproximation& lq,
                                  const Vector& beta, double alpha) {
  if (alpha < 0.0 || alpha > 1.0)
    throw DimensionMismatch("step length must lie in [0, 1]");
  SearchDirection dir;
  dir.beta = beta;
  attach_expected_improvement(dir, hat, lq);
  return expected_improvement(dir, alpha);
}

}  // namespace tddp::direction
