#include "tddp/riccati.hpp"

namespace tddp::riccati {

std::pair<CheckPolicy, CheckValueModel> backward_pass_check(
    const ocp::LQApproximation& lq, const HatPolicy& hat) {
  const int N = lq.N();
  const Eigen::Index n_r = lq.n_r();
  if (!hat.factorizations_retained ||
      static_cast<int>(hat.fact.size()) != N)
    throw StaleFactorization("hat pass factorizations unavailable");

  CheckPolicy pol;
  pol.K = hat.K;
  pol.gamma_fb = hat.gamma_fb;
  pol.k_theta.resize(N);
  pol.gamma_theta.resize(N);

  CheckValueModel val;
  val.Vxtheta.resize(N + 1);
  val.dv1.resize(N);
  val.dv2.resize(N);
  val.Vxtheta1.resize(N);
  val.Vxtheta2.resize(N);
  val.Vxtheta[N] = -lq.rx.transpose();

  if (n_r == 0) {
    for (int k = N - 1; k >= 0; --k) {
      const auto& s = lq.stages[k];
      pol.k_theta[k].resize(s.n_u(), 0);
      pol.gamma_theta[k].resize(s.n_h(), 0);
      val.Vxtheta[k].resize(s.n_x(), 0);
      val.dv1[k].resize(0, 0);
      val.dv2[k].resize(0, 0);
      val.Vxtheta1[k].resize(s.n_x(), 0);
      val.Vxtheta2[k].resize(s.n_x(), 0);
    }
    return {std::move(pol), std::move(val)};
  }

  for (int k = N - 1; k >= 0; --k) {
    const auto& s = lq.stages[k];
    const auto& fact = hat.fact[k];
    const Matrix& Vxt1 = val.Vxtheta[k + 1];
    const Matrix Qxt = s.fx.transpose() * Vxt1;
    const Matrix Qut = s.fu.transpose() * Vxt1;

    Matrix& kt = pol.k_theta[k];
    Matrix& gt = pol.gamma_theta[k];
    const bool plain = s.n_h() == 0 || hat.formulation == Formulation::Forward;
    if (plain) {
      kt = fact.quu_llt.solve(Qut);
      gt.resize(s.n_h(), n_r);
      gt.setZero();
    } else if (hat.formulation == Formulation::InverseSchur) {
      const Matrix kt0 = fact.quu_llt.solve(Qut);
      gt = fact.schur_llt.solve(Matrix(-s.hu * kt0));
      kt = kt0 + fact.quu_inv_huT * gt;
    } else {
      const Matrix& Z = fact.hu_bases.Z;
      kt = Matrix::Zero(s.n_u(), n_r);
      if (Z.cols() > 0)
        kt = Z * fact.qzz_llt.solve(Matrix(Z.transpose() * Qut));
      const Matrix& Y = fact.hu_bases.Y;
      const Matrix huY = s.hu * Y;
      gt = huY * fact.schur_llt.solve(
                     Matrix(Y.transpose() * (fact.quu * kt - Qut)));
    }

    const Matrix& Kk = hat.K[k];
    if (plain) {
      val.dv1[k] = kt.transpose() * Qut;
      val.Vxtheta1[k] = Matrix::Zero(s.n_x(), n_r);
    } else {
      val.dv1[k] = kt.transpose() * fact.quu * kt;
      val.Vxtheta1[k] =
          Kk.transpose() * (fact.quu * kt) - fact.qux.transpose() * kt;
    }
    val.dv2[k] = -kt.transpose() * Qut;
    val.Vxtheta2[k] = Qxt - Kk.transpose() * Qut;
    val.Vxtheta[k] = val.Vxtheta1[k] + val.Vxtheta2[k];
  }
  return {std::move(pol), std::move(val)};
}

CheckDirection rollout_check(const ocp::LQApproximation& lq,
                             const CheckPolicy& pol,
                             const HatValueModel& hat_val,
                             const CheckValueModel& chk_val) {
  const int N = lq.N();
  const Eigen::Index n_r = lq.n_r();
  if (static_cast<int>(pol.k_theta.size()) != N)
    throw DimensionMismatch("check policy does not cover the horizon");

  CheckDirection dir;
  dir.dX.resize(N + 1);
  dir.dU.resize(N);
  dir.dGamma.resize(N);
  dir.dXi.resize(N + 1);
  dir.dX[0] = Matrix::Zero(lq.n_x(), n_r);
  dir.dXi[0] = chk_val.Vxtheta[0] + hat_val.Vxx[0] * dir.dX[0];
  for (int k = 0; k < N; ++k) {
    const auto& s = lq.stages[k];
    dir.dU[k] = -pol.k_theta[k] - pol.K[k] * dir.dX[k];
    dir.dGamma[k] = pol.gamma_theta[k];
    if (s.n_h() > 0 && pol.gamma_fb[k].size() > 0)
      dir.dGamma[k] += pol.gamma_fb[k] * dir.dX[k];
    // No gap term: the endpoint-dependent system is homogeneous.
    dir.dX[k + 1] = s.fx * dir.dX[k] + s.fu * dir.dU[k];
    dir.dXi[k + 1] = chk_val.Vxtheta[k + 1] + hat_val.Vxx[k + 1] * dir.dX[k + 1];
  }
  return dir;
}

}  // namespace tddp::riccati
