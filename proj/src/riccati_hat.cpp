#include "tddp/riccati.hpp"

namespace tddp::riccati {

namespace {

Eigen::LLT<Matrix> counted_llt(const Matrix& M) {
  FactorizationCounter::bump();
  return Eigen::LLT<Matrix>(M);
}

}  // namespace

std::pair<Vector, Matrix> policy_forward(const Vector& Qu, const Matrix& Quu,
                                         const Matrix& Qux) {
  const auto llt = counted_llt(Quu);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite("Quu is not positive definite");
  return {llt.solve(Qu), llt.solve(Qux)};
}

namespace {

// Shared stage solve; fills the retained factorization and the policy and
// multiplier terms for one stage.
void solve_stage(const Vector& Qu, const Matrix& Quu, const Matrix& Qux,
                 const Matrix& hx, const Matrix& hu, const Vector& hbar,
                 Formulation formulation, double rank_tol, int stage,
                 StageFactorization& fact, Vector& k, Matrix& K,
                 Vector& gamma_ff, Matrix& gamma_fb) {
  const Eigen::Index n_u = Qu.size(), n_h = hbar.size(), n_x = Qux.cols();
  fact.qux = Qux;
  fact.quu = Quu;

  // Positive definiteness of the full Quu is only required when it is
  // factored directly; the nullspace path needs it on span(Z) alone, which
  // keeps exact-Hessian steps usable when Quu is indefinite off the
  // constraint manifold.
  if (n_h == 0 || formulation == Formulation::Forward) {
    fact.quu_llt = counted_llt(Quu);
    if (fact.quu_llt.info() != Eigen::Success)
      throw NotPositiveDefinite("Quu not positive definite", stage);
    k = fact.quu_llt.solve(Qu);
    K = fact.quu_llt.solve(Qux);
    gamma_ff.resize(0);
    gamma_fb.resize(0, n_x);
    return;
  }

  if (formulation == Formulation::InverseSchur) {
    fact.quu_llt = counted_llt(Quu);
    if (fact.quu_llt.info() != Eigen::Success)
      throw NotPositiveDefinite("Quu not positive definite", stage);
    const Vector k0 = fact.quu_llt.solve(Qu);
    const Matrix K0 = fact.quu_llt.solve(Qux);
    fact.quu_inv_huT = fact.quu_llt.solve(hu.transpose());
    const Matrix S = hu * fact.quu_inv_huT;
    fact.schur_llt = counted_llt(S);
    if (fact.schur_llt.info() != Eigen::Success)
      throw SingularConstraintBlock("hu Quu^{-1} hu' is singular", stage);
    gamma_ff = fact.schur_llt.solve(hbar - hu * k0);
    gamma_fb = fact.schur_llt.solve(Matrix(hx - hu * K0));
    k = k0 + fact.quu_inv_huT * gamma_ff;
    K = K0 + fact.quu_inv_huT * gamma_fb;
    return;
  }

  // Inverse-nullspace: three decompositions, all retained.
  FactorizationCounter::bump();
  fact.hu_bases = saddle::nullspace_bases(hu, rank_tol);
  const Matrix& Z = fact.hu_bases.Z;
  const Matrix& Y = fact.hu_bases.Y;
  const Eigen::Index nz = Z.cols();

  Matrix ZtQuu;
  if (nz > 0) {
    ZtQuu = Z.transpose() * Quu;
    fact.qzz_llt = counted_llt(Matrix(ZtQuu * Z));
    if (fact.qzz_llt.info() != Eigen::Success)
      throw NotPositiveDefinite("Z'QuuZ not positive definite", stage);
  }

  const Matrix huY = hu * Y;  // full column rank by construction
  Matrix pinv_huY = Matrix::Zero(Y.cols(), n_h);
  if (Y.cols() > 0) {
    FactorizationCounter::bump();
    fact.huY_qr = Eigen::ColPivHouseholderQR<Matrix>(huY);
    // Explicit pseudo-inverse of hu Y (small: rank x n_h).
    pinv_huY = fact.huY_qr.solve(Matrix::Identity(huY.rows(), huY.rows()));
  }
  Matrix correction = Y * pinv_huY;
  if (nz > 0) correction -= Z * fact.qzz_llt.solve(Matrix(ZtQuu * correction));
  fact.proj = correction;

  // The bias must lie in the range of hu for the stage to be solvable.
  const Vector t = pinv_huY * hbar;
  if ((huY * t - hbar).norm() > 1e-8 * (1.0 + hbar.norm()))
    throw SingularConstraintBlock(
        "stagewise bias inconsistent with rank-deficient hu", stage);

  k = fact.proj * hbar;
  K = fact.proj * hx;
  if (nz > 0) {
    k += Z * fact.qzz_llt.solve(Vector(Z.transpose() * Qu));
    K += Z * fact.qzz_llt.solve(Matrix(Z.transpose() * Qux));
  }

  // Minimum-norm multipliers: gamma = huY G^{-1} Y' rhs with G = (huY)'(huY).
  FactorizationCounter::bump();
  fact.schur_llt = Eigen::LLT<Matrix>(Matrix(huY.transpose() * huY));
  gamma_ff = huY * fact.schur_llt.solve(Vector(Y.transpose() * (Quu * k - Qu)));
  gamma_fb =
      huY * fact.schur_llt.solve(Matrix(Y.transpose() * (Quu * K - Qux)));
}

}  // namespace

InversePolicy policy_inverse_schur(const Vector& Qu, const Matrix& Quu,
                                   const Matrix& Qux, const Matrix& hx,
                                   const Matrix& hu, const Vector& hbar) {
  StageFactorization fact;
  InversePolicy pol;
  solve_stage(Qu, Quu, Qux, hx, hu, hbar, Formulation::InverseSchur, 0.0, -1,
              fact, pol.k, pol.K, pol.gamma_ff, pol.gamma_fb);
  return pol;
}

InversePolicy policy_inverse_nullspace(const Vector& Qu, const Matrix& Quu,
                                       const Matrix& Qux, const Matrix& hx,
                                       const Matrix& hu, const Vector& hbar,
                                       double rank_tol,
                                       saddle::NullRangeBases* bases_out) {
  StageFactorization fact;
  InversePolicy pol;
  solve_stage(Qu, Quu, Qux, hx, hu, hbar, Formulation::InverseNullspace,
              rank_tol, -1, fact, pol.k, pol.K, pol.gamma_ff, pol.gamma_fb);
  if (bases_out) *bases_out = fact.hu_bases;
  return pol;
}

std::pair<HatPolicy, HatValueModel> backward_pass_hat(
    const ocp::LQApproximation& lq, double reg, Formulation formulation,
    double rank_tol) {
  if (reg < 0.0) throw DimensionMismatch("regularization must be >= 0");
  const int N = lq.N();

  HatPolicy pol;
  pol.formulation = formulation;
  pol.k.resize(N);
  pol.K.resize(N);
  pol.gamma_ff.resize(N);
  pol.gamma_fb.resize(N);
  pol.fact.resize(N);

  HatValueModel val;
  val.Vxx.resize(N + 1);
  val.Vx.resize(N + 1);
  val.dv1.resize(N);
  val.dv2.resize(N);
  val.Vx1.resize(N);
  val.Vx2.resize(N);

  val.Vxx[N] = lq.lxxN;
  val.Vx[N] = lq.lxN;

  for (int k = N - 1; k >= 0; --k) {
    const auto& s = lq.stages[k];
    const Matrix& Vxx1 = val.Vxx[k + 1];
    const Vector vx_plus = val.Vx[k + 1] + Vxx1 * s.fgap;

    const Matrix VF = Vxx1 * s.fu;
    const Matrix Qxx = s.lxx + s.fx.transpose() * Vxx1 * s.fx;
    const Matrix Qxu = s.lxu + s.fx.transpose() * VF;
    Matrix Quu = s.luu + s.fu.transpose() * VF;
    Quu.diagonal().array() += reg;
    const Vector Qx = s.lx + s.fx.transpose() * vx_plus;
    const Vector Qu = s.lu + s.fu.transpose() * vx_plus;
    const Matrix Qux = Qxu.transpose();

    solve_stage(Qu, Quu, Qux, s.hx, s.hu, s.hgap, formulation, rank_tol, k,
                pol.fact[k], pol.k[k], pol.K[k], pol.gamma_ff[k],
                pol.gamma_fb[k]);

    const Vector& kk = pol.k[k];
    const Matrix& Kk = pol.K[k];
    if (s.n_h() == 0 && formulation == Formulation::Forward) {
      val.dv1[k] = kk.dot(Qu);
      val.Vx1[k] = Vector::Zero(s.n_x());
      val.Vxx[k] = Qxx - Qxu * Kk;
    } else {
      val.dv1[k] = kk.dot(Quu * kk);
      val.Vx1[k] = Kk.transpose() * (Quu * kk) - Qxu * kk;
      val.Vxx[k] = Qxx - Qxu * Kk - Kk.transpose() * Qux +
                   Kk.transpose() * Quu * Kk;
    }
    val.dv2[k] = -kk.dot(Qu);
    val.Vx2[k] = Qx - Kk.transpose() * Qu;
    val.Vxx[k] = 0.5 * (val.Vxx[k] + val.Vxx[k].transpose()).eval();
    val.Vx[k] = val.Vx1[k] + val.Vx2[k];
  }
  pol.factorizations_retained = true;
  return {std::move(pol), std::move(val)};
}

HatDirection rollout_hat(const ocp::LQApproximation& lq, const HatPolicy& pol,
                         const HatValueModel& val) {
  const int N = lq.N();
  if (static_cast<int>(pol.k.size()) != N)
    throw DimensionMismatch("policy does not cover the horizon");

  HatDirection dir;
  dir.dx.resize(N + 1);
  dir.du.resize(N);
  dir.dgamma.resize(N);
  dir.dxi.resize(N + 1);
  dir.dx[0] = lq.f0gap;

  dir.dxi[0] = val.Vx[0] + val.Vxx[0] * dir.dx[0];
  double adw = lq.f0gap.dot(dir.dxi[0]);
  for (int k = 0; k < N; ++k) {
    const auto& s = lq.stages[k];
    dir.du[k] = -pol.k[k] - pol.K[k] * dir.dx[k];
    dir.dgamma[k] = s.n_h() > 0
                        ? Vector(pol.gamma_ff[k] + pol.gamma_fb[k] * dir.dx[k])
                        : Vector(0);
    dir.dx[k + 1] = s.fx * dir.dx[k] + s.fu * dir.du[k] + s.fgap;
    dir.dxi[k + 1] = val.Vx[k + 1] + val.Vxx[k + 1] * dir.dx[k + 1];
    adw += s.lx.dot(dir.dx[k]) + s.lu.dot(dir.du[k]);
    if (s.n_h() > 0) adw += s.hgap.dot(dir.dgamma[k]);
    adw += s.fgap.dot(dir.dxi[k + 1]);
  }
  adw += lq.lxN.dot(dir.dx[N]);
  dir.a_dot_w = -adw;
  return dir;
}

}  // namespace tddp::riccati
