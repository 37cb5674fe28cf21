#ifndef TDDP_RICCATI_HPP
#define TDDP_RICCATI_HPP

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <memory>

#include "tddp/ocp.hpp"
#include "tddp/saddle.hpp"

namespace tddp::riccati {

enum class Formulation { Forward, InverseSchur, InverseNullspace };

/// Per-stage factorizations retained by the endpoint-independent sweep.
/// The endpoint-dependent sweep only performs solves against these.
struct StageFactorization {
  Eigen::LLT<Matrix> quu_llt;
  Matrix qux;
  // Inverse-Schur extras.
  Matrix quu_inv_huT;                 // Q_uu^{-1} h_u'
  Eigen::LLT<Matrix> schur_llt;       // h_u Q_uu^{-1} h_u'
  // Inverse-nullspace extras (the three retained decompositions).
  saddle::NullRangeBases hu_bases;
  Eigen::LLT<Matrix> qzz_llt;         // Z' Q_uu Z
  Eigen::ColPivHouseholderQR<Matrix> huY_qr;  // h_u Y
  Matrix proj;  // (I - Z Q_zz^{-1} Z' Q_uu) Y (h_u Y)^+, bias-to-control map
  Matrix quu;   // retained for value updates
};

struct HatPolicy {
  Formulation formulation = Formulation::Forward;
  std::vector<Vector> k;          // feedforward, N
  std::vector<Matrix> K;          // feedback, N
  std::vector<Vector> gamma_ff;   // stagewise multiplier feedforward
  std::vector<Matrix> gamma_fb;   // stagewise multiplier feedback
  std::vector<StageFactorization> fact;
  bool factorizations_retained = false;
};

struct HatValueModel {
  std::vector<Matrix> Vxx;  // N+1
  std::vector<Vector> Vx;   // N+1
  std::vector<double> dv1, dv2;     // per-stage scalar terms
  std::vector<Vector> Vx1, Vx2;     // per-stage vector terms
};

struct HatDirection {
  std::vector<Vector> dx;      // N+1
  std::vector<Vector> du;      // N
  std::vector<Vector> dgamma;  // N, next-value stagewise multipliers
  std::vector<Vector> dxi;     // N+1, next-value dynamics multipliers
  double a_dot_w = 0.0;        // inner product of the KKT vector with w_hat
};

struct CheckPolicy {
  std::vector<Matrix> k_theta;        // n_u x n_r feedforward, N
  std::vector<Matrix> K;              // feedback shared with HatPolicy
  std::vector<Matrix> gamma_theta;    // n_h x n_r multiplier feedforward
  std::vector<Matrix> gamma_fb;       // multiplier feedback shared with HatPolicy
};

struct CheckValueModel {
  std::vector<Matrix> Vxtheta;   // N+1, terminal seed -rx'
  std::vector<Matrix> dv1, dv2;  // per-stage n_r x n_r terms
  std::vector<Matrix> Vxtheta1, Vxtheta2;
};

struct CheckDirection {
  std::vector<Matrix> dX;      // N+1, n_x x n_r
  std::vector<Matrix> dU;      // N
  std::vector<Matrix> dGamma;  // N
  std::vector<Matrix> dXi;     // N+1
};

/// Classical unconstrained DDP policy: k = Quu^{-1} Qu, K = Quu^{-1} Qux.
std::pair<Vector, Matrix> policy_forward(const Vector& Qu, const Matrix& Quu,
                                         const Matrix& Qux);

struct InversePolicy {
  Vector k;
  Matrix K;
  Vector gamma_ff;
  Matrix gamma_fb;
};

/// Schur-complement resolution of the stagewise-constrained policy.
InversePolicy policy_inverse_schur(const Vector& Qu, const Matrix& Quu,
                                   const Matrix& Qux, const Matrix& hx,
                                   const Matrix& hu, const Vector& hbar);

/// Nullspace resolution; tolerates rank-deficient hu with consistent hbar.
InversePolicy policy_inverse_nullspace(const Vector& Qu, const Matrix& Quu,
                                       const Matrix& Qux, const Matrix& hx,
                                       const Matrix& hu, const Vector& hbar,
                                       double rank_tol,
                                       saddle::NullRangeBases* bases_out = nullptr);

std::pair<HatPolicy, HatValueModel> backward_pass_hat(
    const ocp::LQApproximation& lq, double reg, Formulation formulation,
    double rank_tol);

HatDirection rollout_hat(const ocp::LQApproximation& lq, const HatPolicy& pol,
                         const HatValueModel& val);

std::pair<CheckPolicy, CheckValueModel> backward_pass_check(
    const ocp::LQApproximation& lq, const HatPolicy& hat);

CheckDirection rollout_check(const ocp::LQApproximation& lq,
                             const CheckPolicy& pol,
                             const HatValueModel& hat_val,
                             const CheckValueModel& chk_val);

}  // namespace tddp::riccati

#endif
