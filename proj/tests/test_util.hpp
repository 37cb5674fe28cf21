#ifndef TDDP_TEST_UTIL_HPP
#define TDDP_TEST_UTIL_HPP

#include <random>

#include "tddp/direction.hpp"
#include "tddp/ocp.hpp"
#include "tddp/riccati.hpp"
#include "tddp/types.hpp"

namespace tddp::testutil {

inline Matrix random_matrix(std::mt19937& rng, Eigen::Index rows,
                            Eigen::Index cols) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = dist(rng);
  return M;
}

inline Vector random_vector(std::mt19937& rng, Eigen::Index n) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = dist(rng);
  return v;
}

inline Matrix random_spd(std::mt19937& rng, Eigen::Index n,
                         double shift = 0.5) {
  const Matrix M = random_matrix(rng, n, n);
  return M * M.transpose() + shift * Matrix::Identity(n, n);
}

// Projector onto the column span; lets tests compare subspaces without
// depending on basis orientation.
inline Matrix projector(const Matrix& basis) {
  if (basis.cols() == 0) return Matrix::Zero(basis.rows(), basis.rows());
  return basis * (basis.transpose() * basis).ldlt().solve(
                     Matrix(basis.transpose()));
}

struct LqShape {
  int N = 5;
  Eigen::Index nx = 4, nu = 2, nh = 0, nr = 2;
  bool duplicate_h = false;  // stack hu rows twice (rank-deficient)
  bool duplicate_r = false;  // stack rx rows twice (rank-deficient)
};

/// Random LQ data with PD cost blocks; gaps and gradients nonzero.
inline ocp::LQApproximation random_lq(std::mt19937& rng, const LqShape& sh) {
  ocp::LQApproximation lq;
  lq.stages.resize(sh.N);
  lq.f0gap = random_vector(rng, sh.nx);
  for (auto& s : lq.stages) {
    s.lxx = random_spd(rng, sh.nx, 1.0);
    s.luu = random_spd(rng, sh.nu, 1.0);
    s.lxu = 0.1 * random_matrix(rng, sh.nx, sh.nu);
    s.lx = random_vector(rng, sh.nx);
    s.lu = random_vector(rng, sh.nu);
    s.fx = 0.5 * random_matrix(rng, sh.nx, sh.nx);
    s.fu = random_matrix(rng, sh.nx, sh.nu);
    s.fgap = random_vector(rng, sh.nx);
    if (sh.nh > 0) {
      Matrix hx = 0.3 * random_matrix(rng, sh.nh, sh.nx);
      Matrix hu = random_matrix(rng, sh.nh, sh.nu);
      Vector hb = random_vector(rng, sh.nh);
      if (sh.duplicate_h) {
        const auto stack2 = [](const Matrix& M) {
          Matrix S(2 * M.rows(), M.cols());
          S << M, M;
          return S;
        };
        hx = stack2(hx);
        hu = stack2(hu);
        Vector hb2(2 * hb.size());
        hb2 << hb, hb;
        hb = hb2;
      }
      s.hx = hx;
      s.hu = hu;
      s.hgap = hb;
    } else {
      s.hx.resize(0, sh.nx);
      s.hu.resize(0, sh.nu);
      s.hgap.resize(0);
    }
  }
  lq.lxN = random_vector(rng, sh.nx);
  lq.lxxN = random_spd(rng, sh.nx, 1.0);
  if (sh.nr > 0) {
    Matrix rx = random_matrix(rng, sh.nr, sh.nx);
    Vector rb = random_vector(rng, sh.nr);
    if (sh.duplicate_r) {
      Matrix rx2(2 * rx.rows(), rx.cols());
      rx2 << rx, rx;
      rx = rx2;
      Vector rb2(2 * rb.size());
      rb2 << rb, rb;
      rb = rb2;
    }
    lq.rx = rx;
    lq.rgap = rb;
  } else {
    lq.rx.resize(0, sh.nx);
    lq.rgap.resize(0);
  }
  return lq;
}

/// Stacks a direction into the dense-KKT variable order.
inline Vector stack_primal(const ocp::LQApproximation& lq,
                           const std::vector<Vector>& dx,
                           const std::vector<Vector>& du,
                           const std::vector<Vector>& dgamma,
                           const std::vector<Vector>& dxi) {
  const ocp::KktLayout L(lq);
  Vector w = Vector::Zero(L.size());
  for (int k = 0; k < lq.N(); ++k) {
    const auto& s = lq.stages[k];
    w.segment(L.xi(k), s.n_x()) = dxi[k];
    w.segment(L.x(k), s.n_x()) = dx[k];
    w.segment(L.u(k), s.n_u()) = du[k];
    if (s.n_h() > 0) w.segment(L.g(k), s.n_h()) = dgamma[k];
  }
  w.segment(L.xi(lq.N()), lq.n_x()) = dxi[lq.N()];
  w.segment(L.x(lq.N()), lq.n_x()) = dx[lq.N()];
  return w;
}

/// Relative residuals of (w, y) in the saddle system: stationarity and
/// constraint rows.
inline std::pair<double, double> saddle_residual(
    const saddle::SaddleSystem& sys, const Vector& w, const Vector& y) {
  Vector r1 = sys.A * w - sys.a;
  if (sys.n_b() > 0) r1 += sys.B.transpose() * y;
  const double s1 = r1.cwiseAbs().maxCoeff() / (1.0 + sys.a.norm());
  double s2 = 0.0;
  if (sys.n_b() > 0)
    s2 = (sys.B * w - sys.b).cwiseAbs().maxCoeff() / (1.0 + sys.b.norm());
  return {s1, s2};
}

/// Full Riccati pipeline: hat sweep, check sweep, endpoint multiplier,
/// combination, expected-improvement model.
inline direction::SearchDirection pipeline(
    const ocp::LQApproximation& lq, riccati::Formulation form,
    bool nullspace_endpoint = false,
    saddle::RankRevealing backend = saddle::RankRevealing::QrColPiv,
    double reg = 0.0) {
  const double rtol = default_rank_tol(lq.n_x(), lq.n_x());
  auto [pol, val] = riccati::backward_pass_hat(lq, reg, form, rtol);
  const auto hat = riccati::rollout_hat(lq, pol, val);
  auto [cpol, cval] = riccati::backward_pass_check(lq, pol);
  const auto chk = riccati::rollout_check(lq, cpol, val, cval);
  Vector beta(0);
  if (lq.n_r() > 0) {
    if (nullspace_endpoint)
      beta = direction::endpoint_multiplier_nullspace(
          lq.rx, lq.rgap, hat.dx.back(), chk.dX.back(),
          default_rank_tol(lq.n_r(), lq.n_r()), backend);
    else
      beta = direction::endpoint_multiplier_schur(lq.rx, lq.rgap,
                                                  hat.dx.back(), chk.dX.back());
  }
  auto dir = direction::combine(hat, chk, beta);
  direction::attach_expected_improvement(dir, hat, lq);
  return dir;
}

}  // namespace tddp::testutil

#endif
