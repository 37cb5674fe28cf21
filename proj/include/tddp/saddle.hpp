#ifndef TDDP_SADDLE_HPP
#define TDDP_SADDLE_HPP

#include "tddp/types.hpp"

namespace tddp::saddle {

/// Equality-constrained quadratic program
///   min_w 1/2 w'Aw - w'a  s.t.  Bw = b
/// in saddle-point form. A is symmetric; B is typically wide (n_b << n_w).
struct SaddleSystem {
  Matrix A;
  Vector a;
  Matrix B;
  Vector b;

  Eigen::Index n_w() const { return a.size(); }
  Eigen::Index n_b() const { return b.size(); }

  /// Throws DimensionMismatch / InconsistentConstraint on malformed input.
  void validate() const;
};

struct SaddleSolution {
  Vector w;        // primal
  Vector y;        // constraint multiplier
  Vector w_hat;    // A^{-1} a
  Matrix W_check;  // A^{-1} B'
};

/// Nullspace basis Z and orthonormal range basis Y of a matrix M, with
/// M Z ~ 0 and [Y Z] spanning the column dimension of M.
struct NullRangeBases {
  Matrix Z;
  Matrix Y;
  Eigen::Index rank = 0;
};

enum class RankRevealing { QrColPiv, LuFullPiv };

/// Direct factorization of the full (n_w + n_b) KKT matrix.
SaddleSolution solve_kkt_dense(const SaddleSystem& sys);

/// Schur-complement resolution: y = -S^{-1}(b - B A^{-1} a), S = B A^{-1} B'.
/// Requires A positive definite and B full row rank.
SaddleSolution solve_schur(const SaddleSystem& sys);

/// Null/range bases of M with numerical rank determined by
/// rank_tol * (largest pivot magnitude).
NullRangeBases nullspace_bases(const Matrix& M, double rank_tol,
                               RankRevealing backend = RankRevealing::QrColPiv);

/// Rangespace resolution of the multiplier; tolerates rank-deficient B as
/// long as b is consistent with its range.
SaddleSolution solve_nullspace(const SaddleSystem& sys, double rank_tol,
                               RankRevealing backend = RankRevealing::QrColPiv);

}  // namespace tddp::saddle

#endif
