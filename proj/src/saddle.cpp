#include "tddp/saddle.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>

namespace tddp::saddle {

void SaddleSystem::validate() const {
  if (A.rows() != A.cols()) throw DimensionMismatch("A must be square");
  if (a.size() != A.rows()) throw DimensionMismatch("len(a) != dim(A)");
  if (B.rows() != b.size()) throw DimensionMismatch("rows(B) != len(b)");
  if (B.rows() > 0 && B.cols() != A.cols())
    throw DimensionMismatch("cols(B) != dim(A)");
  const double scale = A.cwiseAbs().maxCoeff();
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1.0))
    throw DimensionMismatch("A is not symmetric");
}

SaddleSolution solve_kkt_dense(const SaddleSystem& sys) {
  sys.validate();
  const Eigen::Index nw = sys.n_w(), nb = sys.n_b();

  Matrix K = Matrix::Zero(nw + nb, nw + nb);
  K.topLeftCorner(nw, nw) = sys.A;
  if (nb > 0) {
    K.topRightCorner(nw, nb) = sys.B.transpose();
    K.bottomLeftCorner(nb, nw) = sys.B;
  }
  Vector rhs(nw + nb);
  rhs.head(nw) = sys.a;
  rhs.tail(nb) = sys.b;

  Eigen::FullPivLU<Matrix> lu(K);
  lu.setThreshold(default_rank_tol(K.rows(), K.cols()));
  if (lu.rank() < K.rows())
    throw SingularSystem("KKT matrix is rank deficient");
  const Vector sol = lu.solve(rhs);

  Eigen::FullPivLU<Matrix> luA(sys.A);
  luA.setThreshold(default_rank_tol(nw, nw));
  if (luA.rank() < nw) throw SingularSystem("A block is rank deficient");

  SaddleSolution out;
  out.w = sol.head(nw);
  out.y = sol.tail(nb);
  out.w_hat = luA.solve(sys.a);
  out.W_check = nb > 0 ? Matrix(luA.solve(sys.B.transpose()))
                       : Matrix(nw, 0);
  return out;
}

namespace {

Eigen::LLT<Matrix> chol_or_throw(const Matrix& A, const char* what) {
  Eigen::LLT<Matrix> llt(A);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite(what);
  return llt;
}

}  // namespace

SaddleSolution solve_schur(const SaddleSystem& sys) {
  sys.validate();
  const auto llt = chol_or_throw(sys.A, "A is not positive definite");

  SaddleSolution out;
  out.w_hat = llt.solve(sys.a);
  out.W_check = sys.n_b() > 0 ? Matrix(llt.solve(sys.B.transpose()))
                              : Matrix(sys.n_w(), 0);
  if (sys.n_b() == 0) {
    out.w = out.w_hat;
    out.y.resize(0);
    return out;
  }

  const Matrix S = sys.B * out.W_check;
  Eigen::FullPivLU<Matrix> luS(S);
  luS.setThreshold(default_rank_tol(S.rows(), S.cols()));
  if (luS.rank() < S.rows())
    throw SingularSchur("Schur complement is singular (B rank deficient?)");
  out.y = -luS.solve(sys.b - sys.B * out.w_hat);
  out.w = out.w_hat - out.W_check * out.y;
  return out;
}

NullRangeBases nullspace_bases(const Matrix& M, double rank_tol,
                               RankRevealing backend) {
  if (M.size() == 0) throw DimensionMismatch("nullspace_bases: empty matrix");
  if (rank_tol <= 0.0) throw DimensionMismatch("rank_tol must be positive");
  const Eigen::Index n = M.cols();

  NullRangeBases out;
  if (backend == RankRevealing::QrColPiv) {
    // QR of M' exposes the row space of M in the leading Q columns and its
    // orthogonal complement (= nullspace of M) in the trailing ones.
    Eigen::ColPivHouseholderQR<Matrix> qr(M.transpose());
    qr.setThreshold(rank_tol);
    out.rank = qr.rank();
    const Matrix Q = qr.householderQ() * Matrix::Identity(n, n);
    out.Y = Q.leftCols(out.rank);
    out.Z = Q.rightCols(n - out.rank);
  } else {
    Eigen::FullPivLU<Matrix> lu(M);
    lu.setThreshold(rank_tol);
    out.rank = lu.rank();
    out.Z = out.rank < n ? Matrix(lu.kernel()) : Matrix(n, 0);
    // Orthonormal row-space basis; the LU only provides rank and kernel.
    Eigen::ColPivHouseholderQR<Matrix> qr(Matrix(M.transpose()));
    qr.setThreshold(rank_tol);
    const Matrix Q = qr.householderQ() * Matrix::Identity(n, n);
    out.Y = Q.leftCols(out.rank);
  }
  return out;
}

SaddleSolution solve_nullspace(const SaddleSystem& sys, double rank_tol,
                               RankRevealing backend) {
  sys.validate();
  const auto llt = chol_or_throw(sys.A, "A is not positive definite");

  SaddleSolution out;
  out.w_hat = llt.solve(sys.a);
  out.W_check = sys.n_b() > 0 ? Matrix(llt.solve(sys.B.transpose()))
                              : Matrix(sys.n_w(), 0);
  if (sys.n_b() == 0) {
    out.w = out.w_hat;
    out.y.resize(0);
    return out;
  }

  // null(B A^{-1} B') = null(B') since A is SPD, so the bases of the Schur
  // complement can be read off B' without forming it.
  const NullRangeBases bases =
      nullspace_bases(Matrix(sys.B.transpose()), rank_tol, backend);
  const Matrix BY = bases.Y.transpose() * sys.B;       // n_y x n_w
  const Vector bY = bases.Y.transpose() * sys.b;
  const Matrix SY = BY * llt.solve(BY.transpose());    // n_y x n_y
  Eigen::FullPivLU<Matrix> luS(SY);
  luS.setThreshold(default_rank_tol(SY.rows(), SY.cols()));
  if (luS.rank() < SY.rows())
    throw SingularSchur("range-space Schur complement is singular");
  out.y = -bases.Y * luS.solve(bY - BY * out.w_hat);
  out.w = out.w_hat - out.W_check * out.y;

  const Vector resid = sys.b - sys.B * out.w;
  const double proj =
      bases.Z.cols() > 0 ? (bases.Z.transpose() * resid).cwiseAbs().maxCoeff()
                         : 0.0;
  if (proj > 1e-8 * (1.0 + sys.b.norm()))
    throw InconsistentConstraint("constraint right-hand side not in range(B)");
  return out;
}

}  // namespace tddp::saddle
