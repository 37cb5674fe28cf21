#include "tddp/ocp.hpp"

namespace tddp::ocp {

double Iterate::dyn_gap_l1() const {
  double s = 0.0;
  for (const auto& g : fgap) s += g.lpNorm<1>();
  return s;
}

double Iterate::stage_gap_l1() const {
  double s = 0.0;
  for (const auto& g : hgap) s += g.lpNorm<1>();
  return s;
}

KktLayout::KktLayout(const LQApproximation& lq) {
  const int N = lq.N();
  xi_off.resize(N + 1);
  x_off.resize(N + 1);
  u_off.resize(N);
  g_off.resize(N);
  Eigen::Index off = 0;
  for (int k = 0; k < N; ++k) {
    const auto& s = lq.stages[k];
    xi_off[k] = off;
    off += s.n_x();
    x_off[k] = off;
    off += s.n_x();
    u_off[k] = off;
    off += s.n_u();
    g_off[k] = off;
    off += s.n_h();
  }
  xi_off[N] = off;
  off += lq.n_x();
  x_off[N] = off;
  off += lq.n_x();
  total = off;
}

Iterate evaluate(const Problem& problem, const std::vector<Vector>& xs,
                 const std::vector<Vector>& us) {
  const int N = problem.N;
  if (static_cast<int>(xs.size()) != N + 1 ||
      static_cast<int>(us.size()) != N)
    throw DimensionMismatch("trajectory length does not match horizon");
  for (int k = 0; k <= N; ++k)
    if (xs[k].size() != problem.n_x())
      throw DimensionMismatch("state dimension mismatch at stage " +
                              std::to_string(k));
  for (int k = 0; k < N; ++k)
    if (us[k].size() != problem.stages[k].n_u)
      throw DimensionMismatch("control dimension mismatch at stage " +
                              std::to_string(k));

  Iterate it;
  it.xs = xs;
  it.us = us;
  it.xi.assign(N + 1, Vector::Zero(problem.n_x()));
  it.gamma.resize(N);
  for (int k = 0; k < N; ++k)
    it.gamma[k] = Vector::Zero(problem.stages[k].n_h);
  it.beta = Vector::Zero(problem.n_r());
  reevaluate(problem, it);
  return it;
}

void reevaluate(const Problem& problem, Iterate& it) {
  const int N = problem.N;
  it.fgap.resize(N + 1);
  it.hgap.resize(N);
  it.fgap[0] = problem.diff(problem.x0, it.xs[0]);
  it.cost = 0.0;
  for (int k = 0; k < N; ++k) {
    const auto& st = problem.stages[k];
    it.cost += st.cost(it.xs[k], it.us[k]);
    it.fgap[k + 1] = problem.diff(st.dynamics(it.xs[k], it.us[k]), it.xs[k + 1]);
    it.hgap[k] = st.n_h > 0 ? st.constraint(it.xs[k], it.us[k]) : Vector(0);
  }
  it.cost += problem.terminal_cost(it.xs[N]);
  it.rgap = problem.n_r() > 0 ? problem.endpoint.value(it.xs[N]) : Vector(0);
}

LQApproximation linearize(const Problem& problem, const Iterate& it,
                          HessianMode mode) {
  const int N = problem.N;
  LQApproximation lq;
  lq.stages.resize(N);
  lq.f0gap = it.fgap[0];
  for (int k = 0; k < N; ++k) {
    const auto& st = problem.stages[k];
    const Vector& x = it.xs[k];
    const Vector& u = it.us[k];
    auto& s = lq.stages[k];

    CostDerivs cd;
    Jacobians fj, hj;
    try {
      cd = st.cost_derivs(x, u);
      fj = st.dynamics_jac(x, u);
      if (st.n_h > 0) hj = st.constraint_jac(x, u);
    } catch (const std::exception& e) {
      throw CallbackFailure(std::string("stage callback failed: ") + e.what(),
                            k);
    }
    s.lx = cd.lx;
    s.lu = cd.lu;
    s.lxx = cd.lxx;
    s.lxu = cd.lxu;
    s.luu = cd.luu;
    s.fx = fj.jx;
    s.fu = fj.ju;
    if (st.n_h > 0) {
      s.hx = hj.jx;
      s.hu = hj.ju;
      s.hgap = it.hgap[k];
    } else {
      s.hx.resize(0, st.n_x);
      s.hu.resize(0, st.n_u);
      s.hgap.resize(0);
    }
    s.fgap = it.fgap[k + 1];

    if (mode == HessianMode::ExactCallback) {
      // Tensor contractions weighted by the current multiplier estimates;
      // the dynamics weight follows the value-gradient interpretation of
      // the next-stage multiplier.
      if (st.dynamics_hess) {
        const HessContraction hc = st.dynamics_hess(x, u, it.xi[k + 1]);
        s.lxx += hc.xx;
        s.lxu += hc.xu;
        s.luu += hc.uu;
      }
      if (st.constraint_hess && st.n_h > 0) {
        const HessContraction hc = st.constraint_hess(x, u, it.gamma[k]);
        s.lxx += hc.xx;
        s.lxu += hc.xu;
        s.luu += hc.uu;
      }
    }
    s.lxx = 0.5 * (s.lxx + s.lxx.transpose()).eval();
    s.luu = 0.5 * (s.luu + s.luu.transpose()).eval();
  }
  lq.lxN = problem.terminal_grad(it.xs[N]);
  lq.lxxN = problem.terminal_hess(it.xs[N]);
  lq.lxxN = 0.5 * (lq.lxxN + lq.lxxN.transpose()).eval();
  if (problem.n_r() > 0) {
    lq.rx = problem.endpoint.jacobian(it.xs[N]);
    lq.rgap = it.rgap;
  } else {
    lq.rx.resize(0, problem.n_x());
    lq.rgap.resize(0);
  }
  return lq;
}

saddle::SaddleSystem assemble_dense_kkt(const LQApproximation& lq) {
  const int N = lq.N();
  const KktLayout L(lq);
  const Eigen::Index n = L.size();

  saddle::SaddleSystem sys;
  sys.A = Matrix::Zero(n, n);
  sys.a = Vector::Zero(n);

  auto put_sym = [&](Eigen::Index r, Eigen::Index c, const Matrix& M) {
    sys.A.block(r, c, M.rows(), M.cols()) = M;
    if (r != c) sys.A.block(c, r, M.cols(), M.rows()) = M.transpose();
  };

  for (int k = 0; k < N; ++k) {
    const auto& s = lq.stages[k];
    const Eigen::Index nx = s.n_x();
    // Constraint row paired with xi_k: -dx_k (k = 0) or
    // fx dx_{k-1} + fu du_{k-1} - dx_k (handled from stage k-1 below).
    put_sym(L.xi(k), L.x(k), Matrix(-Matrix::Identity(nx, nx)));
    put_sym(L.x(k), L.x(k), s.lxx);
    put_sym(L.x(k), L.u(k), s.lxu);
    put_sym(L.u(k), L.u(k), s.luu);
    if (s.n_h() > 0) {
      put_sym(L.g(k), L.x(k), s.hx);
      put_sym(L.g(k), L.u(k), s.hu);
    }
    put_sym(L.xi(k + 1), L.x(k), s.fx);
    put_sym(L.xi(k + 1), L.u(k), s.fu);

    sys.a.segment(L.xi(k), nx) = k == 0 ? -lq.f0gap : -lq.stages[k - 1].fgap;
    sys.a.segment(L.x(k), nx) = -s.lx;
    sys.a.segment(L.u(k), s.n_u()) = -s.lu;
    if (s.n_h() > 0) sys.a.segment(L.g(k), s.n_h()) = -s.hgap;
  }
  const Eigen::Index nx = lq.n_x();
  put_sym(L.xi(N), L.x(N), Matrix(-Matrix::Identity(nx, nx)));
  put_sym(L.x(N), L.x(N), lq.lxxN);
  sys.a.segment(L.xi(N), nx) = -lq.stages[N - 1].fgap;
  sys.a.segment(L.x(N), nx) = -lq.lxN;

  sys.B = Matrix::Zero(lq.n_r(), n);
  if (lq.n_r() > 0) sys.B.block(0, L.x(N), lq.n_r(), nx) = lq.rx;
  sys.b = -lq.rgap;
  return sys;
}

namespace {

double rel_err(const Matrix& got, const Matrix& want) {
  const double scale = std::max(1.0, want.cwiseAbs().maxCoeff());
  return (got - want).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

double derivative_error(const Problem& problem, const std::vector<Vector>& xs,
                        const std::vector<Vector>& us) {
  double worst = 0.0;
  auto fd_jac = [](auto&& fn, const Vector& at, Eigen::Index out_dim) {
    Matrix J(out_dim, at.size());
    for (Eigen::Index i = 0; i < at.size(); ++i) {
      const double h = 1e-6 * (1.0 + at.cwiseAbs().maxCoeff());
      Vector p = at, m = at;
      p(i) += h;
      m(i) -= h;
      J.col(i) = (fn(p) - fn(m)) / (2.0 * h);
    }
    return J;
  };

  for (int k = 0; k < problem.N; ++k) {
    const auto& st = problem.stages[k];
    const Vector& x = xs[k];
    const Vector& u = us[k];
    const CostDerivs cd = st.cost_derivs(x, u);
    const Jacobians fj = st.dynamics_jac(x, u);

    worst = std::max(
        worst, rel_err(fd_jac([&](const Vector& xx) {
                         return Vector::Constant(1, st.cost(xx, u));
                       }, x, 1).transpose(), cd.lx));
    worst = std::max(
        worst, rel_err(fd_jac([&](const Vector& uu) {
                         return Vector::Constant(1, st.cost(x, uu));
                       }, u, 1).transpose(), cd.lu));
    worst = std::max(worst,
                     rel_err(fd_jac([&](const Vector& xx) {
                               return st.dynamics(xx, u);
                             }, x, problem.n_x()), fj.jx));
    worst = std::max(worst,
                     rel_err(fd_jac([&](const Vector& uu) {
                               return st.dynamics(x, uu);
                             }, u, problem.n_x()), fj.ju));
    if (st.n_h > 0) {
      const Jacobians hj = st.constraint_jac(x, u);
      worst = std::max(worst, rel_err(fd_jac([&](const Vector& xx) {
                                        return st.constraint(xx, u);
                                      }, x, st.n_h), hj.jx));
      worst = std::max(worst, rel_err(fd_jac([&](const Vector& uu) {
                                        return st.constraint(x, uu);
                                      }, u, st.n_h), hj.ju));
    }
  }
  const Vector& xN = xs[problem.N];
  worst = std::max(
      worst, rel_err(fd_jac([&](const Vector& xx) {
                       return Vector::Constant(1, problem.terminal_cost(xx));
                     }, xN, 1).transpose(), problem.terminal_grad(xN)));
  if (problem.n_r() > 0)
    worst = std::max(worst, rel_err(fd_jac([&](const Vector& xx) {
                                      return problem.endpoint.value(xx);
                                    }, xN, problem.n_r()),
                                    problem.endpoint.jacobian(xN)));
  return worst;
}

}  // namespace tddp::ocp
