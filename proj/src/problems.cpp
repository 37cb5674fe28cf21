#include "tddp/problems.hpp"

#include <cmath>
#include <memory>
#include <random>

namespace tddp::problems {

namespace {

constexpr double kPi = 3.14159265358979323846;

double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a < 0) a += 2.0 * kPi;
  return a - kPi;
}

std::function<Vector(const Vector&, const Vector&)> make_state_diff(
    std::vector<int> angle_idx) {
  return [angle_idx = std::move(angle_idx)](const Vector& a, const Vector& b) {
    Vector d = a - b;
    for (int i : angle_idx) d(i) = wrap_angle(d(i));
    return d;
  };
}

// Continuous-time model split as x = (q, v), xdot = (v, accel(x, u)).
struct SecondOrder {
  Eigen::Index n_q = 0, n_u = 0;
  std::function<Vector(const Vector&, const Vector&)> accel;
  // Rows are accelerations; jx is n_q x 2n_q, ju is n_q x n_u.
  std::function<ocp::Jacobians(const Vector&, const Vector&)> accel_jac;

  Vector full(const Vector& x, const Vector& u) const {
    Vector f(2 * n_q);
    f.head(n_q) = x.tail(n_q);
    f.tail(n_q) = accel(x, u);
    return f;
  }
  ocp::Jacobians full_jac(const Vector& x, const Vector& u) const {
    const ocp::Jacobians aj = accel_jac(x, u);
    ocp::Jacobians j;
    j.jx = Matrix::Zero(2 * n_q, 2 * n_q);
    j.jx.topRightCorner(n_q, n_q).setIdentity();
    j.jx.bottomRows(n_q) = aj.jx;
    j.ju = Matrix::Zero(2 * n_q, n_u);
    j.ju.bottomRows(n_q) = aj.ju;
    return j;
  }
};

Vector step_state(const std::shared_ptr<const SecondOrder>& m, Integrator ig,
                  double dt, const Vector& x, const Vector& u) {
  const Eigen::Index nq = m->n_q;
  switch (ig) {
    case Integrator::SemiImplicitEuler: {
      const Vector a = m->accel(x, u);
      Vector next(2 * nq);
      next.tail(nq) = x.tail(nq) + dt * a;
      next.head(nq) = x.head(nq) + dt * next.tail(nq);
      return next;
    }
    case Integrator::ExplicitEuler:
      return x + dt * m->full(x, u);
    case Integrator::Rk4: {
      const Vector k1 = m->full(x, u);
      const Vector k2 = m->full(x + 0.5 * dt * k1, u);
      const Vector k3 = m->full(x + 0.5 * dt * k2, u);
      const Vector k4 = m->full(x + dt * k3, u);
      return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }
  throw UnknownFamily("unknown integrator");
}

ocp::Jacobians step_jac(const std::shared_ptr<const SecondOrder>& m,
                        Integrator ig, double dt, const Vector& x,
                        const Vector& u) {
  const Eigen::Index nq = m->n_q, nx = 2 * nq;
  switch (ig) {
    case Integrator::SemiImplicitEuler: {
      const ocp::Jacobians aj = m->accel_jac(x, u);
      ocp::Jacobians j;
      j.jx = Matrix::Zero(nx, nx);
      // v' = v + dt a; q' = q + dt v'.
      j.jx.bottomRows(nq) = dt * aj.jx;
      j.jx.bottomRightCorner(nq, nq) += Matrix::Identity(nq, nq);
      j.jx.topRows(nq) = dt * j.jx.bottomRows(nq);
      j.jx.topLeftCorner(nq, nq) += Matrix::Identity(nq, nq);
      j.ju = Matrix::Zero(nx, m->n_u);
      j.ju.bottomRows(nq) = dt * aj.ju;
      j.ju.topRows(nq) = dt * j.ju.bottomRows(nq);
      return j;
    }
    case Integrator::ExplicitEuler: {
      const ocp::Jacobians fj = m->full_jac(x, u);
      return {Matrix::Identity(nx, nx) + dt * fj.jx, Matrix(dt * fj.ju)};
    }
    case Integrator::Rk4: {
      const Vector k1 = m->full(x, u);
      const Vector x2 = x + 0.5 * dt * k1;
      const Vector k2 = m->full(x2, u);
      const Vector x3 = x + 0.5 * dt * k2;
      const Vector k3 = m->full(x3, u);
      const Vector x4 = x + dt * k3;
      const ocp::Jacobians j1 = m->full_jac(x, u);
      const ocp::Jacobians j2 = m->full_jac(x2, u);
      const ocp::Jacobians j3 = m->full_jac(x3, u);
      const ocp::Jacobians j4 = m->full_jac(x4, u);
      const Matrix I = Matrix::Identity(nx, nx);
      const Matrix K1x = j1.jx;
      const Matrix K2x = j2.jx * (I + 0.5 * dt * K1x);
      const Matrix K3x = j3.jx * (I + 0.5 * dt * K2x);
      const Matrix K4x = j4.jx * (I + dt * K3x);
      const Matrix K1u = j1.ju;
      const Matrix K2u = j2.ju + j2.jx * (0.5 * dt * K1u);
      const Matrix K3u = j3.ju + j3.jx * (0.5 * dt * K2u);
      const Matrix K4u = j4.ju + j4.jx * (dt * K3u);
      return {Matrix(I + (dt / 6.0) * (K1x + 2.0 * K2x + 2.0 * K3x + K4x)),
              Matrix((dt / 6.0) * (K1u + 2.0 * K2u + 2.0 * K3u + K4u))};
    }
  }
  throw UnknownFamily("unknown integrator");
}

ocp::StageFunctions make_stage(const std::shared_ptr<const SecondOrder>& model,
                               const ProblemSpec& spec, const Vector& target) {
  ocp::StageFunctions st;
  st.n_x = 2 * model->n_q;
  st.n_u = model->n_u;
  st.n_h = 0;
  const double wx = spec.w_state, wu = spec.w_control;
  st.cost = [wx, wu, target](const Vector& x, const Vector& u) {
    return 0.5 * wx * (x - target).squaredNorm() + 0.5 * wu * u.squaredNorm();
  };
  st.cost_derivs = [wx, wu, target](const Vector& x, const Vector& u) {
    ocp::CostDerivs cd;
    cd.lx = wx * (x - target);
    cd.lu = wu * u;
    cd.lxx = wx * Matrix::Identity(x.size(), x.size());
    cd.luu = wu * Matrix::Identity(u.size(), u.size());
    cd.lxu = Matrix::Zero(x.size(), u.size());
    return cd;
  };
  const Integrator ig = spec.integrator;
  const double dt = spec.dt;
  st.dynamics = [model, ig, dt](const Vector& x, const Vector& u) {
    return step_state(model, ig, dt, x, u);
  };
  st.dynamics_jac = [model, ig, dt](const Vector& x, const Vector& u) {
    return step_jac(model, ig, dt, x, u);
  };
  return st;
}

void attach_endpoint(ocp::Problem& p, const Vector& target, Eigen::Index n_r) {
  const Eigen::Index nx = p.n_x();
  p.endpoint.n_r = n_r;
  auto diff = p.state_diff;
  p.endpoint.value = [target, n_r, diff](const Vector& x) {
    const Vector d = diff ? diff(x, target) : Vector(x - target);
    return Vector(d.head(n_r));
  };
  p.endpoint.jacobian = [n_r, nx](const Vector&) {
    Matrix J = Matrix::Zero(n_r, nx);
    J.leftCols(n_r).setIdentity();
    return J;
  };
}

void attach_zero_terminal(ocp::Problem& p) {
  const Eigen::Index nx = p.n_x();
  p.terminal_cost = [](const Vector&) { return 0.0; };
  p.terminal_grad = [nx](const Vector&) { return Vector::Zero(nx); };
  p.terminal_hess = [nx](const Vector&) { return Matrix::Zero(nx, nx); };
}

ocp::Problem build_lqr(const ProblemSpec& spec) {
  const Eigen::Index nx = spec.nx, nu = spec.nu;
  const Eigen::Index nr = spec.nr < 0 ? nx : spec.nr;
  if (nr > nx) throw UnknownFamily("lqr endpoint rows exceed state size");

  std::mt19937 rng(spec.seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix A = Matrix::Identity(nx, nx);
  Matrix B(nx, nu);
  for (Eigen::Index i = 0; i < nx; ++i)
    for (Eigen::Index j = 0; j < nx; ++j)
      A(i, j) += 0.2 * dist(rng) / std::sqrt(double(nx));
  for (Eigen::Index i = 0; i < nx; ++i)
    for (Eigen::Index j = 0; j < nu; ++j) B(i, j) = dist(rng);

  ocp::Problem p;
  p.N = spec.N;
  p.x0 = spec.x0.size() > 0 ? spec.x0 : Vector(Vector::Ones(nx));
  const Vector target =
      spec.target.size() > 0 ? spec.target : Vector(Vector::Zero(nx));

  ocp::StageFunctions st;
  st.n_x = nx;
  st.n_u = nu;
  const double wx = spec.w_state, wu = spec.w_control;
  st.cost = [wx, wu, target](const Vector& x, const Vector& u) {
    return 0.5 * wx * (x - target).squaredNorm() + 0.5 * wu * u.squaredNorm();
  };
  st.cost_derivs = [wx, wu, target](const Vector& x, const Vector& u) {
    ocp::CostDerivs cd;
    cd.lx = wx * (x - target);
    cd.lu = wu * u;
    cd.lxx = wx * Matrix::Identity(x.size(), x.size());
    cd.luu = wu * Matrix::Identity(u.size(), u.size());
    cd.lxu = Matrix::Zero(x.size(), u.size());
    return cd;
  };
  st.dynamics = [A, B](const Vector& x, const Vector& u) {
    return Vector(A * x + B * u);
  };
  st.dynamics_jac = [A, B](const Vector&, const Vector&) {
    return ocp::Jacobians{A, B};
  };
  p.stages.assign(p.N, st);
  attach_zero_terminal(p);
  attach_endpoint(p, target, nr);
  return p;
}

ocp::Problem build_point_mass(const ProblemSpec& spec) {
  auto model = std::make_shared<SecondOrder>();
  model->n_q = 2;
  model->n_u = 2;
  const double inv_m = 1.0 / spec.mass;
  model->accel = [inv_m](const Vector&, const Vector& u) {
    return Vector(inv_m * u);
  };
  model->accel_jac = [inv_m](const Vector&, const Vector&) {
    return ocp::Jacobians{Matrix::Zero(2, 4),
                          Matrix(inv_m * Matrix::Identity(2, 2))};
  };

  ocp::Problem p;
  p.N = spec.N;
  p.x0 = spec.x0.size() > 0 ? spec.x0 : Vector(Vector::Zero(4));
  Vector target(4);
  target << 1.0, 1.0, 0.0, 0.0;
  if (spec.target.size() > 0) target = spec.target;
  p.stages.assign(p.N, make_stage(model, spec, target));
  attach_zero_terminal(p);
  attach_endpoint(p, target, 4);
  return p;
}

ocp::Problem build_cartpole(const ProblemSpec& spec) {
  const double mc = spec.cart_mass, mp = spec.pole_mass, l = spec.pole_length,
               g = spec.gravity;
  auto model = std::make_shared<SecondOrder>();
  model->n_q = 2;
  model->n_u = 1;
  // State (p, theta, pdot, thetadot); theta from the downward vertical.
  model->accel = [mc, mp, l, g](const Vector& x, const Vector& u) {
    const double s = std::sin(x(1)), c = std::cos(x(1)), w = x(3);
    const double D = mc + mp * s * s;
    Vector a(2);
    a(0) = (u(0) + mp * s * (l * w * w + g * c)) / D;
    a(1) = (-(mc + mp) * g * s - c * (u(0) + mp * l * s * w * w)) / (l * D);
    return a;
  };
  model->accel_jac = [mc, mp, l, g](const Vector& x, const Vector& u) {
    const double th = x(1), w = x(3);
    const double s = std::sin(th), c = std::cos(th);
    const double c2 = std::cos(2.0 * th);
    const double D = mc + mp * s * s;
    const double Dp = 2.0 * mp * s * c;
    const double a1 = (u(0) + mp * s * (l * w * w + g * c)) / D;
    const double a2 =
        (-(mc + mp) * g * s - c * (u(0) + mp * l * s * w * w)) / (l * D);
    ocp::Jacobians j;
    j.jx = Matrix::Zero(2, 4);
    j.jx(0, 1) = (mp * (c * l * w * w + g * c2)) / D - a1 * Dp / D;
    j.jx(0, 3) = 2.0 * mp * s * l * w / D;
    j.jx(1, 1) = (-(mc + mp) * g * c + s * u(0) - mp * l * w * w * c2) /
                     (l * D) -
                 a2 * Dp / D;
    j.jx(1, 3) = -2.0 * mp * c * s * w / D;
    j.ju = Matrix::Zero(2, 1);
    j.ju(0, 0) = 1.0 / D;
    j.ju(1, 0) = -c / (l * D);
    return j;
  };

  ocp::Problem p;
  p.N = spec.N;
  p.x0 = spec.x0.size() > 0 ? spec.x0 : Vector(Vector::Zero(4));
  Vector target(4);
  target << 0.0, kPi, 0.0, 0.0;
  if (spec.target.size() > 0) target = spec.target;
  p.state_diff = make_state_diff({1});
  p.stages.assign(p.N, make_stage(model, spec, target));
  attach_zero_terminal(p);
  attach_endpoint(p, target, 4);
  return p;
}

// Double-pendulum manipulator terms with absolute link angles from the
// downward vertical: M(q) a + C(q, v) + G(q) = tau.
struct DpendParams {
  double m1, m2, l1, l2, g;
  double kc() const { return m2 * l1 * l2; }

  Matrix mass_matrix(const Vector& q) const {
    const double c = std::cos(q(0) - q(1));
    Matrix M(2, 2);
    M(0, 0) = (m1 + m2) * l1 * l1;
    M(0, 1) = M(1, 0) = kc() * c;
    M(1, 1) = m2 * l2 * l2;
    return M;
  }
  Vector bias(const Vector& q, const Vector& v) const {
    const double s = std::sin(q(0) - q(1));
    Vector b(2);
    b(0) = kc() * s * v(1) * v(1) + (m1 + m2) * g * l1 * std::sin(q(0));
    b(1) = -kc() * s * v(0) * v(0) + m2 * g * l2 * std::sin(q(1));
    return b;
  }
  // d(M a + C + G)/dq at fixed a, and d(C)/dv; both 2x2.
  Matrix dq(const Vector& q, const Vector& v, const Vector& a) const {
    const double d = q(0) - q(1);
    const double s = std::sin(d), c = std::cos(d);
    const double k = kc();
    Matrix J(2, 2);
    J(0, 0) = -k * s * a(1) + k * c * v(1) * v(1) +
              (m1 + m2) * g * l1 * std::cos(q(0));
    J(0, 1) = k * s * a(1) - k * c * v(1) * v(1);
    J(1, 0) = -k * s * a(0) - k * c * v(0) * v(0);
    J(1, 1) = k * s * a(0) + k * c * v(0) * v(0) +
              m2 * g * l2 * std::cos(q(1));
    return J;
  }
  Matrix dv(const Vector& q, const Vector& v) const {
    const double s = std::sin(q(0) - q(1));
    const double k = kc();
    Matrix J = Matrix::Zero(2, 2);
    J(0, 1) = 2.0 * k * s * v(1);
    J(1, 0) = -2.0 * k * s * v(0);
    return J;
  }
};

DpendParams dpend_params(const ProblemSpec& spec) {
  return {spec.m1, spec.m2, spec.l1, spec.l2, spec.gravity};
}

ocp::Problem build_dpend(const ProblemSpec& spec) {
  const DpendParams pp = dpend_params(spec);
  auto model = std::make_shared<SecondOrder>();
  model->n_q = 2;
  model->n_u = 2;
  model->accel = [pp](const Vector& x, const Vector& u) {
    const Vector q = x.head(2), v = x.tail(2);
    return Vector(pp.mass_matrix(q).ldlt().solve(u - pp.bias(q, v)));
  };
  model->accel_jac = [pp](const Vector& x, const Vector& u) {
    const Vector q = x.head(2), v = x.tail(2);
    const auto M_ldlt = pp.mass_matrix(q).ldlt();
    const Vector a = M_ldlt.solve(u - pp.bias(q, v));
    ocp::Jacobians j;
    j.jx = Matrix(2, 4);
    j.jx.leftCols(2) = -M_ldlt.solve(pp.dq(q, v, a));
    j.jx.rightCols(2) = -M_ldlt.solve(pp.dv(q, v));
    j.ju = M_ldlt.solve(Matrix::Identity(2, 2));
    return j;
  };

  ocp::Problem p;
  p.N = spec.N;
  p.x0 = spec.x0.size() > 0 ? spec.x0 : Vector(Vector::Zero(4));
  Vector target(4);
  target << kPi, kPi, 0.0, 0.0;
  if (spec.target.size() > 0) target = spec.target;
  p.state_diff = make_state_diff({0, 1});
  p.stages.assign(p.N, make_stage(model, spec, target));
  attach_zero_terminal(p);
  attach_endpoint(p, target, 4);
  return p;
}

ocp::Problem build_dpend_inverse(const ProblemSpec& spec) {
  const DpendParams pp = dpend_params(spec);
  // Controls (a1, a2, tau1, tau2); accelerations drive the integration,
  // torques enter only through the stagewise constraint.
  auto model = std::make_shared<SecondOrder>();
  model->n_q = 2;
  model->n_u = 4;
  model->accel = [](const Vector&, const Vector& u) {
    return Vector(u.head(2));
  };
  model->accel_jac = [](const Vector&, const Vector&) {
    Matrix ju = Matrix::Zero(2, 4);
    ju.leftCols(2).setIdentity();
    return ocp::Jacobians{Matrix::Zero(2, 4), ju};
  };

  ocp::Problem p;
  p.N = spec.N;
  p.x0 = spec.x0.size() > 0 ? spec.x0 : Vector(Vector::Zero(4));
  Vector target(4);
  target << kPi, kPi, 0.0, 0.0;
  if (spec.target.size() > 0) target = spec.target;
  p.state_diff = make_state_diff({0, 1});

  ocp::StageFunctions st = make_stage(model, spec, target);
  st.n_h = 2;
  st.constraint = [pp](const Vector& x, const Vector& u) {
    const Vector q = x.head(2), v = x.tail(2);
    return Vector(pp.mass_matrix(q) * u.head(2) + pp.bias(q, v) - u.tail(2));
  };
  st.constraint_jac = [pp](const Vector& x, const Vector& u) {
    const Vector q = x.head(2), v = x.tail(2);
    const Vector a = u.head(2);
    ocp::Jacobians j;
    j.jx = Matrix(2, 4);
    j.jx.leftCols(2) = pp.dq(q, v, a);
    j.jx.rightCols(2) = pp.dv(q, v);
    j.ju = Matrix(2, 4);
    j.ju.leftCols(2) = pp.mass_matrix(q);
    j.ju.rightCols(2) = -Matrix::Identity(2, 2);
    return j;
  };
  st.constraint_hess = [pp](const Vector& x, const Vector& u,
                            const Vector& w) {
    const double d = x(0) - x(1);
    const double s = std::sin(d), c = std::cos(d);
    const double k = pp.kc();
    const double v1 = x(2), v2 = x(3);
    const double a1 = u(0), a2 = u(1);
    // Weighted sums of the per-row second derivatives; A multiplies the
    // cos(d) terms from M(q) a, Bv the sin(d) terms from the bias.
    const double A = w(0) * a2 + w(1) * a1;
    const double Bv = w(0) * v2 * v2 - w(1) * v1 * v1;
    ocp::HessContraction hc;
    hc.xx = Matrix::Zero(4, 4);
    hc.xx(0, 0) = -k * c * A - k * s * Bv -
                  w(0) * (pp.m1 + pp.m2) * pp.g * pp.l1 * std::sin(x(0));
    hc.xx(0, 1) = hc.xx(1, 0) = k * c * A + k * s * Bv;
    hc.xx(1, 1) = -k * c * A - k * s * Bv -
                  w(1) * pp.m2 * pp.g * pp.l2 * std::sin(x(1));
    hc.xx(0, 2) = hc.xx(2, 0) = -2.0 * w(1) * k * c * v1;
    hc.xx(1, 2) = hc.xx(2, 1) = 2.0 * w(1) * k * c * v1;
    hc.xx(0, 3) = hc.xx(3, 0) = 2.0 * w(0) * k * c * v2;
    hc.xx(1, 3) = hc.xx(3, 1) = -2.0 * w(0) * k * c * v2;
    hc.xx(2, 2) = -2.0 * w(1) * k * s;
    hc.xx(3, 3) = 2.0 * w(0) * k * s;
    hc.xu = Matrix::Zero(4, 4);
    hc.xu(0, 0) = -w(1) * k * s;
    hc.xu(0, 1) = -w(0) * k * s;
    hc.xu(1, 0) = w(1) * k * s;
    hc.xu(1, 1) = w(0) * k * s;
    hc.uu = Matrix::Zero(4, 4);
    return hc;
  };

  p.stages.assign(p.N, st);
  attach_zero_terminal(p);
  attach_endpoint(p, target, 4);
  return p;
}

}  // namespace

Integrator integrator_from_string(const std::string& name) {
  if (name == "semi-implicit-euler" || name == "semi_implicit_euler")
    return Integrator::SemiImplicitEuler;
  if (name == "explicit-euler" || name == "explicit_euler")
    return Integrator::ExplicitEuler;
  if (name == "rk4") return Integrator::Rk4;
  throw UnknownFamily("unknown integrator: " + name);
}

const char* to_string(Integrator ig) {
  switch (ig) {
    case Integrator::SemiImplicitEuler: return "semi-implicit-euler";
    case Integrator::ExplicitEuler: return "explicit-euler";
    case Integrator::Rk4: return "rk4";
  }
  return "unknown";
}

void ProblemSpec::validate() const {
  if (N < 1) throw UnknownFamily("horizon must be >= 1");
  if (dt <= 0.0) throw UnknownFamily("step size must be positive");
  if (m1 <= 0 || m2 <= 0 || l1 <= 0 || l2 <= 0 || cart_mass <= 0 ||
      pole_mass <= 0 || pole_length <= 0 || mass <= 0 || gravity <= 0)
    throw UnknownFamily("physical parameters must be positive");
  if (nx < 1 || nu < 1) throw UnknownFamily("lqr dimensions must be positive");
  if (endpoint_copies < 1 || stagewise_copies < 1)
    throw UnknownFamily("constraint copy counts must be >= 1");
}

ocp::Problem build(const ProblemSpec& spec) {
  spec.validate();
  ocp::Problem p;
  if (spec.family == "lqr") p = build_lqr(spec);
  else if (spec.family == "point-mass") p = build_point_mass(spec);
  else if (spec.family == "cartpole") p = build_cartpole(spec);
  else if (spec.family == "dpend") p = build_dpend(spec);
  else if (spec.family == "dpend-inverse") p = build_dpend_inverse(spec);
  else throw UnknownFamily("unknown problem family: " + spec.family);

  if (spec.endpoint_copies > 1)
    p = duplicate_endpoint(p, spec.endpoint_copies);
  if (spec.stagewise_copies > 1)
    p = duplicate_stagewise(p, spec.stagewise_copies);
  return p;
}

ocp::Problem duplicate_endpoint(const ocp::Problem& problem, int times) {
  if (times < 2) throw DimensionMismatch("duplication count must be >= 2");
  if (problem.n_r() == 0)
    throw DimensionMismatch("problem has no endpoint constraint");
  ocp::Problem p = problem;
  const Eigen::Index n_r = problem.n_r();
  const auto value = problem.endpoint.value;
  const auto jac = problem.endpoint.jacobian;
  p.endpoint.n_r = n_r * times;
  p.endpoint.value = [value, n_r, times](const Vector& x) {
    const Vector r = value(x);
    Vector out(n_r * times);
    for (int i = 0; i < times; ++i) out.segment(i * n_r, n_r) = r;
    return out;
  };
  p.endpoint.jacobian = [jac, n_r, times](const Vector& x) {
    const Matrix J = jac(x);
    Matrix out(n_r * times, J.cols());
    for (int i = 0; i < times; ++i) out.middleRows(i * n_r, n_r) = J;
    return out;
  };
  return p;
}

ocp::Problem duplicate_stagewise(const ocp::Problem& problem, int times) {
  if (times < 2) throw DimensionMismatch("duplication count must be >= 2");
  ocp::Problem p = problem;
  for (auto& st : p.stages) {
    if (st.n_h == 0) continue;
    const Eigen::Index n_h = st.n_h;
    const auto value = st.constraint;
    const auto jac = st.constraint_jac;
    const auto hess = st.constraint_hess;
    st.n_h = n_h * times;
    st.constraint = [value, n_h, times](const Vector& x, const Vector& u) {
      const Vector h = value(x, u);
      Vector out(n_h * times);
      for (int i = 0; i < times; ++i) out.segment(i * n_h, n_h) = h;
      return out;
    };
    st.constraint_jac = [jac, n_h, times](const Vector& x, const Vector& u) {
      const ocp::Jacobians J = jac(x, u);
      ocp::Jacobians out;
      out.jx.resize(n_h * times, J.jx.cols());
      out.ju.resize(n_h * times, J.ju.cols());
      for (int i = 0; i < times; ++i) {
        out.jx.middleRows(i * n_h, n_h) = J.jx;
        out.ju.middleRows(i * n_h, n_h) = J.ju;
      }
      return out;
    };
    if (hess) {
      st.constraint_hess = [hess, n_h, times](const Vector& x, const Vector& u,
                                              const Vector& w) {
        Vector ws = Vector::Zero(n_h);
        for (int i = 0; i < times; ++i) ws += w.segment(i * n_h, n_h);
        return hess(x, u, ws);
      };
    }
  }
  return p;
}

std::pair<std::vector<Vector>, std::vector<Vector>> initial_guess(
    const ocp::Problem& problem) {
  std::vector<Vector> xs(problem.N + 1, problem.x0);
  std::vector<Vector> us(problem.N);
  for (int k = 0; k < problem.N; ++k)
    us[k] = Vector::Zero(problem.stages[k].n_u);
  return {std::move(xs), std::move(us)};
}

double dpend_energy(const ProblemSpec& spec, const Vector& x) {
  const DpendParams pp = dpend_params(spec);
  const Vector q = x.head(2), v = x.tail(2);
  const double kin = 0.5 * v.dot(pp.mass_matrix(q) * v);
  const double pot = -(pp.m1 + pp.m2) * pp.g * pp.l1 * std::cos(q(0)) -
                     pp.m2 * pp.g * pp.l2 * std::cos(q(1));
  return kin + pot;
}

}  // namespace tddp::problems
