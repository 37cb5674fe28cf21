#ifndef TDDP_OCP_HPP
#define TDDP_OCP_HPP

#include <functional>
#include <vector>

#include "tddp/saddle.hpp"
#include "tddp/types.hpp"

namespace tddp::ocp {

struct CostDerivs {
  Vector lx, lu;
  Matrix lxx, lxu, luu;
};

struct Jacobians {
  Matrix jx, ju;
};

/// Contraction of a second-derivative tensor with a weight vector,
/// e.g. xx = sum_i w_i * d2 f_i / dx dx.
struct HessContraction {
  Matrix xx, xu, uu;
};

struct StageFunctions {
  Eigen::Index n_x = 0, n_u = 0, n_h = 0;

  std::function<double(const Vector&, const Vector&)> cost;
  std::function<CostDerivs(const Vector&, const Vector&)> cost_derivs;
  std::function<Vector(const Vector&, const Vector&)> dynamics;
  std::function<Jacobians(const Vector&, const Vector&)> dynamics_jac;
  std::function<Vector(const Vector&, const Vector&)> constraint;
  std::function<Jacobians(const Vector&, const Vector&)> constraint_jac;

  // Optional exact second-order terms; absent callbacks mean the
  // Gauss-Newton approximation is used regardless of mode.
  std::function<HessContraction(const Vector&, const Vector&, const Vector&)>
      dynamics_hess;
  std::function<HessContraction(const Vector&, const Vector&, const Vector&)>
      constraint_hess;
};

struct EndpointConstraint {
  Eigen::Index n_r = 0;
  std::function<Vector(const Vector&)> value;
  std::function<Matrix(const Vector&)> jacobian;
};

struct Problem {
  int N = 0;
  Vector x0;
  std::vector<StageFunctions> stages;  // N entries
  std::function<double(const Vector&)> terminal_cost;
  std::function<Vector(const Vector&)> terminal_grad;
  std::function<Matrix(const Vector&)> terminal_hess;
  EndpointConstraint endpoint;
  // Difference operator a (-) b; defaults to plain subtraction.
  std::function<Vector(const Vector&, const Vector&)> state_diff;

  Eigen::Index n_x() const { return x0.size(); }
  Eigen::Index n_r() const { return endpoint.n_r; }
  Vector diff(const Vector& a, const Vector& b) const {
    return state_diff ? state_diff(a, b) : Vector(a - b);
  }
};

struct Iterate {
  std::vector<Vector> xs;      // N+1
  std::vector<Vector> us;      // N
  std::vector<Vector> fgap;    // N+1: fgap[0] = x0 (-) xs[0]
  std::vector<Vector> hgap;    // N
  Vector rgap;
  std::vector<Vector> xi;      // N+1 dynamics multipliers
  std::vector<Vector> gamma;   // N stagewise multipliers
  Vector beta;                 // endpoint multiplier
  double cost = 0.0;

  double dyn_gap_l1() const;
  double stage_gap_l1() const;
  double endpoint_gap_l1() const { return rgap.lpNorm<1>(); }
};

enum class HessianMode { GaussNewton, ExactCallback };

struct StageLQ {
  Matrix lxx, lxu, luu;  // Lagrangian Hessian blocks
  Vector lx, lu;         // cost gradients
  Matrix fx, fu;
  Matrix hx, hu;
  Vector fgap;  // gap entering state k+1
  Vector hgap;
  Eigen::Index n_x() const { return lx.size(); }
  Eigen::Index n_u() const { return lu.size(); }
  Eigen::Index n_h() const { return hgap.size(); }
};

struct LQApproximation {
  std::vector<StageLQ> stages;  // N
  Vector f0gap;
  Vector lxN;
  Matrix lxxN;
  Matrix rx;
  Vector rgap;

  int N() const { return static_cast<int>(stages.size()); }
  Eigen::Index n_x() const { return f0gap.size(); }
  Eigen::Index n_r() const { return rgap.size(); }
};

/// Offsets of each variable block in the dense KKT assembly. Row/column
/// order per stage is (xi_k, dx_k, du_k, gamma_k), terminated by
/// (xi_N, dx_N); the endpoint multiplier lives in the constraint block.
struct KktLayout {
  explicit KktLayout(const LQApproximation& lq);
  Eigen::Index xi(int k) const { return xi_off[k]; }
  Eigen::Index x(int k) const { return x_off[k]; }
  Eigen::Index u(int k) const { return u_off[k]; }
  Eigen::Index g(int k) const { return g_off[k]; }
  Eigen::Index size() const { return total; }

 private:
  std::vector<Eigen::Index> xi_off, x_off, u_off, g_off;
  Eigen::Index total = 0;
};

Iterate evaluate(const Problem& problem, const std::vector<Vector>& xs,
                 const std::vector<Vector>& us);

/// Re-evaluates gaps and cost in place, keeping the stored multipliers.
void reevaluate(const Problem& problem, Iterate& it);

LQApproximation linearize(const Problem& problem, const Iterate& it,
                          HessianMode mode = HessianMode::GaussNewton);

/// Dense KKT assembly per the saddle-point abstraction: A holds the
/// endpoint-free optimality system, B the endpoint row on dx_N.
saddle::SaddleSystem assemble_dense_kkt(const LQApproximation& lq);

/// Max relative error between analytic Jacobians/gradients and central
/// finite differences at the given trajectory.
double derivative_error(const Problem& problem, const std::vector<Vector>& xs,
                        const std::vector<Vector>& us);

}  // namespace tddp::ocp

#endif
