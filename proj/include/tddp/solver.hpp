#ifndef TDDP_SOLVER_HPP
#define TDDP_SOLVER_HPP

#include <deque>

#include "tddp/direction.hpp"
#include "tddp/ocp.hpp"
#include "tddp/riccati.hpp"

namespace tddp::solver {

enum class RolloutMode { SingleShooting, FeasibilityDriven };
enum class EndpointResolution { Schur, SchurWithFallback, Nullspace };
enum class SolveStatus { Converged, MaxIters, LineSearchFailure, Diverged };

const char* to_string(SolveStatus s);

struct SolverOptions {
  int max_iters = 100;
  riccati::Formulation formulation = riccati::Formulation::Forward;
  ocp::HessianMode hessian_mode = ocp::HessianMode::GaussNewton;
  RolloutMode rollout_mode = RolloutMode::FeasibilityDriven;
  EndpointResolution endpoint = EndpointResolution::SchurWithFallback;
  saddle::RankRevealing rank_backend = saddle::RankRevealing::QrColPiv;
  int alpha_steps = 11;  // ladder 1, 1/2, ..., 2^-10
  double armijo_eta = 1e-4;
  int nonmonotone_window = 5;
  double merit_growth = 2.0;  // gamma_nu
  double nu_init = 1.0;
  double reg_init = 1e-9;
  double reg_min = 1e-9;
  double reg_max = 1e6;
  double reg_up = 10.0;
  double reg_down = 0.5;
  int reg_patience = 3;
  double tol_kkt = 1e-7;
  double tol_feas = 1e-9;
  double rank_tol = 0.0;  // 0 -> dimension-scaled default
  double diverge_guard = 1e12;

  void validate() const;
  double rank_tol_for(Eigen::Index rows, Eigen::Index cols) const {
    return rank_tol > 0.0 ? rank_tol : default_rank_tol(rows, cols);
  }
};

struct IterationRecord {
  int iter = 0;
  double cost = 0, merit = 0, nu = 0;
  double feas_endpoint_l1 = 0, feas_dyn_l1 = 0, feas_stage_l1 = 0;
  double alpha = 0, reg = 0, kkt_residual = 0;
  double t_direction = 0, t_linesearch = 0;
};

struct SolverStats {
  std::vector<IterationRecord> iterations;
  SolveStatus status = SolveStatus::MaxIters;
  int iters = 0;
  double final_cost = 0, final_feas = 0, final_kkt = 0;
  double total_time = 0;
};

double merit(const ocp::Iterate& it, double nu);

/// Max-norm residual of the full first-order optimality system at the
/// iterate's stored multipliers.
double kkt_residual(const ocp::LQApproximation& lq, const ocp::Iterate& it);

enum class StepOutcome { AcceptedFullStep, AcceptedPartialStep, Rejected };

double update_regularization(double reg, StepOutcome outcome,
                             const SolverOptions& opts);

ocp::Iterate rollout(const ocp::Problem& problem, const ocp::Iterate& it,
                     const direction::SearchDirection& dir, double alpha,
                     RolloutMode mode, const riccati::HatPolicy* pol);

struct LineSearchResult {
  ocp::Iterate iterate;
  double alpha = 0;
  double nu = 0;
  bool success = false;
};

LineSearchResult line_search(const ocp::Problem& problem,
                             const ocp::Iterate& it,
                             const direction::SearchDirection& dir,
                             const riccati::HatPolicy& pol,
                             const SolverOptions& opts, double nu,
                             const std::deque<double>& merit_window);

std::pair<ocp::Iterate, SolverStats> solve(const ocp::Problem& problem,
                                           const std::vector<Vector>& xs0,
                                           const std::vector<Vector>& us0,
                                           const SolverOptions& opts);

}  // namespace tddp::solver

#endif
