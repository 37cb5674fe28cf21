#include "tddp/solver.hpp"

#include <chrono>
#include <cmath>

namespace tddp::solver {

namespace {
using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}
}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::MaxIters: return "MaxIters";
    case SolveStatus::LineSearchFailure: return "LineSearchFailure";
    case SolveStatus::Diverged: return "Diverged";
  }
  return "Unknown";
}

void SolverOptions::validate() const {
  if (max_iters < 1 || alpha_steps < 1 || nonmonotone_window < 1 ||
      reg_patience < 1)
    throw SolverError("counts must be positive");
  if (tol_kkt <= 0 || tol_feas <= 0 || armijo_eta <= 0 || nu_init <= 0 ||
      merit_growth < 1.0)
    throw SolverError("tolerances must be positive");
  if (reg_min < 0 || reg_max < reg_min || reg_init < reg_min ||
      reg_init > reg_max || reg_up <= 1.0 || reg_down >= 1.0)
    throw SolverError("regularization schedule invalid");
}

double merit(const ocp::Iterate& it, double nu) {
  if (nu <= 0.0) throw SolverError("merit penalty must be positive");
  return it.cost +
         nu * (it.dyn_gap_l1() + it.stage_gap_l1() + it.endpoint_gap_l1());
}

double kkt_residual(const ocp::LQApproximation& lq, const ocp::Iterate& it) {
  const int N = lq.N();
  double r = 0.0;
  auto upd = [&](const Vector& v) {
    if (v.size() > 0) r = std::max(r, v.cwiseAbs().maxCoeff());
  };
  for (int k = 0; k < N; ++k) {
    const auto& s = lq.stages[k];
    Vector sx = s.lx + s.fx.transpose() * it.xi[k + 1] - it.xi[k];
    Vector su = s.lu + s.fu.transpose() * it.xi[k + 1];
    if (s.n_h() > 0) {
      sx += s.hx.transpose() * it.gamma[k];
      su += s.hu.transpose() * it.gamma[k];
    }
    upd(sx);
    upd(su);
    upd(s.hgap);
    upd(s.fgap);
  }
  Vector sN = lq.lxN - it.xi[N];
  if (lq.n_r() > 0) sN += lq.rx.transpose() * it.beta;
  upd(sN);
  upd(lq.f0gap);
  upd(lq.rgap);
  return r;
}

double update_regularization(double reg, StepOutcome outcome,
                             const SolverOptions& opts) {
  switch (outcome) {
    case StepOutcome::AcceptedFullStep:
      return std::max(opts.reg_min, reg * opts.reg_down);
    case StepOutcome::AcceptedPartialStep:
      return reg;
    case StepOutcome::Rejected:
      return std::min(opts.reg_max, reg * opts.reg_up);
  }
  return reg;
}

ocp::Iterate rollout(const ocp::Problem& problem, const ocp::Iterate& it,
                     const direction::SearchDirection& dir, double alpha,
                     RolloutMode mode, const riccati::HatPolicy* pol) {
  const int N = problem.N;
  ocp::Iterate cand = it;

  if (alpha == 0.0) return cand;

  if (mode == RolloutMode::FeasibilityDriven) {
    // Forward recursion that contracts the dynamics gaps by (1 - alpha);
    // feedback acts on the deviation from the predicted linear path.
    cand.xs[0] = it.xs[0] + alpha * dir.dx[0];
    for (int k = 0; k < N; ++k) {
      const Vector dev = problem.diff(cand.xs[k], it.xs[k]);
      Vector du = alpha * dir.du[k];
      if (pol) du += pol->K[k] * (alpha * dir.dx[k] - dev);
      cand.us[k] = it.us[k] + du;
      const Vector next =
          problem.stages[k].dynamics(cand.xs[k], cand.us[k]) -
          (1.0 - alpha) * it.fgap[k + 1];
      cand.xs[k + 1] = next;
    }
  } else {
    cand.xs[0] = problem.x0;
    for (int k = 0; k < N; ++k) {
      const Vector dev = problem.diff(cand.xs[k], it.xs[k]);
      Vector du = alpha * dir.du[k];
      if (pol) du += pol->K[k] * (alpha * dir.dx[k] - dev);
      cand.us[k] = it.us[k] + du;
      cand.xs[k + 1] = problem.stages[k].dynamics(cand.xs[k], cand.us[k]);
    }
  }
  for (const auto& x : cand.xs)
    if (!x.allFinite()) throw NonFiniteState("rollout produced non-finite state");
  for (const auto& u : cand.us)
    if (!u.allFinite())
      throw NonFiniteState("rollout produced non-finite control");

  for (int k = 0; k <= N; ++k)
    cand.xi[k] = (1.0 - alpha) * it.xi[k] + alpha * dir.dxi[k];
  for (int k = 0; k < N; ++k)
    if (it.gamma[k].size() > 0)
      cand.gamma[k] = (1.0 - alpha) * it.gamma[k] + alpha * dir.dgamma[k];
  if (it.beta.size() > 0)
    cand.beta = (1.0 - alpha) * it.beta + alpha * dir.beta;

  ocp::reevaluate(problem, cand);
  return cand;
}

LineSearchResult line_search(const ocp::Problem& problem,
                             const ocp::Iterate& it,
                             const direction::SearchDirection& dir,
                             const riccati::HatPolicy& pol,
                             const SolverOptions& opts, double nu,
                             const std::deque<double>& merit_window) {
  for (const auto& d : dir.dx)
    if (!d.allFinite()) throw NonFiniteState("search direction is not finite");

  LineSearchResult res;
  // Penalty sizing from the new multiplier estimates.
  double mult_norm = dir.beta.size() > 0 ? dir.beta.cwiseAbs().maxCoeff() : 0.0;
  for (const auto& v : dir.dxi)
    if (v.size() > 0) mult_norm = std::max(mult_norm, v.cwiseAbs().maxCoeff());
  for (const auto& v : dir.dgamma)
    if (v.size() > 0) mult_norm = std::max(mult_norm, v.cwiseAbs().maxCoeff());
  res.nu = std::max(nu, opts.merit_growth * mult_norm);

  double window_max = merit(it, res.nu);
  for (double m : merit_window) window_max = std::max(window_max, m);

  const double gap_l1 =
      it.dyn_gap_l1() + it.stage_gap_l1() + it.endpoint_gap_l1();
  double alpha = 1.0;
  for (int step = 0; step < opts.alpha_steps; ++step, alpha *= 0.5) {
    const double model = direction::expected_improvement(dir, alpha) -
                         res.nu * alpha * gap_l1;
    if (model >= 0.0) continue;  // no predicted merit decrease at this step
    ocp::Iterate cand;
    try {
      cand = rollout(problem, it, dir, alpha, opts.rollout_mode, &pol);
    } catch (const NonFiniteState&) {
      continue;
    }
    const double phi = merit(cand, res.nu);
    if (std::isfinite(phi) && phi <= window_max + opts.armijo_eta * model) {
      res.iterate = std::move(cand);
      res.alpha = alpha;
      res.success = true;
      return res;
    }
  }
  return res;
}

std::pair<ocp::Iterate, SolverStats> solve(const ocp::Problem& problem,
                                           const std::vector<Vector>& xs0,
                                           const std::vector<Vector>& us0,
                                           const SolverOptions& opts) {
  opts.validate();
  const auto t_start = Clock::now();

  ocp::Iterate it = ocp::evaluate(problem, xs0, us0);
  SolverStats stats;
  double reg = opts.reg_init;
  double nu = opts.nu_init;
  std::deque<double> merit_window;
  int saturated_rejections = 0;

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    ocp::LQApproximation lq = ocp::linearize(problem, it, opts.hessian_mode);
    const double kkt = kkt_residual(lq, it);
    stats.final_kkt = kkt;
    if (kkt <= opts.tol_kkt && it.endpoint_gap_l1() <= opts.tol_feas) {
      stats.status = SolveStatus::Converged;
      break;
    }
    if (merit(it, nu) > opts.diverge_guard) {
      stats.status = SolveStatus::Diverged;
      break;
    }

    IterationRecord rec;
    rec.iter = iter;
    rec.kkt_residual = kkt;

    // Direction with regularization retries on indefiniteness.
    direction::SearchDirection dir;
    riccati::HatPolicy pol;
    const auto t_dir = Clock::now();
    bool have_direction = false;
    while (!have_direction) {
      try {
        const double rtol = opts.rank_tol_for(problem.n_x(), problem.n_x());
        auto [hat_pol, hat_val] =
            riccati::backward_pass_hat(lq, reg, opts.formulation, rtol);
        const auto hat_dir = riccati::rollout_hat(lq, hat_pol, hat_val);
        auto [chk_pol, chk_val] = riccati::backward_pass_check(lq, hat_pol);
        const auto chk_dir =
            riccati::rollout_check(lq, chk_pol, hat_val, chk_val);

        Vector beta(0);
        if (problem.n_r() > 0) {
          if (opts.endpoint == EndpointResolution::Nullspace) {
            beta = direction::endpoint_multiplier_nullspace(
                lq.rx, lq.rgap, hat_dir.dx.back(), chk_dir.dX.back(),
                opts.rank_tol_for(lq.n_r(), lq.n_r()), opts.rank_backend);
          } else {
            try {
              beta = direction::endpoint_multiplier_schur(
                  lq.rx, lq.rgap, hat_dir.dx.back(), chk_dir.dX.back());
            } catch (const SingularEndpointOperator&) {
              if (opts.endpoint == EndpointResolution::Schur) throw;
              beta = direction::endpoint_multiplier_nullspace(
                  lq.rx, lq.rgap, hat_dir.dx.back(), chk_dir.dX.back(),
                  opts.rank_tol_for(lq.n_r(), lq.n_r()), opts.rank_backend);
            }
          }
        }
        dir = direction::combine(hat_dir, chk_dir, beta);
        direction::attach_expected_improvement(dir, hat_dir, lq);
        pol = std::move(hat_pol);
        have_direction = true;
      } catch (const NotPositiveDefinite&) {
        if (reg >= opts.reg_max)
          throw RegularizationSaturated(
              "regularization saturated on indefinite subproblem");
        reg = update_regularization(reg, StepOutcome::Rejected, opts);
      }
    }
    rec.t_direction = seconds_since(t_dir);

    const auto t_ls = Clock::now();
    const auto ls = line_search(problem, it, dir, pol, opts, nu, merit_window);
    rec.t_linesearch = seconds_since(t_ls);

    if (!ls.success) {
      if (reg >= opts.reg_max) {
        if (++saturated_rejections >= opts.reg_patience) {
          stats.status = SolveStatus::LineSearchFailure;
          break;
        }
      }
      reg = update_regularization(reg, StepOutcome::Rejected, opts);
      rec.alpha = 0.0;
      rec.reg = reg;
      rec.cost = it.cost;
      rec.nu = nu;
      rec.merit = merit(it, nu);
      rec.feas_endpoint_l1 = it.endpoint_gap_l1();
      rec.feas_dyn_l1 = it.dyn_gap_l1();
      rec.feas_stage_l1 = it.stage_gap_l1();
      stats.iterations.push_back(rec);
      continue;
    }

    saturated_rejections = 0;
    nu = ls.nu;
    it = ls.iterate;
    merit_window.push_back(merit(it, nu));
    while (static_cast<int>(merit_window.size()) > opts.nonmonotone_window)
      merit_window.pop_front();
    reg = update_regularization(reg,
                                ls.alpha == 1.0 ? StepOutcome::AcceptedFullStep
                                                : StepOutcome::AcceptedPartialStep,
                                opts);

    rec.alpha = ls.alpha;
    rec.reg = reg;
    rec.cost = it.cost;
    rec.nu = nu;
    rec.merit = merit(it, nu);
    rec.feas_endpoint_l1 = it.endpoint_gap_l1();
    rec.feas_dyn_l1 = it.dyn_gap_l1();
    rec.feas_stage_l1 = it.stage_gap_l1();
    stats.iterations.push_back(rec);
  }

  stats.iters = static_cast<int>(stats.iterations.size());
  stats.final_cost = it.cost;
  stats.final_feas = it.endpoint_gap_l1();
  if (stats.status != SolveStatus::Converged &&
      stats.status != SolveStatus::LineSearchFailure &&
      stats.status != SolveStatus::Diverged)
    stats.status = SolveStatus::MaxIters;
  stats.total_time = seconds_since(t_start);
  return {std::move(it), std::move(stats)};
}

}  // namespace tddp::solver
