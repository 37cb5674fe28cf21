// Command-line harness: run a configured solve, compare factorization
// variants from a shared warm start, or run randomized cold-start campaigns.
#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <random>
#include <sstream>

#include "tddp/problems.hpp"
#include "tddp/solver.hpp"
#include "tddp/trace.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tddp;

namespace {

Vector vector_from_json(const json& j) {
  Vector v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

problems::ProblemSpec parse_spec(const json& j) {
  problems::ProblemSpec s;
  s.family = j.value("family", s.family);
  s.N = j.value("N", s.N);
  s.dt = j.value("dt", s.dt);
  if (j.contains("integrator"))
    s.integrator =
        problems::integrator_from_string(j["integrator"].get<std::string>());
  s.nx = j.value("nx", s.nx);
  s.nu = j.value("nu", s.nu);
  s.nr = j.value("nr", s.nr);
  s.seed = j.value("seed", s.seed);
  s.m1 = j.value("m1", s.m1);
  s.m2 = j.value("m2", s.m2);
  s.l1 = j.value("l1", s.l1);
  s.l2 = j.value("l2", s.l2);
  s.cart_mass = j.value("cart_mass", s.cart_mass);
  s.pole_mass = j.value("pole_mass", s.pole_mass);
  s.pole_length = j.value("pole_length", s.pole_length);
  s.mass = j.value("mass", s.mass);
  s.gravity = j.value("gravity", s.gravity);
  s.w_state = j.value("w_state", s.w_state);
  s.w_control = j.value("w_control", s.w_control);
  if (j.contains("x0")) s.x0 = vector_from_json(j["x0"]);
  if (j.contains("target")) s.target = vector_from_json(j["target"]);
  s.endpoint_copies = j.value("endpoint_copies", s.endpoint_copies);
  s.stagewise_copies = j.value("stagewise_copies", s.stagewise_copies);
  s.formulation = j.value("formulation", s.formulation);
  return s;
}

riccati::Formulation formulation_from_string(const std::string& name) {
  if (name == "forward") return riccati::Formulation::Forward;
  if (name == "inverse-schur") return riccati::Formulation::InverseSchur;
  if (name == "inverse-nullspace")
    return riccati::Formulation::InverseNullspace;
  throw UnknownFamily("unknown formulation: " + name);
}

solver::SolverOptions parse_solver(const json& j,
                                   const std::string& formulation) {
  solver::SolverOptions o;
  o.formulation = formulation_from_string(formulation);
  o.max_iters = j.value("max_iters", o.max_iters);
  if (j.contains("hessian_mode")) {
    const auto m = j["hessian_mode"].get<std::string>();
    if (m == "gauss-newton") o.hessian_mode = ocp::HessianMode::GaussNewton;
    else if (m == "exact") o.hessian_mode = ocp::HessianMode::ExactCallback;
    else throw UnknownFamily("unknown hessian mode: " + m);
  }
  if (j.contains("rollout_mode")) {
    const auto m = j["rollout_mode"].get<std::string>();
    if (m == "single-shooting")
      o.rollout_mode = solver::RolloutMode::SingleShooting;
    else if (m == "feasibility-driven")
      o.rollout_mode = solver::RolloutMode::FeasibilityDriven;
    else throw UnknownFamily("unknown rollout mode: " + m);
  }
  if (j.contains("endpoint")) {
    const auto m = j["endpoint"].get<std::string>();
    if (m == "schur") o.endpoint = solver::EndpointResolution::Schur;
    else if (m == "schur-fallback")
      o.endpoint = solver::EndpointResolution::SchurWithFallback;
    else if (m == "nullspace")
      o.endpoint = solver::EndpointResolution::Nullspace;
    else throw UnknownFamily("unknown endpoint resolution: " + m);
  }
  if (j.contains("rank_backend")) {
    const auto m = j["rank_backend"].get<std::string>();
    if (m == "qr") o.rank_backend = saddle::RankRevealing::QrColPiv;
    else if (m == "lu") o.rank_backend = saddle::RankRevealing::LuFullPiv;
    else throw UnknownFamily("unknown rank backend: " + m);
  }
  o.alpha_steps = j.value("alpha_steps", o.alpha_steps);
  o.armijo_eta = j.value("armijo_eta", o.armijo_eta);
  o.nonmonotone_window = j.value("nonmonotone_window", o.nonmonotone_window);
  o.nu_init = j.value("nu_init", o.nu_init);
  o.reg_init = j.value("reg_init", o.reg_init);
  o.reg_max = j.value("reg_max", o.reg_max);
  o.tol_kkt = j.value("tol_kkt", o.tol_kkt);
  o.tol_feas = j.value("tol_feas", o.tol_feas);
  o.rank_tol = j.value("rank_tol", o.rank_tol);
  return o;
}

/// Fig.-3-style factorization variant names.
void apply_variant(solver::SolverOptions& o, const std::string& variant) {
  if (variant == "schur") {
    o.formulation = riccati::Formulation::InverseSchur;
    o.endpoint = solver::EndpointResolution::Schur;
  } else if (variant == "null-qr") {
    o.formulation = riccati::Formulation::InverseNullspace;
    o.endpoint = solver::EndpointResolution::Nullspace;
    o.rank_backend = saddle::RankRevealing::QrColPiv;
  } else if (variant == "null-lu") {
    o.formulation = riccati::Formulation::InverseNullspace;
    o.endpoint = solver::EndpointResolution::Nullspace;
    o.rank_backend = saddle::RankRevealing::LuFullPiv;
  } else {
    throw UnknownFamily("unknown variant: " + variant);
  }
}

struct CommonArgs {
  std::string config_path;
  std::string output_dir;
  int seed_override = -1;
  int repetitions_override = -1;
};

json load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file: " + path);
  return json::parse(f);
}

fs::path resolve_output_dir(const json& cfg, const CommonArgs& args) {
  std::string dir = cfg.value("output_dir", std::string("out"));
  if (!args.output_dir.empty()) dir = args.output_dir;
  if (const char* env = std::getenv("TDDP_OUTPUT_DIR")) dir = env;
  fs::create_directories(dir);
  return dir;
}

std::string error_label(const SolverError& e) {
  if (dynamic_cast<const SingularEndpointOperator*>(&e))
    return "SingularEndpointOperator";
  if (dynamic_cast<const InconsistentEndpoint*>(&e))
    return "InconsistentEndpoint";
  if (dynamic_cast<const SingularConstraintBlock*>(&e))
    return "SingularConstraintBlock";
  if (dynamic_cast<const NotPositiveDefinite*>(&e))
    return "NotPositiveDefinite";
  if (dynamic_cast<const RegularizationSaturated*>(&e))
    return "RegularizationSaturated";
  if (dynamic_cast<const NonFiniteState*>(&e)) return "NonFiniteState";
  return e.what();
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void write_trace(const fs::path& path, const solver::SolverStats& stats,
                 double initial_cost) {
  std::ofstream f(path);
  f << trace::kTraceHeader << "\n";
  for (const auto& r : stats.iterations) {
    f << r.iter << ',' << fmt(r.cost) << ','
      << fmt(initial_cost != 0.0 ? r.cost / initial_cost : r.cost) << ','
      << fmt(r.merit) << ',' << fmt(r.nu) << ',' << fmt(r.feas_endpoint_l1)
      << ',' << fmt(r.feas_dyn_l1) << ',' << fmt(r.feas_stage_l1) << ','
      << fmt(r.kkt_residual) << ',' << fmt(r.alpha) << ',' << fmt(r.reg)
      << ',' << fmt(r.t_direction) << ',' << fmt(r.t_linesearch) << "\n";
  }
}

json summary_json(const std::string& status, const solver::SolverStats& stats,
                  const ocp::Iterate& it) {
  return json{{"schema", "tddp-summary-v1"},
              {"status", status},
              {"iterations", stats.iters},
              {"final_cost", it.cost},
              {"final_feasibility", it.endpoint_gap_l1()},
              {"final_kkt", stats.final_kkt},
              {"total_time", stats.total_time},
              {"trace_schema", trace::kTraceSchema}};
}

double traj_diff(const ocp::Iterate& a, const ocp::Iterate& b) {
  double d = 0.0;
  for (size_t k = 0; k < a.xs.size(); ++k)
    d = std::max(d, (a.xs[k] - b.xs[k]).cwiseAbs().maxCoeff());
  return d;
}

int cmd_run(const CommonArgs& args) {
  const json cfg = load_config(args.config_path);
  const fs::path out = resolve_output_dir(cfg, args);
  problems::ProblemSpec spec = parse_spec(cfg.at("problem"));
  if (args.seed_override >= 0) spec.seed = args.seed_override;
  solver::SolverOptions opts =
      parse_solver(cfg.value("solver", json::object()), spec.formulation);

  const ocp::Problem problem = problems::build(spec);
  auto [xs, us] = problems::initial_guess(problem);
  const double initial_cost = ocp::evaluate(problem, xs, us).cost;

  std::string status;
  solver::SolverStats stats;
  ocp::Iterate it;
  try {
    std::tie(it, stats) = solver::solve(problem, xs, us, opts);
    status = solver::to_string(stats.status);
  } catch (const SolverError& e) {
    status = std::string("FAILED(") + e.what() + ")";
    it = ocp::evaluate(problem, xs, us);
  }
  write_trace(out / "trace.csv", stats, initial_cost);
  std::ofstream(out / "summary.json") << summary_json(status, stats, it).dump(2)
                                      << "\n";
  std::cout << "status=" << status << " iterations=" << stats.iters
            << " feas=" << it.endpoint_gap_l1() << "\n";
  return 0;
}

int cmd_compare(const CommonArgs& args) {
  const json cfg = load_config(args.config_path);
  const fs::path out = resolve_output_dir(cfg, args);
  problems::ProblemSpec spec = parse_spec(cfg.at("problem"));
  if (args.seed_override >= 0) spec.seed = args.seed_override;
  int reps = cfg.value("repetitions", 3);
  if (args.repetitions_override >= 1) reps = args.repetitions_override;

  const auto variants =
      cfg.value("compare", json::object())
          .value("variants", std::vector<std::string>{"schur", "null-qr",
                                                      "null-lu"});
  if (variants.size() < 2) {
    std::cerr << "compare requires at least two variants\n";
    return 2;
  }

  const ocp::Problem problem = problems::build(spec);
  const auto [xs, us] = problems::initial_guess(problem);

  std::ofstream table(out / "compare.csv");
  table << trace::kCompareHeader << "\n";
  std::vector<std::pair<std::string, ocp::Iterate>> succeeded;
  for (const auto& v : variants) {
    solver::SolverOptions opts =
        parse_solver(cfg.value("solver", json::object()), spec.formulation);
    apply_variant(opts, v);
    std::string status;
    double mean_t = 0, min_t = 0, feas = 0;
    int iters = 0;
    for (int rep = 0; rep < reps; ++rep) {
      try {
        auto [it, stats] = solver::solve(problem, xs, us, opts);
        double sum = 0, mn = std::numeric_limits<double>::infinity();
        for (const auto& r : stats.iterations) {
          sum += r.t_direction;
          mn = std::min(mn, r.t_direction);
        }
        mean_t += stats.iterations.empty() ? 0 : sum / stats.iterations.size();
        min_t = rep == 0 ? mn : std::min(min_t, mn);
        if (rep == 0) {
          status = solver::to_string(stats.status);
          iters = stats.iters;
          feas = it.endpoint_gap_l1();
          if (stats.status == solver::SolveStatus::Converged)
            succeeded.emplace_back(v, it);
        }
      } catch (const SolverError& e) {
        // The failure mode is named after the exception type, e.g. a
        // singular endpoint operator under the plain Schur path.
        status = std::string("FAILED(") + error_label(e) + ")";
        break;
      }
    }
    mean_t /= std::max(reps, 1);
    table << v << ',' << '"' << status << '"' << ',' << iters << ','
          << fmt(feas) << ',' << fmt(mean_t) << ',' << fmt(min_t) << "\n";
    std::cout << v << ": " << status << " iters=" << iters
              << " mean_dir_time=" << mean_t << "\n";
  }

  double worst = 0.0;
  for (size_t i = 0; i + 1 < succeeded.size(); ++i)
    worst = std::max(worst,
                     traj_diff(succeeded[i].second, succeeded[i + 1].second));
  const bool agree = worst <= 1e-6;
  std::ofstream(out / "compare_summary.json")
      << json{{"schema", trace::kCompareSchema},
              {"variants", variants},
              {"trajectory_max_diff", worst},
              {"trajectories_agree", agree}}
             .dump(2)
      << "\n";
  std::cout << "trajectory_max_diff=" << worst << " agree=" << agree << "\n";
  return 0;
}

int cmd_campaign(const CommonArgs& args) {
  const json cfg = load_config(args.config_path);
  const fs::path out = resolve_output_dir(cfg, args);
  problems::ProblemSpec base = parse_spec(cfg.at("problem"));
  int trials = cfg.value("repetitions", 10);
  if (args.repetitions_override >= 1) trials = args.repetitions_override;
  const json cs = cfg.value("cold_start", json::object());
  unsigned seed = cs.value("seed", 0u);
  if (args.seed_override >= 0) seed = args.seed_override;
  const double magnitude = cs.value("magnitude", 0.1);

  // Forward- and inverse-dynamics rows where the family supports both.
  std::vector<std::pair<std::string, problems::ProblemSpec>> rows;
  if (base.family == "dpend" || base.family == "dpend-inverse") {
    auto fwd = base, inv = base;
    fwd.family = "dpend";
    fwd.formulation = "forward";
    inv.family = "dpend-inverse";
    inv.formulation = "inverse-nullspace";
    rows = {{"forward", fwd}, {"inverse", inv}};
  } else {
    rows = {{base.formulation, base}};
  }

  std::ofstream table(out / "campaign.csv");
  table << trace::kCampaignHeader << "\n";
  for (const auto& [label, spec] : rows) {
    const ocp::Problem problem = problems::build(spec);
    solver::SolverOptions opts =
        parse_solver(cfg.value("solver", json::object()), spec.formulation);
    int successes = 0;
    double iter_sum = 0, feas_sum = 0;
    for (int t = 0; t < trials; ++t) {
      std::mt19937 rng(seed + static_cast<unsigned>(t));
      std::normal_distribution<double> dist(0.0, 1.0);
      auto [xs, us] = problems::initial_guess(problem);
      for (auto& x : xs)
        for (Eigen::Index i = 0; i < x.size(); ++i)
          x(i) += magnitude * dist(rng);
      for (auto& u : us)
        for (Eigen::Index i = 0; i < u.size(); ++i)
          u(i) += magnitude * dist(rng);
      try {
        auto [it, stats] = solver::solve(problem, xs, us, opts);
        feas_sum += it.endpoint_gap_l1();
        if (stats.status == solver::SolveStatus::Converged &&
            it.endpoint_gap_l1() <= 1e-8) {
          ++successes;
          iter_sum += stats.iters;
        }
      } catch (const SolverError&) {
        feas_sum += std::numeric_limits<double>::quiet_NaN();
      }
    }
    const double rate = trials > 0 ? double(successes) / trials : 0.0;
    table << label << ',' << trials << ',' << successes << ',' << fmt(rate)
          << ',' << fmt(successes > 0 ? iter_sum / successes : 0.0) << ','
          << fmt(trials > 0 ? feas_sum / trials : 0.0) << "\n";
    std::cout << label << ": success_rate=" << rate
              << " successes=" << successes << "/" << trials << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trajectory optimization benchmark harness"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", args.config_path, "configuration file")
        ->required();
    sub->add_option("-o,--output-dir", args.output_dir,
                    "output directory (TDDP_OUTPUT_DIR overrides)");
    sub->add_option("-s,--seed", args.seed_override, "seed override");
    sub->add_option("-r,--repetitions", args.repetitions_override,
                    "repetition override");
  };
  auto* run = app.add_subcommand("run", "solve one configured problem");
  auto* compare =
      app.add_subcommand("compare", "compare factorization variants");
  auto* campaign =
      app.add_subcommand("campaign", "randomized cold-start campaign");
  add_common(run);
  add_common(compare);
  add_common(campaign);

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed()) return cmd_run(args);
    if (compare->parsed()) return cmd_compare(args);
    if (campaign->parsed()) return cmd_campaign(args);
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
