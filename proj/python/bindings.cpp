// Python bindings for the core operations: problem construction, the full
// solve, the dense saddle-point reference solve, and derivative checking.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tddp/problems.hpp"
#include "tddp/solver.hpp"

namespace py = pybind11;
using namespace tddp;

namespace {

problems::ProblemSpec spec_from_dict(const py::dict& d) {
  problems::ProblemSpec s;
  auto get = [&](const char* key, auto& field) {
    if (d.contains(key))
      field = d[key].cast<std::decay_t<decltype(field)>>();
  };
  get("family", s.family);
  get("N", s.N);
  get("dt", s.dt);
  if (d.contains("integrator"))
    s.integrator =
        problems::integrator_from_string(d["integrator"].cast<std::string>());
  get("nx", s.nx);
  get("nu", s.nu);
  get("nr", s.nr);
  get("seed", s.seed);
  get("m1", s.m1);
  get("m2", s.m2);
  get("l1", s.l1);
  get("l2", s.l2);
  get("cart_mass", s.cart_mass);
  get("pole_mass", s.pole_mass);
  get("pole_length", s.pole_length);
  get("mass", s.mass);
  get("gravity", s.gravity);
  get("w_state", s.w_state);
  get("w_control", s.w_control);
  get("x0", s.x0);
  get("target", s.target);
  get("endpoint_copies", s.endpoint_copies);
  get("stagewise_copies", s.stagewise_copies);
  get("formulation", s.formulation);
  return s;
}

solver::SolverOptions options_from_dict(const py::dict& d,
                                        const std::string& formulation) {
  solver::SolverOptions o;
  if (formulation == "forward") o.formulation = riccati::Formulation::Forward;
  else if (formulation == "inverse-schur")
    o.formulation = riccati::Formulation::InverseSchur;
  else if (formulation == "inverse-nullspace")
    o.formulation = riccati::Formulation::InverseNullspace;
  else throw UnknownFamily("unknown formulation: " + formulation);
  auto get = [&](const char* key, auto& field) {
    if (d.contains(key))
      field = d[key].cast<std::decay_t<decltype(field)>>();
  };
  get("max_iters", o.max_iters);
  get("tol_kkt", o.tol_kkt);
  get("tol_feas", o.tol_feas);
  get("reg_init", o.reg_init);
  get("reg_max", o.reg_max);
  get("alpha_steps", o.alpha_steps);
  if (d.contains("hessian_mode")) {
    const auto m = d["hessian_mode"].cast<std::string>();
    o.hessian_mode = m == "exact" ? ocp::HessianMode::ExactCallback
                                  : ocp::HessianMode::GaussNewton;
  }
  if (d.contains("endpoint")) {
    const auto m = d["endpoint"].cast<std::string>();
    if (m == "schur") o.endpoint = solver::EndpointResolution::Schur;
    else if (m == "nullspace")
      o.endpoint = solver::EndpointResolution::Nullspace;
    else o.endpoint = solver::EndpointResolution::SchurWithFallback;
  }
  return o;
}

py::dict solve_spec(const py::dict& spec_d, const py::dict& solver_d) {
  const problems::ProblemSpec spec = spec_from_dict(spec_d);
  const ocp::Problem problem = problems::build(spec);
  const auto opts = options_from_dict(solver_d, spec.formulation);
  auto [xs, us] = problems::initial_guess(problem);
  auto [it, stats] = solver::solve(problem, xs, us, opts);

  py::dict out;
  out["status"] = solver::to_string(stats.status);
  out["iterations"] = stats.iters;
  out["cost"] = it.cost;
  out["endpoint_feasibility"] = it.endpoint_gap_l1();
  out["kkt"] = stats.final_kkt;
  out["xs"] = it.xs;
  out["us"] = it.us;
  return out;
}

double derivative_error_spec(const py::dict& spec_d) {
  const ocp::Problem problem = problems::build(spec_from_dict(spec_d));
  const auto [xs, us] = problems::initial_guess(problem);
  return ocp::derivative_error(problem, xs, us);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "trajectory optimization with endpoint-explicit Riccati sweeps";

  py::register_exception<SolverError>(m, "SolverError");

  m.def("solve", &solve_spec, py::arg("problem"),
        py::arg("solver") = py::dict(),
        "Build a benchmark problem from a spec dict and solve it.");
  m.def("derivative_error", &derivative_error_spec, py::arg("problem"),
        "Worst relative error of analytic derivatives vs central "
        "differences at the default warm start.");
  m.def(
      "solve_kkt_dense",
      [](const Matrix& A, const Vector& a, const Matrix& B, const Vector& b) {
        const auto sol = saddle::solve_kkt_dense({A, a, B, b});
        return py::make_tuple(sol.w, sol.y);
      },
      py::arg("A"), py::arg("a"), py::arg("B"), py::arg("b"),
      "Reference dense solve of the saddle system [[A, B'], [B, 0]].");
}
