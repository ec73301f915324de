#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "invlp/bench.hpp"
#include "invlp/grad.hpp"
#include "invlp/ilop.hpp"
#include "invlp/ipm.hpp"
#include "invlp/json_io.hpp"
#include "invlp/lp_core.hpp"
#include "invlp/model.hpp"

namespace py = pybind11;
using namespace invlp;

namespace {

py::object json_to_py(const Json& j) {
    const py::object loads = py::module_::import("json").attr("loads");
    return loads(j.dump());
}

LinearProgram make_lp(const Vector& c, const Matrix& A, const Vector& b,
                      std::optional<Matrix> G, std::optional<Vector> h) {
    LinearProgram lp;
    lp.c = c;
    lp.A = A;
    lp.b = b;
    lp.G = G.value_or(Matrix(0, c.size()));
    lp.h = h.value_or(Vector(0));
    lp.validate();
    return lp;
}

IpmSettings settings_from_kwargs(double tol, int max_iters) {
    IpmSettings s;
    if (tol > 0) s.tol_gap = s.tol_primal = s.tol_dual = tol;
    s.max_iters = max_iters;
    return s;
}

}  // namespace

PYBIND11_MODULE(_invlp, m) {
    m.doc() = "Learning parametric linear programs from observed optimal decisions";

    py::enum_<SolveStatus>(m, "SolveStatus")
        .value("optimal", SolveStatus::Optimal)
        .value("primal_infeasible", SolveStatus::PrimalInfeasible)
        .value("dual_infeasible_unbounded", SolveStatus::DualInfeasibleUnbounded)
        .value("iteration_limit", SolveStatus::IterationLimit)
        .value("numerical_failure", SolveStatus::NumericalFailure);

    py::class_<LinearProgram>(m, "LinearProgram")
        .def(py::init(&make_lp), py::arg("c"), py::arg("A"), py::arg("b"),
             py::arg("G") = std::nullopt, py::arg("h") = std::nullopt)
        .def_readonly("c", &LinearProgram::c)
        .def_readonly("A", &LinearProgram::A)
        .def_readonly("b", &LinearProgram::b)
        .def_readonly("G", &LinearProgram::G)
        .def_readonly("h", &LinearProgram::h)
        .def_property_readonly("dim", &LinearProgram::dim)
        .def("__repr__", [](const LinearProgram& lp) {
            return "LinearProgram(D=" + std::to_string(lp.dim()) +
                   ", M1=" + std::to_string(lp.num_ineq()) +
                   ", M2=" + std::to_string(lp.num_eq()) + ")";
        });

    py::class_<PrimalDualSolution>(m, "Solution")
        .def_readonly("x", &PrimalDualSolution::x)
        .def_readonly("lam", &PrimalDualSolution::lam)
        .def_readonly("nu", &PrimalDualSolution::nu)
        .def_readonly("status", &PrimalDualSolution::status)
        .def_readonly("objective", &PrimalDualSolution::objective)
        .def_readonly("iterations", &PrimalDualSolution::iterations)
        .def_readonly("kkt_residual", &PrimalDualSolution::kkt_residual)
        .def("__repr__", [](const PrimalDualSolution& s) {
            return std::string("Solution(status=") + to_string(s.status) +
                   ", objective=" + std::to_string(s.objective) + ")";
        });

    py::class_<KktResiduals>(m, "KktResiduals")
        .def_readonly("primal_ineq", &KktResiduals::primal_ineq)
        .def_readonly("primal_eq", &KktResiduals::primal_eq)
        .def_readonly("dual", &KktResiduals::dual)
        .def_readonly("complementarity", &KktResiduals::complementarity)
        .def_readonly("sign", &KktResiduals::sign)
        .def("max", &KktResiduals::max);

    py::class_<DegeneracyReport>(m, "DegeneracyReport")
        .def_readonly("active_inequalities", &DegeneracyReport::active_inequalities)
        .def_readonly("strictly_active", &DegeneracyReport::strictly_active)
        .def_readonly("weakly_active", &DegeneracyReport::weakly_active)
        .def_readonly("is_degenerate", &DegeneracyReport::is_degenerate)
        .def_readonly("active_rank", &DegeneracyReport::active_rank);

    m.def(
        "solve",
        [](const LinearProgram& lp, double tol, int max_iters) {
            return solve(lp, settings_from_kwargs(tol, max_iters));
        },
        py::arg("lp"), py::arg("tol") = -1.0, py::arg("max_iters") = 200,
        "Homogeneous self-dual interior-point solve");
    m.def(
        "solve_batch",
        [](const std::vector<LinearProgram>& lps, double tol, int max_iters) {
            return solve_batch(lps, settings_from_kwargs(tol, max_iters));
        },
        py::arg("lps"), py::arg("tol") = -1.0, py::arg("max_iters") = 200);
    m.def("check_kkt", &check_kkt, py::arg("lp"), py::arg("solution"));
    m.def("vertex_enumeration_solve", &vertex_enumeration_solve, py::arg("lp"),
          "Brute-force oracle for small LPs");
    m.def("degeneracy_report", &degeneracy_report, py::arg("lp"), py::arg("solution"),
          py::arg("tol_active") = -1.0);

    py::class_<CoefficientJacobians>(m, "CoefficientJacobians")
        .def_readonly("dc", &CoefficientJacobians::dc)
        .def_readonly("dA", &CoefficientJacobians::dA)
        .def_readonly("db", &CoefficientJacobians::db)
        .def_readonly("dG", &CoefficientJacobians::dG)
        .def_readonly("dh", &CoefficientJacobians::dh)
        .def_readonly("degenerate_warning", &CoefficientJacobians::degenerate_warning);

    m.def("direct_objective_error_grads", &direct_objective_error_grads, py::arg("lp"),
          py::arg("solution"), py::arg("x_obs"));
    m.def("aoe_coefficient_grads", &aoe_coefficient_grads, py::arg("lp"), py::arg("solution"),
          py::arg("x_obs"));
    m.def("implicit_grads", &implicit_grads, py::arg("lp"), py::arg("solution"),
          py::arg("dl_dx"));
    m.def("aoe_implicit_grads", &aoe_implicit_grads, py::arg("lp"), py::arg("solution"),
          py::arg("x_obs"));
    m.def(
        "finite_difference_grads",
        [](const LinearProgram& lp, const Vector& x_obs, const std::string& loss, double step) {
            return finite_difference_grads(lp, x_obs,
                                           loss == "sde" ? LossKind::Sde : LossKind::Aoe, step);
        },
        py::arg("lp"), py::arg("x_obs"), py::arg("loss") = "aoe", py::arg("step") = 1e-5);

    py::class_<ModelDims>(m, "ModelDims")
        .def_readonly("D", &ModelDims::D)
        .def_readonly("M1", &ModelDims::M1)
        .def_readonly("M2", &ModelDims::M2)
        .def_readonly("K", &ModelDims::K)
        .def_readonly("dim_u", &ModelDims::dim_u);

    py::class_<ParametricModel>(m, "ParametricModel")
        .def_readonly("name", &ParametricModel::name)
        .def_readonly("dims", &ParametricModel::dims)
        .def_property_readonly(
            "true_w",
            [](const ParametricModel& mdl) -> std::optional<Vector> { return mdl.true_w; })
        .def("coefficients", &ParametricModel::lp_at, py::arg("u"), py::arg("w"),
             "LP coefficients at (u, w)")
        .def(
            "dataset",
            [](const ParametricModel& mdl, Index n, std::uint64_t seed) {
                Rng rng(seed);
                std::vector<std::pair<Vector, Vector>> out;
                for (const auto& s : generate_dataset(mdl, n, rng))
                    out.emplace_back(s.u, s.x_obs);
                return out;
            },
            py::arg("n"), py::arg("seed") = 0,
            "Samples (u, x_obs) pairs by solving at true_w");

    m.def("figure1_model", &figure1_model);
    m.def("figure5_model", &figure5_model);
    m.def(
        "synthetic_plp_generator",
        [](Index d, Index m1, Index m2, Index k, Index dim_u, std::uint64_t seed) {
            return synthetic_plp_generator({d, m1, m2, k, dim_u, seed});
        },
        py::arg("d") = 10, py::arg("m1") = 80, py::arg("m2") = 0, py::arg("k") = 6,
        py::arg("dim_u") = 2, py::arg("seed") = 0);
    m.def("full_coefficient_model", &full_coefficient_model, py::arg("base"));
    m.def("nguyen_dupuis_model", &nguyen_dupuis_model, py::arg("seed") = 0);

    m.def(
        "outer_objective",
        [](const ParametricModel& model, const std::vector<std::pair<Vector, Vector>>& train,
           const Vector& w, const std::string& loss, const std::string& method) {
            IlopProblem problem;
            problem.model = model;
            for (const auto& [u, x_obs] : train) problem.train.push_back({u, x_obs});
            problem.loss = loss == "sde" ? Loss::Sde : Loss::Aoe;
            if (method == "implicit") problem.grad_method = GradMethod::Implicit;
            if (method == "fd") problem.grad_method = GradMethod::FiniteDifference;
            const OuterEval eval = outer_objective(problem, w, true);
            return std::make_pair(eval.f, eval.grad);
        },
        py::arg("model"), py::arg("train"), py::arg("w"), py::arg("loss") = "aoe",
        py::arg("method") = "direct",
        "Mean training loss and its gradient at w");

    m.def(
        "learn",
        [](const py::dict& config) {
            const py::object dumps = py::module_::import("json").attr("dumps");
            const std::string as_text = dumps(config).cast<std::string>();
            const TrialResult result = run_trial(trial_config_from_json(Json::parse(as_text)));
            return json_to_py(to_json(result, true));
        },
        py::arg("config"),
        "Runs one learning trial from a config dict; see the CLI learn subcommand");

    m.def("figure5_reproduction", [] { return json_to_py(figure5_reproduction().to_json()); });
}
