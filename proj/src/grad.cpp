#include "invlp/grad.hpp"

#include <Eigen/LU>
#include <cmath>
#include <limits>
#include <string>

#include "invlp/lp_core.hpp"

namespace invlp {

CoefficientJacobians CoefficientJacobians::zero(const LinearProgram& lp) {
    CoefficientJacobians j;
    j.dc = Vector::Zero(lp.dim());
    j.dA = Matrix::Zero(lp.num_ineq(), lp.dim());
    j.db = Vector::Zero(lp.num_ineq());
    j.dG = Matrix::Zero(lp.num_eq(), lp.dim());
    j.dh = Vector::Zero(lp.num_eq());
    return j;
}

CoefficientJacobians& CoefficientJacobians::operator+=(const CoefficientJacobians& o) {
    dc += o.dc;
    dA += o.dA;
    db += o.db;
    dG += o.dG;
    dh += o.dh;
    degenerate_warning = degenerate_warning || o.degenerate_warning;
    return *this;
}

CoefficientJacobians& CoefficientJacobians::operator*=(double a) {
    dc *= a;
    dA *= a;
    db *= a;
    dG *= a;
    dh *= a;
    return *this;
}

bool CoefficientJacobians::all_finite() const {
    return dc.allFinite() && dA.allFinite() && db.allFinite() && dG.allFinite() && dh.allFinite();
}

namespace {

void require_optimal(const PrimalDualSolution& sol, const char* who) {
    if (sol.status != SolveStatus::Optimal)
        throw std::invalid_argument(std::string(who) + ": solution status must be Optimal");
}

double sign_of(double z) { return z > 0 ? 1.0 : (z < 0 ? -1.0 : 0.0); }

}  // namespace

CoefficientJacobians direct_objective_error_grads(const LinearProgram& lp,
                                                  const PrimalDualSolution& sol,
                                                  const Vector& x_obs) {
    lp.validate();
    require_optimal(sol, "direct_objective_error_grads");
    if (x_obs.size() != lp.dim())
        throw std::invalid_argument("direct_objective_error_grads: x_obs dimension mismatch");

    CoefficientJacobians j;
    j.method = GradMethod::Direct;
    j.dc = x_obs - sol.x;
    j.dA = sol.lam * sol.x.transpose();
    j.db = -sol.lam;
    j.dG = sol.nu * sol.x.transpose();
    j.dh = -sol.nu;
    j.degenerate_warning = degeneracy_report(lp, sol).is_degenerate;
    return j;
}

CoefficientJacobians aoe_coefficient_grads(const LinearProgram& lp, const PrimalDualSolution& sol,
                                           const Vector& x_obs) {
    CoefficientJacobians j = direct_objective_error_grads(lp, sol, x_obs);
    const double z = lp.c.dot(x_obs - sol.x);
    j *= sign_of(z);
    return j;
}

CoefficientJacobians implicit_grads(const LinearProgram& lp, const PrimalDualSolution& sol,
                                    const Vector& dl_dx) {
    lp.validate();
    require_optimal(sol, "implicit_grads");
    if (dl_dx.size() != lp.dim())
        throw std::invalid_argument("implicit_grads: dl_dx dimension mismatch");

    const Index d = lp.dim(), m1 = lp.num_ineq(), m2 = lp.num_eq();
    const Index n = d + m1 + m2;

    // Differentiated KKT system over (dx, dlam, dnu); equation blocks are
    // ordered (equality rows, complementarity rows, stationarity rows).
    Matrix K = Matrix::Zero(n, n);
    if (m2 > 0) K.block(0, 0, m2, d) = lp.G;
    if (m1 > 0) {
        const Vector slack_viol = lp.A * sol.x - lp.b;
        K.block(m2, 0, m1, d) = sol.lam.asDiagonal() * lp.A;
        K.block(m2, d, m1, m1) = Matrix(slack_viol.asDiagonal());
        K.block(m2 + m1, d, d, m1) = lp.A.transpose();
    }
    if (m2 > 0) K.block(m2 + m1, d + m1, d, m2) = lp.G.transpose();

    Eigen::PartialPivLU<Matrix> lu(K.transpose());
    const double rcond = lu.rcond();
    if (!(rcond > 1e-14)) throw IllConditionedKkt(rcond);

    Vector rhs = Vector::Zero(n);
    rhs.head(d) = dl_dx;
    Vector u = lu.solve(rhs);
    u += lu.solve(rhs - K.transpose() * u);  // one refinement pass
    if (!u.allFinite()) throw IllConditionedKkt(rcond);

    const Vector u_eq = u.head(m2);
    const Vector u_comp = u.segment(m2, m1);
    const Vector u_stat = u.tail(d);

    CoefficientJacobians j = CoefficientJacobians::zero(lp);
    j.method = GradMethod::Implicit;
    j.dc = u_stat;
    if (m1 > 0) {
        j.db = sol.lam.cwiseProduct(u_comp);
        j.dA = -j.db * sol.x.transpose() - sol.lam * u_stat.transpose();
    }
    if (m2 > 0) {
        j.dh = u_eq;
        j.dG = -u_eq * sol.x.transpose() - sol.nu * u_stat.transpose();
    }
    j.degenerate_warning = degeneracy_report(lp, sol).is_degenerate;
    return j;
}

CoefficientJacobians aoe_implicit_grads(const LinearProgram& lp, const PrimalDualSolution& sol,
                                        const Vector& x_obs) {
    const double z = lp.c.dot(x_obs - sol.x);
    const double sgn = sign_of(z);
    CoefficientJacobians j = implicit_grads(lp, sol, Vector(-sgn * lp.c));
    j.dc += sgn * (x_obs - sol.x);  // explicit dependence of z on c
    return j;
}

namespace {

double loss_at(const LinearProgram& lp, const Vector& x_obs, LossKind loss,
               const IpmSettings& settings, const std::string& coeff_name) {
    const PrimalDualSolution sol = solve(lp, settings);
    if (sol.status != SolveStatus::Optimal)
        throw std::runtime_error("finite_difference_grads: perturbed solve not Optimal at coefficient " +
                                 coeff_name + " (status " + to_string(sol.status) + ")");
    if (loss == LossKind::Aoe) return std::abs(lp.c.dot(x_obs - sol.x));
    return 0.5 * (sol.x - x_obs).squaredNorm();
}

}  // namespace

CoefficientJacobians finite_difference_grads(const LinearProgram& lp, const Vector& x_obs,
                                             LossKind loss, double step,
                                             const IpmSettings& solver) {
    lp.validate();
    if (x_obs.size() != lp.dim())
        throw std::invalid_argument("finite_difference_grads: x_obs dimension mismatch");
    if (step <= 0) throw std::invalid_argument("finite_difference_grads: step must be positive");

    CoefficientJacobians j = CoefficientJacobians::zero(lp);
    j.method = GradMethod::FiniteDifference;
    LinearProgram pert = lp;

    auto central = [&](double& entry, const std::string& name) {
        const double saved = entry;
        entry = saved + step;
        const double fp = loss_at(pert, x_obs, loss, solver, name);
        entry = saved - step;
        const double fm = loss_at(pert, x_obs, loss, solver, name);
        entry = saved;
        return (fp - fm) / (2.0 * step);
    };

    for (Index i = 0; i < lp.dim(); ++i)
        j.dc(i) = central(pert.c(i), "c(" + std::to_string(i) + ")");
    for (Index r = 0; r < lp.num_ineq(); ++r) {
        for (Index cidx = 0; cidx < lp.dim(); ++cidx)
            j.dA(r, cidx) = central(pert.A(r, cidx),
                                    "A(" + std::to_string(r) + "," + std::to_string(cidx) + ")");
        j.db(r) = central(pert.b(r), "b(" + std::to_string(r) + ")");
    }
    for (Index r = 0; r < lp.num_eq(); ++r) {
        for (Index cidx = 0; cidx < lp.dim(); ++cidx)
            j.dG(r, cidx) = central(pert.G(r, cidx),
                                    "G(" + std::to_string(r) + "," + std::to_string(cidx) + ")");
        j.dh(r) = central(pert.h(r), "h(" + std::to_string(r) + ")");
    }
    return j;
}

namespace {

// Exact uniqueness of x* for small instances: unique iff there is no
// lineality direction, exactly one optimal vertex, and no zero-cost
// recession ray.
bool unique_optimum_exact(const LinearProgram& lp, const PrimalDualSolution& sol) {
    const VertexEnumerationData data = enumerate_feasible_vertices(lp);
    if (data.lineality_dim > 0) return false;
    if (data.vertices.empty()) return false;

    double best = std::numeric_limits<double>::infinity();
    for (const Vector& v : data.vertices) best = std::min(best, lp.c.dot(v));
    const double tol = 1e-7 * (1.0 + std::abs(best));
    int optimal_count = 0;
    for (const Vector& v : data.vertices)
        if (lp.c.dot(v) <= best + tol) ++optimal_count;
    if (optimal_count != 1) return false;

    // Zero-cost recession rays: vertices of {A d <= 0, G d = 0, c'd = 0,
    // |d_i| <= 1} other than the origin.
    const Index d = lp.dim(), m1 = lp.num_ineq(), m2 = lp.num_eq();
    LinearProgram ray;
    ray.c = Vector::Zero(d);
    ray.A.resize(m1 + 2 * d, d);
    if (m1 > 0) ray.A.topRows(m1) = lp.A;
    ray.A.middleRows(m1, d) = Matrix::Identity(d, d);
    ray.A.bottomRows(d) = -Matrix::Identity(d, d);
    ray.b = Vector::Zero(m1 + 2 * d);
    ray.b.tail(2 * d).setOnes();
    ray.G.resize(m2 + 1, d);
    if (m2 > 0) ray.G.topRows(m2) = lp.G;
    ray.G.row(m2) = lp.c.transpose();
    ray.h = Vector::Zero(m2 + 1);

    for (const Vector& v : enumerate_feasible_vertices(ray).vertices)
        if (v.cwiseAbs().maxCoeff() > 1e-7) return false;
    (void)sol;
    return true;
}

}  // namespace

UniquenessFlags uniqueness_flags(const LinearProgram& lp, const PrimalDualSolution& sol,
                                 const DegeneracyReport& report) {
    lp.validate();
    require_optimal(sol, "uniqueness_flags");

    UniquenessFlags flags;
    flags.grad_b_h_unique = !report.is_degenerate;

    const bool oracle_sized = lp.dim() <= 6 && lp.num_ineq() + lp.num_eq() <= 14;
    if (oracle_sized)
        flags.grad_c_unique = unique_optimum_exact(lp, sol);
    else
        flags.grad_c_unique = report.active_rank == static_cast<int>(lp.dim());

    const bool zero_cost = lp.dim() == 0 || lp.c.cwiseAbs().maxCoeff() == 0.0;
    flags.grad_A_G_unique = flags.grad_c_unique || zero_cost;
    return flags;
}

}  // namespace invlp
