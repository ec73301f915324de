#include "invlp/ipm.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "invlp/lp_core.hpp"
#include "invlp/parallel.hpp"

namespace invlp {

void IpmSettings::validate() const {
    if (max_iters < 1) throw std::invalid_argument("IpmSettings: max_iters must be >= 1");
    if (tol_gap <= 0 || tol_primal <= 0 || tol_dual <= 0)
        throw std::invalid_argument("IpmSettings: tolerances must be positive");
    if (step_fraction <= 0 || step_fraction >= 1)
        throw std::invalid_argument("IpmSettings: step_fraction must lie in (0,1)");
    if (inf_ratio <= 1) throw std::invalid_argument("IpmSettings: inf_ratio must exceed 1");
}

namespace {

// Homogeneous self-dual point. x and nu are free, the rest stay positive.
struct Iterate {
    Vector x, nu, y, s;
    double tau = 1.0, kappa = 1.0;

    double mu(Index m1) const { return (m1 > 0 ? s.dot(y) + tau * kappa : tau * kappa) / (m1 + 1); }
};

struct Residuals {
    Vector dual;   // A'y - G'nu + c*tau
    Vector eq;     // G x - h*tau
    Vector ineq;   // b*tau - A x - s
    double gap;    // -c'x + h'nu - b'y - kappa

    double norm() const {
        double n2 = gap * gap;
        n2 += dual.squaredNorm() + eq.squaredNorm() + ineq.squaredNorm();
        return std::sqrt(n2);
    }
};

Residuals compute_residuals(const LinearProgram& lp, const Iterate& it) {
    Residuals r;
    r.dual = lp.c * it.tau;
    if (lp.num_ineq() > 0) r.dual += lp.A.transpose() * it.y;
    if (lp.num_eq() > 0) r.dual -= lp.G.transpose() * it.nu;
    r.eq = lp.num_eq() > 0 ? Vector(lp.G * it.x - lp.h * it.tau) : Vector();
    r.ineq = lp.num_ineq() > 0 ? Vector(lp.b * it.tau - lp.A * it.x - it.s) : Vector();
    r.gap = -lp.c.dot(it.x) - it.kappa;
    if (lp.num_eq() > 0) r.gap += lp.h.dot(it.nu);
    if (lp.num_ineq() > 0) r.gap -= lp.b.dot(it.y);
    return r;
}

struct Step {
    Vector dx, dnu, dy, ds;
    double dtau = 0.0, dkappa = 0.0;
};

// Largest alpha in [0, cap] keeping (y, s, tau, kappa) nonnegative.
double max_step(const Iterate& it, const Step& st, double cap) {
    double alpha = cap;
    auto limit = [&alpha](double v, double dv) {
        if (dv < 0) alpha = std::min(alpha, -v / dv);
    };
    for (Index i = 0; i < it.y.size(); ++i) {
        limit(it.y(i), st.dy(i));
        limit(it.s(i), st.ds(i));
    }
    limit(it.tau, st.dtau);
    limit(it.kappa, st.dkappa);
    return std::max(alpha, 0.0);
}

PrimalDualSolution descale(const LinearProgram& lp, const Iterate& it, SolveStatus status,
                           int iterations, const std::vector<double>& residual_history) {
    const double tau = std::max(it.tau, 1e-300);
    PrimalDualSolution sol;
    sol.status = status;
    sol.x = it.x / tau;
    sol.lam = lp.num_ineq() > 0 ? Vector(-it.y / tau) : Vector(0);
    sol.nu = lp.num_eq() > 0 ? Vector(it.nu / tau) : Vector(0);
    sol.objective = lp.c.dot(sol.x);
    sol.iterations = iterations;
    sol.diag.tau = it.tau;
    sol.diag.kappa = it.kappa;
    sol.diag.mu = it.mu(lp.num_ineq());
    sol.diag.residual_history = residual_history;
    if (sol.x.allFinite() && sol.lam.allFinite() && sol.nu.allFinite())
        sol.kkt_residual = check_kkt(lp, sol).max();
    else
        sol.kkt_residual = std::numeric_limits<double>::infinity();
    return sol;
}

// Trivial LPs with no constraints never enter the embedding.
PrimalDualSolution solve_unconstrained(const LinearProgram& lp) {
    Iterate it;
    it.x = Vector::Zero(lp.dim());
    it.y = Vector(0);
    it.s = Vector(0);
    it.nu = Vector(0);
    const bool zero_cost = lp.dim() == 0 || lp.c.cwiseAbs().maxCoeff() == 0.0;
    return descale(lp, it, zero_cost ? SolveStatus::Optimal : SolveStatus::DualInfeasibleUnbounded,
                   0, {});
}

}  // namespace

PrimalDualSolution solve(const LinearProgram& lp, const IpmSettings& settings) {
    lp.validate();
    settings.validate();
    const Index d = lp.dim(), m1 = lp.num_ineq(), m2 = lp.num_eq();
    if (m1 + m2 == 0) return solve_unconstrained(lp);

    const double bh_scale = 1.0 + (m1 ? lp.b.cwiseAbs().maxCoeff() : 0.0) +
                            (m2 ? lp.h.cwiseAbs().maxCoeff() : 0.0);
    const double c_scale = 1.0 + (d ? lp.c.cwiseAbs().maxCoeff() : 0.0);

    Iterate it;
    it.x = Vector::Zero(d);
    it.nu = Vector::Zero(m2);
    it.y = Vector::Ones(m1);
    it.s = Vector::Ones(m1);

    std::vector<double> residual_history;
    residual_history.reserve(settings.max_iters + 1);
    const double res0 = compute_residuals(lp, it).norm();
    residual_history.push_back(res0);

    // Augmented Newton matrix over (dx, dnu, dy, dtau); ds and dkappa are
    // eliminated through the complementarity rows.
    const Index n = d + m2 + m1 + 1;
    Matrix M = Matrix::Zero(n, n);
    if (m2 > 0) {
        M.block(0, d, d, m2) = -lp.G.transpose();
        M.block(d, 0, m2, d) = lp.G;
        M.block(d, n - 1, m2, 1) = -lp.h;
        M.block(n - 1, d, 1, m2) = lp.h.transpose();
    }
    if (m1 > 0) {
        M.block(0, d + m2, d, m1) = lp.A.transpose();
        M.block(d + m2, 0, m1, d) = -lp.A;
        M.block(d + m2, n - 1, m1, 1) = lp.b;
        M.block(n - 1, d + m2, 1, m1) = -lp.b.transpose();
    }
    M.block(0, n - 1, d, 1) = lp.c;
    M.block(n - 1, 0, 1, d) = -lp.c.transpose();

    // Static regularization keeps the factorization nonsingular when the
    // constraint rows do not span the x-space (the matrix is skew plus a
    // nonnegative diagonal, so any positive shift makes it definite).
    const double reg = 1e-11 * (1.0 + std::max({c_scale, bh_scale,
                                                m1 ? lp.A.cwiseAbs().maxCoeff() : 0.0,
                                                m2 ? lp.G.cwiseAbs().maxCoeff() : 0.0}));
    Matrix M_reg(n, n);
    Eigen::PartialPivLU<Matrix> lu(n);
    Vector rhs(n), delta(n), refine(n);

    auto solve_newton = [&](const Vector& rd, const Vector& re, const Vector& ri,
                            double rg, const Vector& rsy, double rtk) -> Step {
        rhs.segment(0, d) = rd;
        if (m2 > 0) rhs.segment(d, m2) = re;
        if (m1 > 0)
            rhs.segment(d + m2, m1) = ri + (rsy.array() / it.y.array()).matrix();
        rhs(n - 1) = rg + rtk / it.tau;
        delta = lu.solve(rhs);
        refine = rhs - M_reg * delta;
        delta += lu.solve(refine);

        Step st;
        st.dx = delta.segment(0, d);
        st.dnu = m2 > 0 ? Vector(delta.segment(d, m2)) : Vector(0);
        st.dy = m1 > 0 ? Vector(delta.segment(d + m2, m1)) : Vector(0);
        st.dtau = delta(n - 1);
        if (m1 > 0)
            st.ds = ((rsy.array() - it.s.array() * st.dy.array()) / it.y.array()).matrix();
        else
            st.ds = Vector(0);
        st.dkappa = (rtk - it.kappa * st.dtau) / it.tau;
        return st;
    };

    int iter = 0;
    for (; iter < settings.max_iters; ++iter) {
        // Optimality test on the de-scaled candidate.
        PrimalDualSolution cand = descale(lp, it, SolveStatus::Optimal, iter, {});
        const KktResiduals kkt = check_kkt(lp, cand);
        double dual_obj = 0.0;
        if (m1 > 0) dual_obj += lp.b.dot(cand.lam);
        if (m2 > 0) dual_obj += lp.h.dot(cand.nu);
        const double rel_gap = std::abs(cand.objective - dual_obj) / (1.0 + std::abs(cand.objective));
        if (kkt.primal_ineq <= settings.tol_primal * bh_scale &&
            kkt.primal_eq <= settings.tol_primal * bh_scale &&
            kkt.dual <= settings.tol_dual * c_scale &&
            kkt.complementarity <= settings.tol_gap * (1.0 + std::abs(cand.objective)) &&
            rel_gap <= settings.tol_gap) {
            cand.diag.residual_history = residual_history;
            return cand;
        }

        // Infeasibility / unboundedness readout.
        if (it.kappa > settings.inf_ratio * it.tau) {
            double infeas_cert = -lp.c.dot(it.x);  // > 0: primal ray, unbounded
            double dual_cert = 0.0;                 // > 0: dual ray, infeasible
            if (m1 > 0) dual_cert -= lp.b.dot(it.y);
            if (m2 > 0) dual_cert += lp.h.dot(it.nu);
            const double yn = 1.0 + (m1 ? it.y.cwiseAbs().maxCoeff() : 0.0) +
                              (m2 ? it.nu.cwiseAbs().maxCoeff() : 0.0);
            const double xn = 1.0 + it.x.cwiseAbs().maxCoeff();
            const SolveStatus status = (dual_cert / (yn * bh_scale) >= infeas_cert / (xn * c_scale))
                                           ? SolveStatus::PrimalInfeasible
                                           : SolveStatus::DualInfeasibleUnbounded;
            return descale(lp, it, status, iter, residual_history);
        }

        const Residuals res = compute_residuals(lp, it);
        const double mu = it.mu(m1);

        if (m1 > 0)
            M.block(d + m2, d + m2, m1, m1) =
                Matrix((it.s.array() / it.y.array()).matrix().asDiagonal());
        M(n - 1, n - 1) = it.kappa / it.tau;
        M_reg = M;
        M_reg.diagonal().array() += reg;
        lu.compute(M_reg);

        // Predictor (affine scaling) direction.
        Vector rsy_aff = m1 > 0 ? Vector(-(it.s.array() * it.y.array()).matrix()) : Vector(0);
        const Step aff = solve_newton(-res.dual, -res.eq, -res.ineq, -res.gap, rsy_aff,
                                      -it.tau * it.kappa);
        if (!aff.dx.allFinite() || !std::isfinite(aff.dtau))
            return descale(lp, it, SolveStatus::NumericalFailure, iter, residual_history);

        const double alpha_aff = max_step(it, aff, 1.0);
        double mu_aff = (it.tau + alpha_aff * aff.dtau) * (it.kappa + alpha_aff * aff.dkappa);
        if (m1 > 0)
            mu_aff += (it.s + alpha_aff * aff.ds).dot(it.y + alpha_aff * aff.dy);
        mu_aff /= (m1 + 1);
        double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);
        sigma = std::clamp(sigma, 1e-8, 1.0 - 1e-8);
        const double eta = 1.0 - sigma;

        // Combined centering + corrector direction.
        Vector rsy = m1 > 0
            ? Vector((sigma * mu - it.s.array() * it.y.array() - aff.ds.array() * aff.dy.array()).matrix())
            : Vector(0);
        const double rtk = sigma * mu - it.tau * it.kappa - aff.dtau * aff.dkappa;
        const Step step = solve_newton(-eta * res.dual, -eta * res.eq, -eta * res.ineq,
                                       -eta * res.gap, rsy, rtk);
        if (!step.dx.allFinite() || !std::isfinite(step.dtau))
            return descale(lp, it, SolveStatus::NumericalFailure, iter, residual_history);

        const double alpha = settings.step_fraction * max_step(it, step, 1.0 / settings.step_fraction);
        if (alpha < 1e-13)
            return descale(lp, it, SolveStatus::NumericalFailure, iter, residual_history);

        it.x += alpha * step.dx;
        if (m2 > 0) it.nu += alpha * step.dnu;
        if (m1 > 0) {
            it.y += alpha * step.dy;
            it.s += alpha * step.ds;
        }
        it.tau += alpha * step.dtau;
        it.kappa += alpha * step.dkappa;
        if (it.tau <= 0 || it.kappa <= 0 || !it.x.allFinite())
            return descale(lp, it, SolveStatus::NumericalFailure, iter, residual_history);

        residual_history.push_back(compute_residuals(lp, it).norm());
    }

    return descale(lp, it, SolveStatus::IterationLimit, iter, residual_history);
}

std::vector<PrimalDualSolution> solve_batch(const std::vector<LinearProgram>& lps,
                                            const IpmSettings& settings) {
    std::vector<PrimalDualSolution> out(lps.size());
    parallel_for(static_cast<Index>(lps.size()),
                 [&](Index i) { out[i] = solve(lps[i], settings); });
    return out;
}

}  // namespace invlp
