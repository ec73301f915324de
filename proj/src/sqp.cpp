#include "invlp/sqp.hpp"

#include <Eigen/Cholesky>
#include <chrono>
#include <cmath>

#include "invlp/qp.hpp"

namespace invlp {

const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::KktTolerance: return "kkt_tolerance";
        case StopReason::StepTolerance: return "step_tolerance";
        case StopReason::IterationLimit: return "iteration_limit";
        case StopReason::TimeBudget: return "time_budget";
        case StopReason::SampleLimit: return "sample_limit";
        case StopReason::LineSearchFailure: return "line_search_failure";
    }
    return "unknown";
}

Vector NlpProblem::g(const Vector& w) const {
    Index extra = 0;
    for (const auto& row : nonlinear)
        if (!row.equality) ++extra;
    Vector out(Ain.rows() + extra);
    if (Ain.rows() > 0) out.head(Ain.rows()) = Ain * w - bin;
    Index at = Ain.rows();
    for (const auto& row : nonlinear)
        if (!row.equality) out(at++) = row.residual(w);
    return out;
}

Matrix NlpProblem::grad_g(const Vector& w) const {
    Index extra = 0;
    for (const auto& row : nonlinear)
        if (!row.equality) ++extra;
    Matrix out(Ain.rows() + extra, dim);
    if (Ain.rows() > 0) out.topRows(Ain.rows()) = Ain;
    Index at = Ain.rows();
    for (const auto& row : nonlinear)
        if (!row.equality) out.row(at++) = row.jacobian(w).transpose();
    return out;
}

Vector NlpProblem::h(const Vector& w) const {
    Index extra = 0;
    for (const auto& row : nonlinear)
        if (row.equality) ++extra;
    Vector out(Aeq.rows() + extra);
    if (Aeq.rows() > 0) out.head(Aeq.rows()) = Aeq * w - beq;
    Index at = Aeq.rows();
    for (const auto& row : nonlinear)
        if (row.equality) out(at++) = row.residual(w);
    return out;
}

Matrix NlpProblem::grad_h(const Vector& w) const {
    Index extra = 0;
    for (const auto& row : nonlinear)
        if (row.equality) ++extra;
    Matrix out(Aeq.rows() + extra, dim);
    if (Aeq.rows() > 0) out.topRows(Aeq.rows()) = Aeq;
    Index at = Aeq.rows();
    for (const auto& row : nonlinear)
        if (row.equality) out.row(at++) = row.jacobian(w).transpose();
    return out;
}

double NlpProblem::violation(const Vector& w) const {
    double v = 0.0;
    const Vector gv = g(w);
    if (gv.size() > 0) v = std::max(v, gv.maxCoeff());
    const Vector hv = h(w);
    if (hv.size() > 0) v = std::max(v, hv.cwiseAbs().maxCoeff());
    return v;
}

NlpProblem NlpProblem::unconstrained(
    Index dim, std::function<std::pair<double, Vector>(const Vector&, bool)> objective) {
    NlpProblem p;
    p.dim = dim;
    p.objective = std::move(objective);
    p.Ain = Matrix(0, dim);
    p.bin = Vector(0);
    p.Aeq = Matrix(0, dim);
    p.beq = Vector(0);
    return p;
}

namespace {

double l1_violation(const Vector& g, const Vector& h) {
    double v = 0.0;
    for (Index i = 0; i < g.size(); ++i) v += std::max(0.0, g(i));
    for (Index i = 0; i < h.size(); ++i) v += std::abs(h(i));
    return v;
}

// Elastic relaxation of an inconsistent subproblem: slack on every
// inequality row and a +/- pair on every equality row, priced at big_m.
QpResult solve_relaxed_subproblem(const Matrix& B, const Vector& grad, const Matrix& Gin,
                                  const Vector& g0, const Matrix& Geq, const Vector& h0,
                                  double big_m) {
    const Index k = grad.size(), m1 = Gin.rows(), m2 = Geq.rows();
    const Index n = k + m1 + 2 * m2;
    Matrix Bx = Matrix::Zero(n, n);
    Bx.topLeftCorner(k, k) = B;
    Bx.diagonal().tail(m1 + 2 * m2).setConstant(1e-8 * big_m);
    Vector gx = Vector::Zero(n);
    gx.head(k) = grad;
    gx.tail(m1 + 2 * m2).setConstant(big_m);

    // Gin d - t <= -g0, t >= 0, Geq d + tp - tm = -h0, tp >= 0, tm >= 0.
    Matrix Ain = Matrix::Zero(m1 + m1 + 2 * m2, n);
    Vector bin = Vector::Zero(Ain.rows());
    Ain.topLeftCorner(m1, k) = Gin;
    Ain.block(0, k, m1, m1) = -Matrix::Identity(m1, m1);
    bin.head(m1) = g0;
    Ain.block(m1, k, m1 + 2 * m2, m1 + 2 * m2) = -Matrix::Identity(m1 + 2 * m2, m1 + 2 * m2);
    Matrix Aeq = Matrix::Zero(m2, n);
    Vector beq = Vector::Zero(m2);
    if (m2 > 0) {
        Aeq.leftCols(k) = Geq;
        Aeq.block(0, k + m1, m2, m2) = Matrix::Identity(m2, m2);
        Aeq.block(0, k + m1 + m2, m2, m2) = -Matrix::Identity(m2, m2);
        beq = h0;
    }
    QpResult full = solve_qp_subproblem(Bx, gx, Ain, bin, Aeq, beq);
    QpResult out;
    out.feasible = full.feasible;
    out.iterations = full.iterations;
    if (full.feasible) {
        out.delta = full.delta.head(k);
        out.mult_ineq = full.mult_ineq.head(m1);
        out.mult_eq = full.mult_eq;
    }
    return out;
}

}  // namespace

NlpOutcome sqp_solve(const NlpProblem& problem, Vector w0, const SqpOptions& opts) {
    if (w0.size() != problem.dim) throw std::invalid_argument("sqp_solve: w0 dimension mismatch");
    if (!w0.allFinite()) throw std::invalid_argument("sqp_solve: w0 must be finite");
    const auto t_start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    };

    NlpOutcome out;
    out.stop = StopReason::IterationLimit;

    Vector w = std::move(w0);
    auto [f, grad] = problem.objective(w, true);
    ++out.objective_evals;
    Matrix B = Matrix::Identity(problem.dim, problem.dim);  // Lagrangian Hessian approx
    double rho = opts.merit_rho0;
    Vector mult_in, mult_eq;

    const double feas_tol = 1e-8;
    auto consider_best = [&](const Vector& wi, double fi, double viol) {
        const bool best_feasible = out.max_violation <= feas_tol;
        const bool this_feasible = viol <= feas_tol;
        bool better = false;
        if (this_feasible && !best_feasible)
            better = true;
        else if (this_feasible == best_feasible)
            better = this_feasible ? (fi < out.f)
                                   : (viol < out.max_violation ||
                                      (viol == out.max_violation && fi < out.f));
        if (better) {
            out.w = wi;
            out.f = fi;
            out.max_violation = viol;
        }
    };

    for (int iter = 0; iter < opts.max_iters; ++iter) {
        out.iterations = iter + 1;
        const Vector gv = problem.g(w);
        const Vector hv = problem.h(w);
        const Matrix Jg = problem.grad_g(w);
        const Matrix Jh = problem.grad_h(w);
        const double max_g = gv.size() ? std::max(0.0, gv.maxCoeff()) : 0.0;
        const double norm_h = hv.size() ? hv.cwiseAbs().maxCoeff() : 0.0;
        const double viol = std::max(max_g, norm_h);
        consider_best(w, f, viol);

        // KKT residual with the latest multipliers.
        Vector stat = grad;
        if (mult_in.size() == gv.size() && gv.size() > 0) stat += Jg.transpose() * mult_in;
        if (mult_eq.size() == hv.size() && hv.size() > 0) stat += Jh.transpose() * mult_eq;
        double comp = 0.0;
        if (mult_in.size() == gv.size())
            for (Index i = 0; i < gv.size(); ++i) comp = std::max(comp, std::abs(mult_in(i) * gv(i)));
        const double kkt_res = std::max({stat.cwiseAbs().maxCoeff(), viol, comp});

        SqpTraceRow row;
        row.iter = iter;
        row.wall_time_s = elapsed();
        row.f = f;
        row.max_g = max_g;
        row.norm_h = norm_h;
        row.merit_rho = rho;
        row.kkt_residual = kkt_res;

        if (kkt_res <= opts.kkt_tol) {
            out.trace.push_back(row);
            out.stop = StopReason::KktTolerance;
            break;
        }
        if (elapsed() > opts.time_budget_s) {
            out.trace.push_back(row);
            out.stop = StopReason::TimeBudget;
            break;
        }

        // Quadratic subproblem (the QP contract uses B_qp = B/2 so that the
        // implied Hessian 2*B_qp matches the BFGS matrix).
        QpResult qp;
        try {
            qp = solve_qp_subproblem(0.5 * B, grad, Jg, gv, Jh, hv);
        } catch (const std::runtime_error&) {
            qp.feasible = false;
        }
        if (!qp.feasible)
            qp = solve_relaxed_subproblem(0.5 * B, grad, Jg, gv, Jh, hv,
                                          1e4 * (1.0 + rho + grad.cwiseAbs().maxCoeff()));
        if (!qp.feasible || !qp.delta.allFinite()) {
            out.trace.push_back(row);
            out.stop = StopReason::LineSearchFailure;
            break;
        }
        const Vector delta = qp.delta;
        mult_in = qp.mult_ineq;
        mult_eq = qp.mult_eq;

        const double mult_norm =
            std::max(mult_in.size() ? mult_in.cwiseAbs().maxCoeff() : 0.0,
                     mult_eq.size() ? mult_eq.cwiseAbs().maxCoeff() : 0.0);
        rho = std::max(rho, 1.5 * mult_norm + opts.merit_rho0);
        row.merit_rho = rho;

        const double phi0 = f + rho * l1_violation(gv, hv);
        const double dir_deriv = grad.dot(delta) - rho * l1_violation(gv, hv);
        row.merit = phi0;

        // Armijo backtracking on the L1 merit.
        double alpha = 1.0;
        double f_new = f;
        bool accepted = false;
        Vector w_new;
        while (alpha >= 1e-8) {
            w_new = w + alpha * delta;
            const double f_trial = problem.objective(w_new, false).first;
            ++out.objective_evals;
            const double phi_trial =
                f_trial + rho * l1_violation(problem.g(w_new), problem.h(w_new));
            if (std::isfinite(phi_trial) && phi_trial <= phi0 + 1e-4 * alpha * dir_deriv) {
                f_new = f_trial;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            out.trace.push_back(row);
            out.stop = StopReason::LineSearchFailure;
            break;
        }
        row.step_alpha = alpha;

        auto [f_next, grad_next] = problem.objective(w_new, true);
        ++out.objective_evals;
        f_new = f_next;

        // Damped BFGS on the Lagrangian gradient difference.
        const Vector s = alpha * delta;
        Vector lag_new = grad_next;
        Vector lag_old = grad;
        {
            const Matrix Jg_new = problem.grad_g(w_new);
            const Matrix Jh_new = problem.grad_h(w_new);
            if (mult_in.size() == Jg_new.rows() && Jg_new.rows() > 0) {
                lag_new += Jg_new.transpose() * mult_in;
                lag_old += Jg.transpose() * mult_in;
            }
            if (mult_eq.size() == Jh_new.rows() && Jh_new.rows() > 0) {
                lag_new += Jh_new.transpose() * mult_eq;
                lag_old += Jh.transpose() * mult_eq;
            }
        }
        Vector y = lag_new - lag_old;
        const double sBs = s.dot(B * s);
        double sy = s.dot(y);
        if (sBs > 0 && sy < 0.2 * sBs) {  // Powell damping
            const double theta = 0.8 * sBs / (sBs - sy);
            y = theta * y + (1.0 - theta) * (B * s);
            sy = s.dot(y);
        }
        if (sBs > 1e-16 && sy > 1e-16) {
            const Vector Bs = B * s;
            B -= (Bs * Bs.transpose()) / sBs;
            B += (y * y.transpose()) / sy;
            B = 0.5 * (B + B.transpose());
        }
        // Eigenvalue floor.
        {
            Matrix shifted = B - 1e-10 * Matrix::Identity(problem.dim, problem.dim);
            Eigen::LLT<Matrix> llt(shifted);
            if (llt.info() != Eigen::Success) {
                double bump = 1e-8;
                for (int tries = 0; tries < 60; ++tries) {
                    Matrix candidate = B + bump * Matrix::Identity(problem.dim, problem.dim);
                    shifted = candidate - 1e-10 * Matrix::Identity(problem.dim, problem.dim);
                    llt.compute(shifted);
                    if (llt.info() == Eigen::Success) {
                        B = candidate;
                        break;
                    }
                    bump *= 4.0;
                }
                if (llt.info() != Eigen::Success)
                    B = Matrix::Identity(problem.dim, problem.dim);
            }
        }

        w = w_new;
        f = f_new;
        grad = grad_next;
        out.trace.push_back(row);

        if (s.cwiseAbs().maxCoeff() <= opts.step_tol) {
            out.stop = StopReason::StepTolerance;
            break;
        }
    }

    // Account for the final iterate.
    consider_best(w, f, problem.violation(w));
    if (out.w.size() == 0) {
        out.w = w;
        out.f = f;
        out.max_violation = problem.violation(w);
    }
    return out;
}

NlpOutcome random_search(const NlpProblem& problem, const WSampler& sampler,
                         const RandomSearchOptions& opts) {
    const auto t_start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    };

    Rng rng(opts.seed);
    NlpOutcome out;
    out.stop = StopReason::SampleLimit;
    const double feas_tol = 1e-8;

    for (long i = 0; i < opts.max_samples; ++i) {
        if (elapsed() > opts.time_budget_s) {
            out.stop = StopReason::TimeBudget;
            break;
        }
        const Vector w = sampler(rng);
        if (w.size() != problem.dim)
            throw std::invalid_argument("random_search: sampler dimension mismatch");
        const double f = problem.objective(w, false).first;
        ++out.objective_evals;
        const double viol = problem.violation(w);

        SqpTraceRow row;
        row.iter = static_cast<int>(i);
        row.wall_time_s = elapsed();
        row.f = f;
        const Vector gv = problem.g(w);
        const Vector hv = problem.h(w);
        row.max_g = gv.size() ? std::max(0.0, gv.maxCoeff()) : 0.0;
        row.norm_h = hv.size() ? hv.cwiseAbs().maxCoeff() : 0.0;
        out.trace.push_back(row);
        ++out.iterations;

        const bool best_feasible = out.max_violation <= feas_tol;
        const bool this_feasible = viol <= feas_tol;
        bool better = false;
        if (this_feasible && !best_feasible)
            better = true;
        else if (this_feasible && best_feasible)
            better = f < out.f;
        else if (!this_feasible && !best_feasible)
            better = viol < out.max_violation || (viol == out.max_violation && f < out.f);
        if (better) {
            out.w = w;
            out.f = f;
            out.max_violation = viol;
        }
    }
    return out;
}

GradientFreeSolver make_random_search() {
    return [](const NlpProblem& p, const WSampler& s, const RandomSearchOptions& o) {
        return random_search(p, s, o);
    };
}

}  // namespace invlp
