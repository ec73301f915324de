#include "invlp/ilop.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <cstring>

#include "invlp/lp_core.hpp"
#include "invlp/parallel.hpp"

namespace invlp {

const char* to_string(Loss l) { return l == Loss::Aoe ? "aoe" : "sde"; }

Vector ReducedParametrization::initial_reduced(const Vector& w) const {
    if (reduced_dim() == 0) return Vector(0);
    return P.colPivHouseholderQr().solve(w - offset);
}

GradMethod IlopProblem::effective_grad_method() const {
    if (grad_method.has_value()) return *grad_method;
    return loss == Loss::Aoe ? GradMethod::Direct : GradMethod::Implicit;
}

void IlopProblem::validate() const {
    if (train.empty()) throw std::invalid_argument("IlopProblem: training set is empty");
    for (const auto& s : train) {
        if (s.x_obs.size() != model.dims.D)
            throw std::invalid_argument("IlopProblem: x_obs dimension mismatch");
        if (s.u.size() != model.dims.dim_u)
            throw std::invalid_argument("IlopProblem: u dimension mismatch");
    }
    if (regularizer_weight < 0)
        throw std::invalid_argument("IlopProblem: regularizer_weight must be >= 0");
}

double loss_value(const PrimalDualSolution& sol, const Vector& x_obs, const LinearProgram& lp,
                  Loss loss, double large_loss_cap) {
    double value;
    if (!sol.x.allFinite()) {
        value = large_loss_cap;
    } else if (loss == Loss::Aoe) {
        value = std::abs(lp.c.dot(x_obs - sol.x));
    } else {
        value = 0.5 * (sol.x - x_obs).squaredNorm();
    }
    if (sol.status != SolveStatus::Optimal)
        value = std::min(value, large_loss_cap);
    return std::isfinite(value) ? value : large_loss_cap;
}

namespace {

// Contracts loss-coefficient jacobians with the model's per-w sensitivities.
Vector chain_to_w(const CoefficientJacobians& jac, const ParametricModel& model, const Vector& u,
                  const Vector& w) {
    if (model.packs_coefficients) {
        LinearProgram as_lp;
        as_lp.c = jac.dc;
        as_lp.A = jac.dA;
        as_lp.b = jac.db;
        as_lp.G = jac.dG;
        as_lp.h = jac.dh;
        return pack_coefficients(as_lp);
    }
    const std::vector<CoeffSensitivity> sens = model.coeff_jacobians(u, w);
    Vector grad = Vector::Zero(model.dims.K);
    for (Index k = 0; k < model.dims.K; ++k) {
        double gk = jac.dc.dot(sens[k].dc);
        if (jac.dA.size() > 0) gk += (jac.dA.array() * sens[k].dA.array()).sum();
        if (jac.db.size() > 0) gk += jac.db.dot(sens[k].db);
        if (jac.dG.size() > 0) gk += (jac.dG.array() * sens[k].dG.array()).sum();
        if (jac.dh.size() > 0) gk += jac.dh.dot(sens[k].dh);
        grad(k) = gk;
    }
    return grad;
}

}  // namespace

OuterEval outer_objective(const IlopProblem& problem, const Vector& w, bool want_grad) {
    problem.validate();
    const Index expected = problem.reduced ? problem.reduced->reduced_dim() : problem.model.dims.K;
    if (w.size() != expected)
        throw std::invalid_argument("outer_objective: w has length " + std::to_string(w.size()) +
                                    ", expected " + std::to_string(expected));
    const Vector w_full = problem.reduced ? problem.reduced->to_full(w) : w;

    const Index n = static_cast<Index>(problem.train.size());
    std::vector<LinearProgram> lps(n);
    for (Index i = 0; i < n; ++i) lps[i] = problem.model.lp_at(problem.train[i].u, w_full);
    const std::vector<PrimalDualSolution> sols = solve_batch(lps, problem.solver);

    OuterEval eval;
    eval.per_sample.resize(n);
    Vector grad_full = Vector::Zero(problem.model.dims.K);
    const GradMethod method = problem.effective_grad_method();

    for (Index i = 0; i < n; ++i) {
        const auto& sample = problem.train[i];
        const auto& sol = sols[i];
        SampleDiagnostics& diag = eval.per_sample[i];
        diag.status = sol.status;
        diag.loss = loss_value(sol, sample.x_obs, lps[i], problem.loss, problem.large_loss_cap);
        diag.z = sol.x.allFinite() ? lps[i].c.dot(sample.x_obs - sol.x) : 0.0;
        eval.f += diag.loss / static_cast<double>(n);

        if (!want_grad || sol.status != SolveStatus::Optimal) continue;
        try {
            CoefficientJacobians jac;
            switch (method) {
                case GradMethod::Direct:
                    if (problem.loss == Loss::Aoe) {
                        jac = aoe_coefficient_grads(lps[i], sol, sample.x_obs);
                    } else {
                        // No closed form for SDE; fall through to implicit.
                        jac = implicit_grads(lps[i], sol, Vector(sol.x - sample.x_obs));
                    }
                    break;
                case GradMethod::Implicit:
                    jac = problem.loss == Loss::Aoe
                              ? aoe_implicit_grads(lps[i], sol, sample.x_obs)
                              : implicit_grads(lps[i], sol, Vector(sol.x - sample.x_obs));
                    break;
                case GradMethod::FiniteDifference:
                    jac = finite_difference_grads(
                        lps[i], sample.x_obs,
                        problem.loss == Loss::Aoe ? LossKind::Aoe : LossKind::Sde,
                        problem.fd_step);
                    break;
            }
            diag.degenerate = jac.degenerate_warning;
            grad_full += chain_to_w(jac, problem.model, sample.u, w_full) / static_cast<double>(n);
        } catch (const IllConditionedKkt&) {
            diag.grad_failed = true;
        } catch (const std::runtime_error&) {
            diag.grad_failed = true;  // e.g. a finite-difference resolve failed
        }
    }

    if (problem.regularizer_weight > 0) {
        eval.f += problem.regularizer_weight * w_full.squaredNorm();
        grad_full += 2.0 * problem.regularizer_weight * w_full;
    }
    if (want_grad)
        eval.grad = problem.reduced ? Vector(problem.reduced->P.transpose() * grad_full)
                                    : grad_full;
    return eval;
}

TestLosses test_losses(const ParametricModel& model, const Vector& true_w,
                       const Vector& w_learned, const TrainingSample& sample,
                       const IpmSettings& settings, double large_loss_cap) {
    const LinearProgram lp_learned = model.lp_at(sample.u, w_learned);
    const PrimalDualSolution sol = solve(lp_learned, settings);
    const Vector c_true = model.lp_at(sample.u, true_w).c;

    TestLosses out;
    out.status = sol.status;
    if (!sol.x.allFinite()) {
        out.aoe = out.sde = large_loss_cap;
        return out;
    }
    out.aoe = std::abs(c_true.dot(sample.x_obs - sol.x));
    out.sde = 0.5 * (sol.x - sample.x_obs).squaredNorm();
    if (sol.status != SolveStatus::Optimal) {
        out.aoe = std::min(out.aoe, large_loss_cap);
        out.sde = std::min(out.sde, large_loss_cap);
    }
    if (!std::isfinite(out.aoe)) out.aoe = large_loss_cap;
    if (!std::isfinite(out.sde)) out.sde = large_loss_cap;
    return out;
}

// ---------------------------------------------------------------------------
// Constraint stacking
// ---------------------------------------------------------------------------

namespace {

bool rows_bitwise_equal(const Vector& a, double ab, const Vector& b, double bb) {
    if (std::memcmp(&ab, &bb, sizeof(double)) != 0) return false;
    return std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

}  // namespace

StackedOuterConstraints stack_outer_constraints(const IlopProblem& problem) {
    problem.validate();
    const ParametricModel& model = problem.model;
    const Index K = model.dims.K;
    const Vector w_ref = Vector::Zero(K);

    std::vector<Vector> ineq_rows, eq_rows;
    std::vector<double> ineq_rhs, eq_rhs;
    StackedOuterConstraints out;
    std::shared_ptr<const ParametricModel> model_ref;  // created only if needed

    for (Index i = 0; i < static_cast<Index>(problem.train.size()); ++i) {
        const auto& sample = problem.train[i];
        const LinearProgram lp0 = model.lp_at(sample.u, w_ref);
        const std::vector<CoeffSensitivity> sens = model.coeff_jacobians(sample.u, w_ref);
        const double tol = 1e-6 * (1.0 + (lp0.b.size() ? lp0.b.cwiseAbs().maxCoeff() : 0.0) +
                                   (lp0.h.size() ? lp0.h.cwiseAbs().maxCoeff() : 0.0));

        for (Index j = 0; j < model.dims.M1; ++j) {
            const RowDependence dep = model.ineq_w_dependence.empty()
                                          ? RowDependence::Affine
                                          : model.ineq_w_dependence[j];
            const double r0 = lp0.A.row(j).dot(sample.x_obs) - lp0.b(j);
            if (dep == RowDependence::Independent) {
                if (r0 > tol) throw MisspecificationError(i, j, false);
                continue;  // feasible for every w: omit
            }
            if (dep == RowDependence::Nonlinear) {
                if (!model_ref) model_ref = std::make_shared<const ParametricModel>(model);
                NonlinearRow row;
                const Vector u = sample.u;
                const Vector x_obs = sample.x_obs;
                const auto m_ref = model_ref;
                row.equality = false;
                row.residual = [m_ref, u, x_obs, j](const Vector& w) {
                    const LinearProgram lp = m_ref->coeffs(u, w);
                    return lp.A.row(j).dot(x_obs) - lp.b(j);
                };
                row.jacobian = [m_ref, u, x_obs, j](const Vector& w) {
                    const auto s = m_ref->coeff_jacobians(u, w);
                    Vector jac(w.size());
                    for (Index k = 0; k < w.size(); ++k)
                        jac(k) = s[k].dA.row(j).dot(x_obs) - s[k].db(j);
                    return jac;
                };
                out.nonlinear_rows.push_back(std::move(row));
                continue;
            }
            Vector arow(K);
            for (Index k = 0; k < K; ++k)
                arow(k) = sens[k].dA.row(j).dot(sample.x_obs) - sens[k].db(j);
            const double rhs = -r0;  // residual(w) = r0 + arow'w <= 0
            bool duplicate = false;
            for (size_t q = 0; q < ineq_rows.size(); ++q) {
                if (rows_bitwise_equal(ineq_rows[q], ineq_rhs[q], arow, rhs)) {
                    duplicate = true;
                    break;
                }
            }
            if (!duplicate) {
                ineq_rows.push_back(arow);
                ineq_rhs.push_back(rhs);
                out.ineq_rows.push_back({i, j, false});
            }
        }

        for (Index j = 0; j < model.dims.M2; ++j) {
            const RowDependence dep = model.eq_w_dependence.empty() ? RowDependence::Affine
                                                                    : model.eq_w_dependence[j];
            const double r0 = lp0.G.row(j).dot(sample.x_obs) - lp0.h(j);
            if (dep == RowDependence::Independent) {
                if (std::abs(r0) > tol) throw MisspecificationError(i, j, true);
                continue;
            }
            if (dep == RowDependence::Nonlinear) {
                if (!model_ref) model_ref = std::make_shared<const ParametricModel>(model);
                NonlinearRow row;
                const Vector u = sample.u;
                const Vector x_obs = sample.x_obs;
                const auto m_ref = model_ref;
                row.equality = true;
                row.residual = [m_ref, u, x_obs, j](const Vector& w) {
                    const LinearProgram lp = m_ref->coeffs(u, w);
                    return lp.G.row(j).dot(x_obs) - lp.h(j);
                };
                row.jacobian = [m_ref, u, x_obs, j](const Vector& w) {
                    const auto s = m_ref->coeff_jacobians(u, w);
                    Vector jac(w.size());
                    for (Index k = 0; k < w.size(); ++k)
                        jac(k) = s[k].dG.row(j).dot(x_obs) - s[k].dh(j);
                    return jac;
                };
                out.nonlinear_rows.push_back(std::move(row));
                continue;
            }
            Vector grow(K);
            for (Index k = 0; k < K; ++k)
                grow(k) = sens[k].dG.row(j).dot(sample.x_obs) - sens[k].dh(j);
            const double rhs = -r0;
            bool duplicate = false;
            for (size_t q = 0; q < eq_rows.size(); ++q) {
                if (rows_bitwise_equal(eq_rows[q], eq_rhs[q], grow, rhs)) {
                    duplicate = true;
                    break;
                }
            }
            if (!duplicate) {
                eq_rows.push_back(grow);
                eq_rhs.push_back(rhs);
                out.eq_rows.push_back({i, j, true});
            }
        }
    }

    out.A_tilde.resize(static_cast<Index>(ineq_rows.size()), K);
    out.b_tilde.resize(static_cast<Index>(ineq_rows.size()));
    for (size_t q = 0; q < ineq_rows.size(); ++q) {
        out.A_tilde.row(static_cast<Index>(q)) = ineq_rows[q];
        out.b_tilde(static_cast<Index>(q)) = ineq_rhs[q];
    }
    out.G_tilde.resize(static_cast<Index>(eq_rows.size()), K);
    out.h_tilde.resize(static_cast<Index>(eq_rows.size()));
    for (size_t q = 0; q < eq_rows.size(); ++q) {
        out.G_tilde.row(static_cast<Index>(q)) = eq_rows[q];
        out.h_tilde(static_cast<Index>(q)) = eq_rhs[q];
    }
    return out;
}

StackedOuterConstraints merge_admissible(StackedOuterConstraints stacked, const AdmissibleSet& W) {
    if (W.A.rows() > 0) {
        const Index old = stacked.A_tilde.rows();
        stacked.A_tilde.conservativeResize(old + W.A.rows(), Eigen::NoChange);
        stacked.b_tilde.conservativeResize(old + W.A.rows());
        stacked.A_tilde.bottomRows(W.A.rows()) = W.A;
        stacked.b_tilde.tail(W.A.rows()) = W.b;
        for (Index r = 0; r < W.A.rows(); ++r) stacked.ineq_rows.push_back({-1, r, false});
    }
    if (W.G.rows() > 0) {
        const Index old = stacked.G_tilde.rows();
        stacked.G_tilde.conservativeResize(old + W.G.rows(), Eigen::NoChange);
        stacked.h_tilde.conservativeResize(old + W.G.rows());
        stacked.G_tilde.bottomRows(W.G.rows()) = W.G;
        stacked.h_tilde.tail(W.G.rows()) = W.h;
        for (Index r = 0; r < W.G.rows(); ++r) stacked.eq_rows.push_back({-1, r, true});
    }
    return stacked;
}

// ---------------------------------------------------------------------------
// Equality reduction
// ---------------------------------------------------------------------------

EqualityReduction reduce_equalities(const StackedOuterConstraints& stacked, const Vector& w_ini) {
    for (const auto& row : stacked.nonlinear_rows) {
        if (row.equality)
            throw std::invalid_argument(
                "reduce_equalities: nonlinear equality rows present; keep them as SQP constraints");
    }
    const Index K = w_ini.size();
    if (stacked.G_tilde.rows() > 0 && stacked.G_tilde.cols() != K)
        throw std::invalid_argument("reduce_equalities: w_ini dimension mismatch");

    EqualityReduction out;
    if (stacked.G_tilde.rows() == 0) {
        out.param.P = Matrix::Identity(K, K);
        out.param.offset = Vector::Zero(K);
        out.A_reduced = stacked.A_tilde;
        out.b_reduced = stacked.b_tilde;
        out.w_ini_reduced = w_ini;
        return out;
    }

    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(stacked.G_tilde);
    const Index rank = cod.rank();
    const Index K_red = K - rank;
    const Matrix pinv = cod.pseudoInverse();
    out.param.offset = pinv * stacked.h_tilde;

    const Matrix projector = Matrix::Identity(K, K) - pinv * stacked.G_tilde;
    Matrix P = projector.leftCols(K_red);
    if (K_red > 0) {
        Eigen::ColPivHouseholderQR<Matrix> qr(P);
        if (qr.rank() < K_red) {
            // The leading columns happened to be dependent; pick a maximal
            // independent column set of the projector instead.
            Eigen::ColPivHouseholderQR<Matrix> full(projector);
            P.resize(K, K_red);
            for (Index j = 0; j < K_red; ++j)
                P.col(j) = projector.col(full.colsPermutation().indices()(j));
        }
    }
    out.param.P = P;
    out.A_reduced = stacked.A_tilde.rows() > 0 ? Matrix(stacked.A_tilde * P) : Matrix(0, K_red);
    out.b_reduced = stacked.A_tilde.rows() > 0
                        ? Vector(stacked.b_tilde - stacked.A_tilde * out.param.offset)
                        : Vector(0);
    out.w_ini_reduced = out.param.initial_reduced(w_ini);
    return out;
}

// ---------------------------------------------------------------------------
// Redundant inequality detection
// ---------------------------------------------------------------------------

std::vector<bool> detect_redundant_inequalities(const Matrix& A, const Vector& b, Index budget,
                                                double tol) {
    if (A.rows() != b.size()) throw std::invalid_argument("detect_redundant_inequalities: shape");
    const Index m = A.rows(), k = A.cols();
    std::vector<bool> mask(m, false);
    const Index limit = std::min(budget, m);
    for (Index j = 0; j < limit; ++j) {
        LinearProgram lp;
        lp.c = -A.row(j).transpose();
        lp.A.resize(m - 1, k);
        lp.b.resize(m - 1);
        Index at = 0;
        for (Index r = 0; r < m; ++r) {
            if (r == j) continue;
            lp.A.row(at) = A.row(r);
            lp.b(at) = b(r);
            ++at;
        }
        lp.G = Matrix(0, k);
        lp.h = Vector(0);
        const PrimalDualSolution sol = solve(lp);
        if (sol.status != SolveStatus::Optimal) continue;  // unbounded or failed: keep the row
        const double value = b(j) + sol.objective;  // min of b_j - a_j'w
        if (value >= -tol) mask[j] = true;
    }
    return mask;
}

// ---------------------------------------------------------------------------
// NLP assembly
// ---------------------------------------------------------------------------

AssembledNlp assemble_nlp(const IlopProblem& problem, const Vector& w_ini, bool reduce) {
    problem.validate();
    if (w_ini.size() != problem.model.dims.K)
        throw std::invalid_argument("assemble_nlp: w_ini dimension mismatch");

    StackedOuterConstraints stacked =
        merge_admissible(stack_outer_constraints(problem), problem.model.admissible);

    // Finite bounds become inequality rows.
    const AdmissibleSet& W = problem.model.admissible;
    const Index K = problem.model.dims.K;
    std::vector<std::pair<Vector, double>> bound_rows;
    for (Index i = 0; i < W.lower.size(); ++i) {
        if (std::isfinite(W.lower(i))) {
            Vector row = Vector::Zero(K);
            row(i) = -1.0;
            bound_rows.emplace_back(row, -W.lower(i));
        }
        if (std::isfinite(W.upper(i))) {
            Vector row = Vector::Zero(K);
            row(i) = 1.0;
            bound_rows.emplace_back(row, W.upper(i));
        }
    }
    {
        const Index old = stacked.A_tilde.rows();
        stacked.A_tilde.conservativeResize(old + static_cast<Index>(bound_rows.size()),
                                           Eigen::NoChange);
        stacked.b_tilde.conservativeResize(old + static_cast<Index>(bound_rows.size()));
        for (size_t q = 0; q < bound_rows.size(); ++q) {
            stacked.A_tilde.row(old + static_cast<Index>(q)) = bound_rows[q].first;
            stacked.b_tilde(old + static_cast<Index>(q)) = bound_rows[q].second;
        }
    }

    AssembledNlp out;
    out.problem = std::make_shared<IlopProblem>(problem);

    const bool do_reduce = reduce && stacked.G_tilde.rows() > 0;
    if (do_reduce) {
        EqualityReduction red = reduce_equalities(stacked, w_ini);
        out.reduction = red.param;
        out.problem->reduced = red.param;
        out.w0 = red.w_ini_reduced;
        out.nlp.dim = red.param.reduced_dim();
        out.nlp.Ain = red.A_reduced;
        out.nlp.bin = red.b_reduced;
        out.nlp.Aeq = Matrix(0, out.nlp.dim);
        out.nlp.beq = Vector(0);
        // Nonlinear inequality rows compose with the reduction.
        for (const auto& row : stacked.nonlinear_rows) {
            NonlinearRow mapped;
            mapped.equality = row.equality;
            const ReducedParametrization param = red.param;
            mapped.residual = [row, param](const Vector& wp) {
                return row.residual(param.to_full(wp));
            };
            mapped.jacobian = [row, param](const Vector& wp) {
                return Vector(param.P.transpose() * row.jacobian(param.to_full(wp)));
            };
            out.nlp.nonlinear.push_back(std::move(mapped));
        }
    } else {
        out.problem->reduced.reset();
        out.w0 = w_ini;
        out.nlp.dim = K;
        out.nlp.Ain = stacked.A_tilde;
        out.nlp.bin = stacked.b_tilde;
        out.nlp.Aeq = stacked.G_tilde;
        out.nlp.beq = stacked.h_tilde;
        out.nlp.nonlinear = stacked.nonlinear_rows;
    }

    std::shared_ptr<IlopProblem> prob = out.problem;
    out.nlp.objective = [prob](const Vector& w, bool want_grad) {
        const OuterEval eval = outer_objective(*prob, w, want_grad);
        return std::make_pair(eval.f, eval.grad);
    };
    return out;
}

}  // namespace invlp
