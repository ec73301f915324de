#include "invlp/lp_core.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace invlp {

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::PrimalInfeasible: return "primal_infeasible";
        case SolveStatus::DualInfeasibleUnbounded: return "dual_infeasible_unbounded";
        case SolveStatus::IterationLimit: return "iteration_limit";
        case SolveStatus::NumericalFailure: return "numerical_failure";
    }
    return "unknown";
}

void LinearProgram::validate() const {
    const Index d = c.size();
    if (A.rows() != b.size())
        throw std::invalid_argument("LinearProgram: A rows != b length");
    if (G.rows() != h.size())
        throw std::invalid_argument("LinearProgram: G rows != h length");
    if (A.rows() > 0 && A.cols() != d)
        throw std::invalid_argument("LinearProgram: A cols != dim");
    if (G.rows() > 0 && G.cols() != d)
        throw std::invalid_argument("LinearProgram: G cols != dim");
    if (!c.allFinite() || !A.allFinite() || !b.allFinite() || !G.allFinite() || !h.allFinite())
        throw std::invalid_argument("LinearProgram: non-finite coefficient");
}

double KktResiduals::max() const {
    return std::max({primal_ineq, primal_eq, dual, complementarity, sign});
}

KktResiduals check_kkt(const LinearProgram& lp, const PrimalDualSolution& sol) {
    lp.validate();
    if (sol.x.size() != lp.dim() || sol.lam.size() != lp.num_ineq() || sol.nu.size() != lp.num_eq())
        throw std::invalid_argument("check_kkt: solution dimensions do not match LP");

    KktResiduals r;
    Vector dual_res = -lp.c;
    if (lp.num_ineq() > 0) {
        const Vector slack_viol = lp.A * sol.x - lp.b;  // <= 0 when feasible
        r.primal_ineq = std::max(0.0, slack_viol.maxCoeff());
        r.complementarity = (sol.lam.array() * slack_viol.array()).abs().maxCoeff();
        r.sign = std::max(0.0, sol.lam.maxCoeff());
        dual_res += lp.A.transpose() * sol.lam;
    }
    if (lp.num_eq() > 0) {
        r.primal_eq = (lp.G * sol.x - lp.h).cwiseAbs().maxCoeff();
        dual_res += lp.G.transpose() * sol.nu;
    }
    r.dual = dual_res.size() > 0 ? dual_res.cwiseAbs().maxCoeff() : 0.0;
    return r;
}

double default_active_tol(const LinearProgram& lp) {
    const double bscale = lp.b.size() > 0 ? lp.b.cwiseAbs().maxCoeff() : 0.0;
    return 1e-6 * (1.0 + bscale);
}

DegeneracyReport degeneracy_report(const LinearProgram& lp, const PrimalDualSolution& sol,
                                   double tol_active) {
    lp.validate();
    if (sol.status != SolveStatus::Optimal)
        throw std::invalid_argument("degeneracy_report: solution status must be Optimal");
    if (sol.x.size() != lp.dim() || sol.lam.size() != lp.num_ineq())
        throw std::invalid_argument("degeneracy_report: dimension mismatch");

    const double tol = tol_active > 0 ? tol_active : default_active_tol(lp);
    const double dual_tol = 1e-6 * (1.0 + (lp.c.size() ? lp.c.cwiseAbs().maxCoeff() : 0.0));

    DegeneracyReport rep;
    const Index m1 = lp.num_ineq();
    for (Index i = 0; i < m1; ++i) {
        const double resid = lp.A.row(i).dot(sol.x) - lp.b(i);
        if (std::abs(resid) <= tol) {
            rep.active_inequalities.push_back(i);
            if (sol.lam(i) < -dual_tol)
                rep.strictly_active.push_back(i);
            else
                rep.weakly_active.push_back(i);
        }
    }

    const Index n_act = lp.num_eq() + static_cast<Index>(rep.active_inequalities.size());
    if (n_act == 0) {
        rep.active_rank = 0;
        rep.is_degenerate = false;
        return rep;
    }
    Matrix rows(n_act, lp.dim());
    Index k = 0;
    for (Index i = 0; i < lp.num_eq(); ++i) rows.row(k++) = lp.G.row(i);
    for (Index i : rep.active_inequalities) rows.row(k++) = lp.A.row(i);
    Eigen::JacobiSVD<Matrix> svd(rows);
    const double rank_tol = 1e-9 * std::max(1.0, svd.singularValues()(0));
    rep.active_rank = static_cast<int>((svd.singularValues().array() > rank_tol).count());
    rep.is_degenerate = (n_act > lp.dim()) || (rep.active_rank < static_cast<int>(n_act));
    return rep;
}

// ---------------------------------------------------------------------------
// Vertex enumeration oracle
// ---------------------------------------------------------------------------

namespace {

bool next_combination(std::vector<int>& idx, int n) {
    const int k = static_cast<int>(idx.size());
    for (int i = k - 1; i >= 0; --i) {
        if (idx[i] < n - k + i) {
            ++idx[i];
            for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
            return true;
        }
    }
    return false;
}

// A system of rows in z-space: the first m_ineq rows are `row.z <= rhs`,
// the remaining rows are equalities.
struct RowSystem {
    Matrix rows;
    Vector rhs;
    Index m_ineq = 0;

    Index dim() const { return rows.cols(); }
    Index total() const { return rows.rows(); }

    bool feasible_at(const Vector& z, double tol) const {
        for (Index i = 0; i < total(); ++i) {
            const double r = rows.row(i).dot(z) - rhs(i);
            if (i < m_ineq ? (r > tol) : (std::abs(r) > tol)) return false;
        }
        return true;
    }
};

struct EnumeratedVertices {
    std::vector<Vector> points;                 // deduplicated feasible basic points
    std::vector<std::vector<int>> some_basis;   // one defining basis per point
};

// Enumerates all feasible basic points of the system.
EnumeratedVertices enumerate_basic_points(const RowSystem& sys, double feas_tol) {
    EnumeratedVertices out;
    const Index n = sys.total();
    const Index d = sys.dim();
    if (n < d) return out;

    std::vector<int> idx(d);
    for (Index i = 0; i < d; ++i) idx[i] = static_cast<int>(i);
    Matrix basis(d, d);
    Vector rhs(d);
    const double dedup_tol = 1e-7 * (1.0 + sys.rhs.cwiseAbs().maxCoeff());
    do {
        for (Index i = 0; i < d; ++i) {
            basis.row(i) = sys.rows.row(idx[i]);
            rhs(i) = sys.rhs(idx[i]);
        }
        Eigen::FullPivLU<Matrix> lu(basis);
        if (!lu.isInvertible()) continue;
        const Vector z = lu.solve(rhs);
        if (!z.allFinite()) continue;
        if (!sys.feasible_at(z, feas_tol)) continue;
        bool duplicate = false;
        for (const Vector& p : out.points) {
            if ((p - z).cwiseAbs().maxCoeff() <= dedup_tol) { duplicate = true; break; }
        }
        if (!duplicate) {
            out.points.push_back(z);
            out.some_basis.push_back(idx);
        }
    } while (next_combination(idx, static_cast<int>(n)));
    return out;
}

struct ReducedLp {
    RowSystem sys;     // [A;G] R with rhs [b;h]
    Matrix R;          // D x r, orthonormal columns spanning rowspace([A;G])
    Vector cz;         // R'c
    Vector c_null;     // component of c orthogonal to the rowspace
    Index m1 = 0, m2 = 0, r = 0;
};

ReducedLp reduce_to_rowspace(const LinearProgram& lp) {
    const Index m1 = lp.num_ineq(), m2 = lp.num_eq(), d = lp.dim();
    Matrix S(m1 + m2, d);
    if (m1 > 0) S.topRows(m1) = lp.A;
    if (m2 > 0) S.bottomRows(m2) = lp.G;

    Eigen::JacobiSVD<Matrix> svd(S, Eigen::ComputeThinV);
    const double sv_tol = 1e-10 * std::max(1.0, svd.singularValues().size() ? svd.singularValues()(0) : 0.0);
    const Index r = (svd.singularValues().array() > sv_tol).count();

    ReducedLp red;
    red.m1 = m1;
    red.m2 = m2;
    red.r = r;
    red.R = svd.matrixV().leftCols(r);
    red.cz = red.R.transpose() * lp.c;
    red.c_null = lp.c - red.R * red.cz;
    red.sys.rows = S * red.R;
    red.sys.rhs.resize(m1 + m2);
    if (m1 > 0) red.sys.rhs.head(m1) = lp.b;
    if (m2 > 0) red.sys.rhs.tail(m2) = lp.h;
    red.sys.m_ineq = m1;
    return red;
}

// Solves min t s.t. the system rows relaxed by t, t >= -1, by enumeration.
// Returns the minimal t (the system has vertices whenever nonempty).
std::optional<double> phase_one_min_violation(const RowSystem& sys, double feas_tol) {
    const Index r = sys.dim();
    RowSystem ph;
    const Index m1 = sys.m_ineq, m2 = sys.total() - sys.m_ineq;
    ph.rows.resize(m1 + 2 * m2 + 1, r + 1);
    ph.rhs.resize(m1 + 2 * m2 + 1);
    ph.m_ineq = ph.rows.rows();
    Index k = 0;
    for (Index i = 0; i < m1; ++i, ++k) {
        ph.rows.row(k) << sys.rows.row(i), -1.0;
        ph.rhs(k) = sys.rhs(i);
    }
    for (Index i = 0; i < m2; ++i) {
        ph.rows.row(k) << sys.rows.row(m1 + i), -1.0;
        ph.rhs(k) = sys.rhs(m1 + i);
        ++k;
        ph.rows.row(k) << -sys.rows.row(m1 + i), -1.0;
        ph.rhs(k) = -sys.rhs(m1 + i);
        ++k;
    }
    ph.rows.row(k).setZero();
    ph.rows(k, r) = -1.0;
    ph.rhs(k) = 1.0;

    const EnumeratedVertices verts = enumerate_basic_points(ph, feas_tol);
    if (verts.points.empty()) return std::nullopt;
    double best = std::numeric_limits<double>::infinity();
    for (const Vector& p : verts.points) best = std::min(best, p(r));
    return best;
}

// Checks for an improving recession ray: min cz'd s.t. ineq rows of `sys`
// applied to d <= 0, equality rows = 0, |d_i| <= 1.
bool has_improving_ray(const RowSystem& sys, const Vector& cz, double tol) {
    const Index r = sys.dim();
    RowSystem ray;
    ray.rows.resize(sys.total() + 2 * r, r);
    ray.rhs = Vector::Zero(sys.total() + 2 * r);
    ray.m_ineq = sys.m_ineq + 2 * r;
    // inequality rows first, then the box, then equalities
    ray.rows.topRows(sys.m_ineq) = sys.rows.topRows(sys.m_ineq);
    ray.rows.middleRows(sys.m_ineq, r) = Matrix::Identity(r, r);
    ray.rows.middleRows(sys.m_ineq + r, r) = -Matrix::Identity(r, r);
    ray.rhs.segment(sys.m_ineq, 2 * r).setOnes();
    ray.rows.bottomRows(sys.total() - sys.m_ineq) = sys.rows.bottomRows(sys.total() - sys.m_ineq);

    const EnumeratedVertices verts = enumerate_basic_points(ray, 1e-9);
    double best = 0.0;
    for (const Vector& p : verts.points) best = std::min(best, cz.dot(p));
    return best < -tol;
}

// Tries to certify `z` as optimal by finding a basis of active rows whose
// multipliers have the correct sign. Returns (lam, nu) on success.
std::optional<std::pair<Vector, Vector>> certify_vertex(const ReducedLp& red, const Vector& z,
                                                        double active_tol, double sign_tol) {
    std::vector<int> active;
    for (Index i = 0; i < red.sys.total(); ++i) {
        if (std::abs(red.sys.rows.row(i).dot(z) - red.sys.rhs(i)) <= active_tol)
            active.push_back(static_cast<int>(i));
    }
    const int na = static_cast<int>(active.size());
    const int r = static_cast<int>(red.r);
    if (na < r) return std::nullopt;

    std::vector<int> pick(r);
    for (int i = 0; i < r; ++i) pick[i] = i;
    Matrix basis(r, r);
    do {
        for (int i = 0; i < r; ++i) basis.row(i) = red.sys.rows.row(active[pick[i]]);
        Eigen::FullPivLU<Matrix> lu(basis.transpose());
        if (!lu.isInvertible()) continue;
        const Vector mu = lu.solve(red.cz);
        bool ok = true;
        for (int i = 0; i < r && ok; ++i) {
            const int row = active[pick[i]];
            if (row < red.m1 && mu(i) > sign_tol) ok = false;  // inequality duals must be <= 0
        }
        if (!ok) continue;
        Vector lam = Vector::Zero(red.m1);
        Vector nu = Vector::Zero(red.m2);
        for (int i = 0; i < r; ++i) {
            const int row = active[pick[i]];
            if (row < red.m1)
                lam(row) = std::min(mu(i), 0.0);
            else
                nu(row - red.m1) = mu(i);
        }
        return std::make_pair(std::move(lam), std::move(nu));
    } while (next_combination(pick, na));
    return std::nullopt;
}

PrimalDualSolution make_solution(const LinearProgram& lp, SolveStatus status, Vector x,
                                 Vector lam, Vector nu) {
    PrimalDualSolution sol;
    sol.status = status;
    sol.x = std::move(x);
    sol.lam = std::move(lam);
    sol.nu = std::move(nu);
    sol.objective = lp.c.dot(sol.x);
    if (status == SolveStatus::Optimal) sol.kkt_residual = check_kkt(lp, sol).max();
    return sol;
}

}  // namespace

VertexEnumerationData enumerate_feasible_vertices(const LinearProgram& lp) {
    lp.validate();
    if (lp.dim() > 10 || lp.num_ineq() + lp.num_eq() > 40)
        throw std::invalid_argument("enumerate_feasible_vertices: size guard exceeded");
    VertexEnumerationData out;
    if (lp.num_ineq() + lp.num_eq() == 0) {
        out.lineality_dim = lp.dim();
        return out;
    }
    const ReducedLp red = reduce_to_rowspace(lp);
    out.lineality_dim = lp.dim() - red.r;
    const double scale = 1.0 + lp.b.cwiseAbs().sum() + lp.h.cwiseAbs().sum();
    for (const Vector& z : enumerate_basic_points(red.sys, 1e-8 * scale).points)
        out.vertices.push_back(red.R * z);
    return out;
}

PrimalDualSolution vertex_enumeration_solve(const LinearProgram& lp) {
    lp.validate();
    const Index d = lp.dim(), m1 = lp.num_ineq(), m2 = lp.num_eq();
    if (d > 10 || m1 + m2 > 24)
        throw std::invalid_argument("vertex_enumeration_solve: size guard exceeded (D <= 10, M1+M2 <= 24)");

    const Vector zero_x = Vector::Zero(d);
    const Vector zero_lam = Vector::Zero(m1);
    const Vector zero_nu = Vector::Zero(m2);

    if (m1 + m2 == 0) {
        if (lp.c.isZero(0.0))
            return make_solution(lp, SolveStatus::Optimal, zero_x, zero_lam, zero_nu);
        return make_solution(lp, SolveStatus::DualInfeasibleUnbounded, zero_x, zero_lam, zero_nu);
    }

    const double scale = 1.0 + lp.b.cwiseAbs().sum() + lp.h.cwiseAbs().sum();
    const double feas_tol = 1e-8 * scale;
    const ReducedLp red = reduce_to_rowspace(lp);
    const double cnorm = lp.c.cwiseAbs().maxCoeff();

    if (red.r == 0) {
        // All constraint rows are zero: feasibility is a property of the rhs.
        const bool feas = (m1 == 0 || lp.b.minCoeff() >= -feas_tol) &&
                          (m2 == 0 || lp.h.cwiseAbs().maxCoeff() <= feas_tol);
        if (!feas) return make_solution(lp, SolveStatus::PrimalInfeasible, zero_x, zero_lam, zero_nu);
        if (cnorm <= 1e-14)
            return make_solution(lp, SolveStatus::Optimal, zero_x, zero_lam, zero_nu);
        return make_solution(lp, SolveStatus::DualInfeasibleUnbounded, zero_x, zero_lam, zero_nu);
    }

    const EnumeratedVertices verts = enumerate_basic_points(red.sys, feas_tol);

    if (verts.points.empty()) {
        const auto t_min = phase_one_min_violation(red.sys, 1e-9 * scale);
        if (t_min.has_value() && *t_min > feas_tol)
            return make_solution(lp, SolveStatus::PrimalInfeasible, zero_x, zero_lam, zero_nu);
        // Feasible but no basic point found: numerically inconsistent for a
        // pointed system.
        return make_solution(lp, SolveStatus::NumericalFailure, zero_x, zero_lam, zero_nu);
    }

    int best = 0;
    for (int i = 1; i < static_cast<int>(verts.points.size()); ++i) {
        if (red.cz.dot(verts.points[i]) < red.cz.dot(verts.points[best])) best = i;
    }
    const Vector z_best = verts.points[best];
    const Vector x_best = red.R * z_best;

    if (red.c_null.cwiseAbs().maxCoeff() > 1e-10 * (1.0 + cnorm))
        return make_solution(lp, SolveStatus::DualInfeasibleUnbounded, x_best, zero_lam, zero_nu);

    const double active_tol = 1e-7 * scale;
    const double sign_tol = 1e-9 * (1.0 + cnorm);
    // A degenerate optimum may need a different optimal vertex for dual
    // certification; scan vertices in objective order.
    std::vector<int> order(verts.points.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return red.cz.dot(verts.points[a]) < red.cz.dot(verts.points[b]);
    });
    const double best_obj = red.cz.dot(z_best);
    for (int i : order) {
        if (red.cz.dot(verts.points[i]) > best_obj + 1e-9 * (1.0 + std::abs(best_obj))) break;
        if (auto duals = certify_vertex(red, verts.points[i], active_tol, sign_tol)) {
            return make_solution(lp, SolveStatus::Optimal, red.R * verts.points[i],
                                 std::move(duals->first), std::move(duals->second));
        }
    }

    if (has_improving_ray(red.sys, red.cz, 1e-9 * (1.0 + cnorm)))
        return make_solution(lp, SolveStatus::DualInfeasibleUnbounded, x_best, zero_lam, zero_nu);
    return make_solution(lp, SolveStatus::NumericalFailure, x_best, zero_lam, zero_nu);
}

}  // namespace invlp
