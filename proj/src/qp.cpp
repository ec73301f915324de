#include "invlp/qp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <cmath>
#include <vector>

namespace invlp {

namespace {

// One constraint row a'delta + b (<= 0 or = 0) in the combined ordering:
// equality rows first, then inequality rows.
struct Row {
    Vector a;
    double b = 0.0;
    bool equality = false;
    double flip = 1.0;  // equalities may be sign-flipped to look violated-positive
};

}  // namespace

QpResult solve_qp_subproblem(const Matrix& B, const Vector& grad, const Matrix& Ain,
                             const Vector& bin, const Matrix& Aeq, const Vector& beq) {
    const Index k = grad.size();
    if (B.rows() != k || B.cols() != k)
        throw std::invalid_argument("solve_qp_subproblem: B dimension mismatch");
    if (Ain.rows() != bin.size() || (Ain.rows() > 0 && Ain.cols() != k))
        throw std::invalid_argument("solve_qp_subproblem: inequality dimension mismatch");
    if (Aeq.rows() != beq.size() || (Aeq.rows() > 0 && Aeq.cols() != k))
        throw std::invalid_argument("solve_qp_subproblem: equality dimension mismatch");

    const Index m_eq = Aeq.rows(), m_in = Ain.rows();
    // Internal Hessian of the objective grad'delta + delta' B delta.
    Matrix H = 2.0 * B;
    Eigen::LLT<Matrix> llt(H);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("solve_qp_subproblem: B is not positive definite");

    QpResult res;
    res.delta = -llt.solve(grad);
    res.mult_ineq = Vector::Zero(m_in);
    res.mult_eq = Vector::Zero(m_eq);
    if (m_eq + m_in == 0) return res;

    std::vector<Row> rows(m_eq + m_in);
    for (Index i = 0; i < m_eq; ++i) rows[i] = {Aeq.row(i).transpose(), beq(i), true, 1.0};
    for (Index i = 0; i < m_in; ++i) rows[m_eq + i] = {Ain.row(i).transpose(), bin(i), false, 1.0};

    const double scale = 1.0 + std::max(bin.size() ? bin.cwiseAbs().maxCoeff() : 0.0,
                                        beq.size() ? beq.cwiseAbs().maxCoeff() : 0.0);
    const double feas_tol = 1e-10 * scale;

    std::vector<Index> active;     // indices into rows
    std::vector<double> u;         // multipliers of active rows (flip-adjusted)
    Matrix Hi_N(k, 0);             // H^{-1} a_i for active rows
    Matrix S(0, 0);                // A_W H^{-1} A_W'

    auto rebuild_schur = [&]() {
        const Index nw = static_cast<Index>(active.size());
        Hi_N.resize(k, nw);
        for (Index j = 0; j < nw; ++j)
            Hi_N.col(j) = llt.solve(Vector(rows[active[j]].flip * rows[active[j]].a));
        S.resize(nw, nw);
        for (Index r = 0; r < nw; ++r)
            for (Index c3 = 0; c3 < nw; ++c3)
                S(r, c3) = (rows[active[r]].flip * rows[active[r]].a).dot(Hi_N.col(c3));
    };

    auto residual = [&](Index idx) {
        return rows[idx].flip * (rows[idx].a.dot(res.delta) + rows[idx].b);
    };

    const int max_iters = 200 + 60 * static_cast<int>(m_eq + m_in + k);
    bool converged = false;
    Index next_eq = 0;  // equalities are forced into the working set in order
    for (int iter = 0; iter < max_iters; ++iter) {
        res.iterations = iter;

        // Pick the next row to enforce.
        Index p = -1;
        if (next_eq < m_eq) {
            p = next_eq;
            if (residual(p) < 0) rows[p].flip = -rows[p].flip;  // make it look violated-positive
            if (residual(p) <= feas_tol) {
                // Already satisfied; still pin independent equalities so they
                // cannot drift, but skip dependent ones.
                const Vector ha = llt.solve(Vector(rows[p].flip * rows[p].a));
                Vector z = ha;
                if (!active.empty()) {
                    Vector rhs(active.size());
                    for (size_t j = 0; j < active.size(); ++j)
                        rhs(static_cast<Index>(j)) =
                            rows[active[j]].flip * rows[active[j]].a.dot(ha);
                    const Vector r = S.ldlt().solve(rhs);
                    z = ha - Hi_N * r;
                }
                if (z.cwiseAbs().maxCoeff() > 1e-12) {
                    active.push_back(p);
                    u.push_back(0.0);
                    rebuild_schur();
                }
                ++next_eq;
                continue;
            }
        } else {
            double worst = feas_tol;
            for (Index i = m_eq; i < m_eq + m_in; ++i) {
                bool in_w = false;
                for (Index a : active)
                    if (a == i) { in_w = true; break; }
                if (in_w) continue;
                const double v = residual(i);
                if (v > worst) {
                    worst = v;
                    p = i;
                }
            }
            if (p < 0) {
                converged = true;
                break;
            }
        }

        double u_p = 0.0;
        // Enforce row p, possibly dropping blockers along the way.
        for (;;) {
            const Vector ap = rows[p].flip * rows[p].a;
            const Vector hap = llt.solve(ap);
            Vector r;
            Vector z = hap;
            if (!active.empty()) {
                Vector rhs(active.size());
                for (size_t j = 0; j < active.size(); ++j)
                    rhs(static_cast<Index>(j)) = rows[active[j]].flip * rows[active[j]].a.dot(hap);
                r = S.ldlt().solve(rhs);
                z = hap - Hi_N * r;
            }
            const double znorm = z.cwiseAbs().maxCoeff();
            const double v = residual(p);

            // Dual blocking step over droppable (inequality) rows.
            double t1 = std::numeric_limits<double>::infinity();
            Index blocker = -1;
            for (size_t j = 0; j < active.size(); ++j) {
                if (rows[active[j]].equality) continue;
                if (r.size() > 0 && r(static_cast<Index>(j)) > 1e-14) {
                    const double bound = u[j] / r(static_cast<Index>(j));
                    if (bound < t1) {
                        t1 = bound;
                        blocker = static_cast<Index>(j);
                    }
                }
            }

            if (znorm <= 1e-12) {
                if (blocker < 0) {
                    res.feasible = false;  // row p inconsistent with the working set
                    return res;
                }
                // Pure dual step.
                for (size_t j = 0; j < active.size(); ++j) u[j] -= t1 * r(static_cast<Index>(j));
                u_p += t1;
                active.erase(active.begin() + blocker);
                u.erase(u.begin() + blocker);
                rebuild_schur();
                continue;
            }

            const double t2 = v / ap.dot(z);
            const double t = std::min(t1, t2);
            res.delta -= t * z;
            for (size_t j = 0; j < active.size(); ++j)
                if (r.size() > 0) u[j] -= t * r(static_cast<Index>(j));
            u_p += t;

            if (t2 <= t1) {
                active.push_back(p);
                u.push_back(u_p);
                rebuild_schur();
                if (rows[p].equality) ++next_eq;
                break;
            }
            active.erase(active.begin() + blocker);
            u.erase(u.begin() + blocker);
            rebuild_schur();
        }
    }

    if (!converged) throw std::runtime_error("solve_qp_subproblem: active-set iteration stalled");

    for (size_t j = 0; j < active.size(); ++j) {
        const Row& row = rows[active[j]];
        const Index idx = active[j];
        if (row.equality)
            res.mult_eq(idx) = row.flip * u[j];
        else
            res.mult_ineq(idx - m_eq) = std::max(u[j], 0.0);
    }
    return res;
}

}  // namespace invlp
