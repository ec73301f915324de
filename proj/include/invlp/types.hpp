#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace invlp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Outcome of an LP solve. Infeasible/unbounded are statuses, not errors:
/// the learner needs to evaluate (large) losses at such points.
enum class SolveStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasibleUnbounded,
    IterationLimit,
    NumericalFailure,
};

const char* to_string(SolveStatus s);

/// Dense LP in the form  min c'x  s.t.  A x <= b,  G x = h,  x free.
/// Either constraint block may be empty.
struct LinearProgram {
    Vector c;
    Matrix A;
    Vector b;
    Matrix G;
    Vector h;

    Index dim() const { return c.size(); }
    Index num_ineq() const { return A.rows(); }
    Index num_eq() const { return G.rows(); }

    /// Throws std::invalid_argument on inconsistent dimensions or
    /// non-finite entries.
    void validate() const;

    double objective_at(const Vector& x) const { return c.dot(x); }
};

/// Per-iteration solver internals kept for diagnostics and property tests.
struct IpmDiagnostics {
    double tau = 1.0;
    double kappa = 1.0;
    double mu = 0.0;
    /// Norm of the homogeneous residual after each accepted step.
    std::vector<double> residual_history;
};

/// Primal-dual solution pair. Sign convention follows the dual
///   max b'lam + h'nu  s.t.  A'lam + G'nu = c,  lam <= 0.
struct PrimalDualSolution {
    Vector x;
    Vector lam;
    Vector nu;
    SolveStatus status = SolveStatus::NumericalFailure;
    double objective = 0.0;
    int iterations = 0;
    double kkt_residual = 0.0;
    IpmDiagnostics diag;
};

/// The five KKT residual magnitudes; the caller decides pass/fail.
struct KktResiduals {
    double primal_ineq = 0.0;    // max(0, max_i (Ax - b)_i)
    double primal_eq = 0.0;      // ||Gx - h||_inf
    double dual = 0.0;           // ||A'lam + G'nu - c||_inf
    double complementarity = 0.0;// max_i |lam_i (Ax - b)_i|
    double sign = 0.0;           // max(0, max_i lam_i)

    double max() const;
    bool within(double tol) const { return max() <= tol; }
};

/// Classification of inequality constraints at an optimal point, using the
/// index sets I (strictly active), J (inactive), K (weakly active).
struct DegeneracyReport {
    std::vector<Index> active_inequalities; // I ∪ K
    std::vector<Index> strictly_active;     // I: active with lam_i < -tol
    std::vector<Index> weakly_active;       // K: active with lam_i ≈ 0
    bool is_degenerate = false;
    int active_rank = 0;
};

}  // namespace invlp
