#pragma once

#include <memory>
#include <optional>

#include "invlp/grad.hpp"
#include "invlp/model.hpp"
#include "invlp/sqp.hpp"

namespace invlp {

enum class Loss { Aoe, Sde };

const char* to_string(Loss l);

/// Reparametrization w(w') = offset + P w' that satisfies the stacked
/// affine equalities in the least-squares sense for every w'.
struct ReducedParametrization {
    Matrix P;       // K x K', rank K'
    Vector offset;  // pseudoinverse solution of the equality system, length K

    Index full_dim() const { return offset.size(); }
    Index reduced_dim() const { return P.cols(); }
    Vector to_full(const Vector& wp) const { return offset + P * wp; }
    /// Least-squares solve of P w' = w - offset (exact since rank(P) = K').
    Vector initial_reduced(const Vector& w) const;
};

/// The bi-level learning problem over one model and training set.
struct IlopProblem {
    ParametricModel model;
    std::vector<TrainingSample> train;
    Loss loss = Loss::Aoe;
    double regularizer_weight = 0.0;  // r(w) = weight * ||w||^2
    double large_loss_cap = 1e6;
    /// Gradient route; defaults to Direct for AOE and Implicit for SDE.
    std::optional<GradMethod> grad_method;
    double fd_step = 1e-5;  // used when grad_method = FiniteDifference
    /// When set, outer_objective receives reduced coordinates w' and maps
    /// them through the parametrization.
    std::optional<ReducedParametrization> reduced;
    IpmSettings solver;

    GradMethod effective_grad_method() const;
    void validate() const;
};

/// Training loss at one solved inner LP. Non-Optimal statuses evaluate the
/// same formula at the solver's arbitrary point, clamped to the cap.
double loss_value(const PrimalDualSolution& sol, const Vector& x_obs, const LinearProgram& lp,
                  Loss loss, double large_loss_cap = 1e6);

struct SampleDiagnostics {
    SolveStatus status = SolveStatus::NumericalFailure;
    double loss = 0.0;
    double z = 0.0;  // signed objective error c'(x_obs - x*)
    bool degenerate = false;
    bool grad_failed = false;  // ill-conditioned DKKT system, contributed zero
};

struct OuterEval {
    double f = 0.0;
    Vector grad;
    std::vector<SampleDiagnostics> per_sample;
};

/// Mean training loss plus regularizer over the N inner solves, with its
/// gradient assembled by the chain rule through the configured route.
/// Non-Optimal samples contribute the clamped loss and zero gradient.
OuterEval outer_objective(const IlopProblem& problem, const Vector& w, bool want_grad = true);

/// AOE at test time always uses the true cost; SDE is cost-free.
struct TestLosses {
    double aoe = 0.0;
    double sde = 0.0;
    SolveStatus status = SolveStatus::NumericalFailure;
};
TestLosses test_losses(const ParametricModel& model, const Vector& true_w,
                       const Vector& w_learned, const TrainingSample& sample,
                       const IpmSettings& settings = {}, double large_loss_cap = 1e6);

struct RowProvenance {
    Index sample = 0;
    Index row = 0;
    bool equality = false;
};

/// Target-feasibility constraints A(u_i,w) x_obs_i <= b(u_i,w),
/// G(u_i,w) x_obs_i = h(u_i,w) stacked over the training set and expressed
/// over w. Affine rows are materialized; w-independent rows are checked and
/// dropped; rows that are nonlinear in w become callbacks.
struct StackedOuterConstraints {
    Matrix A_tilde;  // A~ w <= b~
    Vector b_tilde;
    Matrix G_tilde;  // G~ w = h~
    Vector h_tilde;
    std::vector<RowProvenance> ineq_rows;
    std::vector<RowProvenance> eq_rows;
    std::vector<NonlinearRow> nonlinear_rows;
};

/// Thrown when a w-independent target-feasibility row is violated by the
/// data: the formulation is infeasible due to model misspecification.
struct MisspecificationError : std::runtime_error {
    MisspecificationError(Index sample, Index row, bool equality)
        : std::runtime_error("target-feasibility row independent of w is violated: sample " +
                             std::to_string(sample) + ", " +
                             (equality ? "equality" : "inequality") + " row " +
                             std::to_string(row) + " (model misspecification)"),
          sample(sample),
          row(row),
          equality(equality) {}
    Index sample, row;
    bool equality;
};

StackedOuterConstraints stack_outer_constraints(const IlopProblem& problem);

/// Appends the admissible set's linear rows (not its bounds) to the stack.
StackedOuterConstraints merge_admissible(StackedOuterConstraints stacked, const AdmissibleSet& W);

struct EqualityReduction {
    ReducedParametrization param;
    Matrix A_reduced;  // A~ P
    Vector b_reduced;  // b~ - A~ G~+ h~
    Vector w_ini_reduced;
};

/// Eliminates the affine equality rows through the Moore-Penrose
/// pseudoinverse: w(w') = G~+ h~ + P w' with K' = K - rank(G~) columns.
/// Errors if nonlinear equality rows are present (keep those as SQP
/// constraints instead).
EqualityReduction reduce_equalities(const StackedOuterConstraints& stacked, const Vector& w_ini);

/// Marks rows of {A w <= b} (up to `budget` of them) that are implied by
/// the remaining rows, by minimizing b_j - a_j'w subject to the others.
/// Unbounded subproblems mean "not redundant"; rows past the budget stay
/// unmarked.
std::vector<bool> detect_redundant_inequalities(const Matrix& A, const Vector& b, Index budget,
                                                double tol = 1e-9);

/// Everything sqp_solve / random_search need for one learning run: the NLP
/// over w (or w' when reduce is set and affine equality rows exist), with
/// stacked target-feasibility rows, admissible-set rows, and finite bounds
/// folded into the constraint system.
struct AssembledNlp {
    NlpProblem nlp;
    std::shared_ptr<IlopProblem> problem;  // carries the active reduction
    Vector w0;
    std::optional<ReducedParametrization> reduction;
};

AssembledNlp assemble_nlp(const IlopProblem& problem, const Vector& w_ini, bool reduce);

}  // namespace invlp
