#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <random>

#include "invlp/types.hpp"

namespace invlp {

using Rng = std::mt19937_64;

/// A constraint row whose residual is not affine in w.
struct NonlinearRow {
    std::function<double(const Vector&)> residual;
    std::function<Vector(const Vector&)> jacobian;
    bool equality = false;
};

/// Smooth NLP:  min f(w)  s.t.  g(w) <= 0,  h(w) = 0.
/// Constraints are affine matrices plus optional nonlinear rows; g/h and
/// their Jacobians are assembled on demand.
struct NlpProblem {
    Index dim = 0;
    /// (value, gradient); gradient may be empty when want_grad is false.
    std::function<std::pair<double, Vector>(const Vector& w, bool want_grad)> objective;

    Matrix Ain;  // Ain w <= bin
    Vector bin;
    Matrix Aeq;  // Aeq w = beq
    Vector beq;
    std::vector<NonlinearRow> nonlinear;

    Vector g(const Vector& w) const;
    Matrix grad_g(const Vector& w) const;
    Vector h(const Vector& w) const;
    Matrix grad_h(const Vector& w) const;
    /// max(0, max g, max |h|)
    double violation(const Vector& w) const;

    static NlpProblem unconstrained(
        Index dim, std::function<std::pair<double, Vector>(const Vector&, bool)> objective);
};

struct SqpOptions {
    int max_iters = 200;
    double kkt_tol = 1e-7;
    double step_tol = 1e-10;
    double merit_rho0 = 1.0;
    std::uint64_t seed = 0;
    double time_budget_s = std::numeric_limits<double>::infinity();
};

enum class StopReason {
    KktTolerance,
    StepTolerance,
    IterationLimit,
    TimeBudget,
    SampleLimit,
    LineSearchFailure,
};

const char* to_string(StopReason r);

struct SqpTraceRow {
    int iter = 0;
    double wall_time_s = 0.0;
    double f = 0.0;
    double max_g = 0.0;   // max(0, max_i g_i)
    double norm_h = 0.0;  // ||h||_inf
    double step_alpha = 0.0;
    double merit = 0.0;
    double merit_rho = 0.0;
    double kkt_residual = 0.0;
};

struct NlpOutcome {
    Vector w;
    double f = std::numeric_limits<double>::infinity();
    double max_violation = std::numeric_limits<double>::infinity();
    StopReason stop = StopReason::IterationLimit;
    int iterations = 0;
    int objective_evals = 0;
    std::vector<SqpTraceRow> trace;
};

/// SQP with damped-BFGS Hessian approximation and an L1-merit Armijo line
/// search. Infeasible QP subproblems fall back to a big-M elastic
/// relaxation. Returns the best feasible-then-lowest-objective iterate.
NlpOutcome sqp_solve(const NlpProblem& problem, Vector w0, const SqpOptions& opts = {});

struct RandomSearchOptions {
    long max_samples = 1000;
    double time_budget_s = std::numeric_limits<double>::infinity();
    std::uint64_t seed = 0;
};

using WSampler = std::function<Vector(Rng&)>;

/// Uniform sampling baseline: evaluates f at sampler draws and keeps the
/// lexicographically best (violation, f) point. Every sample lands in the
/// trace.
NlpOutcome random_search(const NlpProblem& problem, const WSampler& sampler,
                         const RandomSearchOptions& opts = {});

/// Gradient-free solvers share one signature so the harness can swap them;
/// random_search is the only implementation shipped.
using GradientFreeSolver =
    std::function<NlpOutcome(const NlpProblem&, const WSampler&, const RandomSearchOptions&)>;
GradientFreeSolver make_random_search();

}  // namespace invlp
