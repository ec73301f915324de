#pragma once

#include "invlp/types.hpp"

namespace invlp {

struct IpmSettings {
    int max_iters = 200;
    double tol_gap = 1e-8;     // relative duality gap
    double tol_primal = 1e-8;  // relative primal feasibility
    double tol_dual = 1e-8;    // relative dual feasibility
    double step_fraction = 0.99;
    double inf_ratio = 1e10;   // kappa/tau classification threshold

    void validate() const;

    /// Settings used while running finite-difference oracles.
    static IpmSettings tight() {
        IpmSettings s;
        s.tol_gap = s.tol_primal = s.tol_dual = 1e-10;
        s.max_iters = 400;
        return s;
    }
};

/// Homogeneous self-dual interior-point solve of a dense LP.
///
/// Optimal solutions satisfy the KKT residual tolerances in `settings`.
/// Infeasible and unbounded instances are classified through the tau/kappa
/// readout of the embedding. On IterationLimit or NumericalFailure the last
/// de-scaled iterate is still returned so callers can evaluate a (large)
/// loss at an arbitrary point.
PrimalDualSolution solve(const LinearProgram& lp, const IpmSettings& settings = {});

/// Solves a batch of LPs, possibly in parallel (INVLP_THREADS caps the
/// worker count). Output order matches input order and each entry is
/// bit-identical to a sequential `solve` call.
std::vector<PrimalDualSolution> solve_batch(const std::vector<LinearProgram>& lps,
                                            const IpmSettings& settings = {});

}  // namespace invlp
