#pragma once

#include "invlp/types.hpp"

namespace invlp {

/// Evaluates the five KKT residual magnitudes of (x, lam, nu) for `lp`.
/// Throws std::invalid_argument on dimension mismatch.
KktResiduals check_kkt(const LinearProgram& lp, const PrimalDualSolution& sol);

/// Brute-force reference solver: enumerates all basic points from
/// D-subsets of constraint rows. Intended as a test oracle for small
/// instances only; guarded to D <= 10 and M1 + M2 <= 24.
///
/// Feasibility of vertex-free instances is decided by a phase-I
/// enumeration, unboundedness by a recession-ray enumeration.
PrimalDualSolution vertex_enumeration_solve(const LinearProgram& lp);

/// All distinct feasible basic points of a small LP, lifted to x-space,
/// plus the dimension of the constraint nullspace (lineality directions
/// no constraint row sees). Test-oracle helper with a relaxed size guard
/// (D <= 10, M1 + M2 <= 40).
struct VertexEnumerationData {
    std::vector<Vector> vertices;
    Index lineality_dim = 0;
};
VertexEnumerationData enumerate_feasible_vertices(const LinearProgram& lp);

/// Scale-aware default threshold used to call a constraint row active.
double default_active_tol(const LinearProgram& lp);

/// Classifies inequality constraints at an Optimal solution and applies the
/// rank rule: degenerate iff the stacked active rows (G plus active A rows)
/// number more than D or are rank-deficient.
/// Pass tol_active <= 0 to use default_active_tol(lp).
DegeneracyReport degeneracy_report(const LinearProgram& lp, const PrimalDualSolution& sol,
                                   double tol_active = -1.0);

namespace tol {
/// Solver-side feasibility/complementarity default.
inline constexpr double kFeas = 1e-8;
/// Acceptance-check default.
inline constexpr double kAccept = 1e-6;
}  // namespace tol

}  // namespace invlp
