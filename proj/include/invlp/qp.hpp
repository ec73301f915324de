#pragma once

#include "invlp/types.hpp"

namespace invlp {

struct QpResult {
    /// False when the constraints are inconsistent (no delta satisfies the
    /// linearized system); the caller falls back to a relaxed subproblem.
    bool feasible = true;
    Vector delta;
    Vector mult_ineq;  // multipliers for Ain delta + bin <= 0, >= 0
    Vector mult_eq;    // multipliers for Aeq delta + beq = 0
    int iterations = 0;
};

/// Solves  min  grad'delta + delta' B delta
///         s.t. Ain delta + bin <= 0,  Aeq delta + beq = 0
/// for symmetric positive definite B, returning the exact KKT point and its
/// multipliers. Dual active-set iteration with the Hessian factored once.
QpResult solve_qp_subproblem(const Matrix& B, const Vector& grad, const Matrix& Ain,
                             const Vector& bin, const Matrix& Aeq, const Vector& beq);

}  // namespace invlp
