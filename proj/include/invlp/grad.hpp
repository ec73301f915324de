#pragma once

#include "invlp/ipm.hpp"
#include "invlp/types.hpp"

namespace invlp {

enum class LossKind { Aoe, Sde };
enum class GradMethod { Direct, Implicit, FiniteDifference };

/// Gradients of a scalar loss with respect to each LP coefficient block.
struct CoefficientJacobians {
    Vector dc;  // length D
    Matrix dA;  // M1 x D
    Vector db;  // length M1
    Matrix dG;  // M2 x D
    Vector dh;  // length M2
    GradMethod method = GradMethod::Direct;
    /// Set when the optimum was degenerate: the returned values are one
    /// valid subgradient choice, not a unique gradient.
    bool degenerate_warning = false;

    static CoefficientJacobians zero(const LinearProgram& lp);
    CoefficientJacobians& operator+=(const CoefficientJacobians& o);
    CoefficientJacobians& operator*=(double a);
    bool all_finite() const;
};

/// Thrown when the differentiated KKT system is singular or too
/// ill-conditioned to invert.
struct IllConditionedKkt : std::runtime_error {
    explicit IllConditionedKkt(double rcond_estimate)
        : std::runtime_error("implicit_grads: DKKT system is singular or ill-conditioned (rcond ~ " +
                             std::to_string(rcond_estimate) + ")"),
          rcond(rcond_estimate) {}
    double rcond;
};

/// Closed-form gradients of the objective error z = c'(x_obs - x*):
///   dz/dc = (x_obs - x*)', dz/dA = lam x*', dz/db = -lam',
///   dz/dG = nu x*',  dz/dh = -nu'.
/// Requires an Optimal solution; a degenerate optimum only sets the warning
/// flag (the expression is then a subgradient choice).
CoefficientJacobians direct_objective_error_grads(const LinearProgram& lp,
                                                  const PrimalDualSolution& sol,
                                                  const Vector& x_obs);

/// Gradients of the AOE loss |z|: the direct blocks scaled by sign(z),
/// with sign(0) = 0.
CoefficientJacobians aoe_coefficient_grads(const LinearProgram& lp, const PrimalDualSolution& sol,
                                           const Vector& x_obs);

/// Vector-Jacobian products through the solution map: given dl_dx = dl/dx*,
/// solves the transposed differentiated-KKT system and returns the loss
/// gradients with respect to each coefficient block. Covers only the path
/// through x*; any explicit dependence of the loss on the coefficients must
/// be added by the caller.
CoefficientJacobians implicit_grads(const LinearProgram& lp, const PrimalDualSolution& sol,
                                    const Vector& dl_dx);

/// Full AOE gradients assembled via the implicit route (through-solution
/// VJP plus the explicit c-term), comparable with aoe_coefficient_grads.
CoefficientJacobians aoe_implicit_grads(const LinearProgram& lp, const PrimalDualSolution& sol,
                                        const Vector& x_obs);

/// Central-difference oracle: perturbs every coefficient entry by +-step and
/// re-solves at tight tolerances. Throws std::runtime_error naming the
/// offending coefficient if a perturbed solve is not Optimal.
CoefficientJacobians finite_difference_grads(const LinearProgram& lp, const Vector& x_obs,
                                             LossKind loss, double step = 1e-5,
                                             const IpmSettings& solver = IpmSettings::tight());

struct UniquenessFlags {
    bool grad_c_unique = false;
    bool grad_b_h_unique = false;
    bool grad_A_G_unique = false;
};

/// Whether the closed-form gradient blocks are unique: db/dh always are at
/// a non-degenerate optimum, dc iff x* is unique, dA/dG iff x* is unique or
/// c = 0. On instances small enough for the enumeration oracle, uniqueness
/// of x* is decided exactly (every optimal vertex plus zero-cost recession
/// rays); otherwise the active-rank heuristic is used.
UniquenessFlags uniqueness_flags(const LinearProgram& lp, const PrimalDualSolution& sol,
                                 const DegeneracyReport& report);

}  // namespace invlp
