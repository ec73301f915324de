#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>

#include "invlp/ipm.hpp"
#include "invlp/types.hpp"

namespace invlp {

using Rng = std::mt19937_64;

/// Deterministic seed derivation (splitmix-style) for sub-streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

/// Derivative of every LP coefficient entry with respect to one component
/// of the weight vector w.
struct CoeffSensitivity {
    Vector dc;
    Matrix dA;
    Vector db;
    Matrix dG;
    Vector dh;
};

/// How one constraint row's residual a(u,w)'x - b(u,w) depends on w.
enum class RowDependence { Independent, Affine, Nonlinear };

/// Prior knowledge W about the weights: box bounds plus linear constraints.
/// Doubles as the sampling region for random search and initial points.
struct AdmissibleSet {
    Vector lower, upper;        // componentwise bounds (+-inf allowed), size K
    Matrix A;                   // A w <= b
    Vector b;
    Matrix G;                   // G w = h
    Vector h;
    Vector sample_lo, sample_hi;  // finite box used for uniform sampling

    static AdmissibleSet box(const Vector& lo, const Vector& hi);
    static AdmissibleSet unconstrained(Index k, double sample_halfwidth = 1.0);

    Index dim() const { return sample_lo.size(); }
    double violation(const Vector& w) const;
    bool contains(const Vector& w, double tol = 1e-8) const { return violation(w) <= tol; }

    /// Uniform box draw, followed by a least-squares projection onto the
    /// equality manifold when present, with rejection on the remaining
    /// constraints. Throws on acceptance rates below 1e-4.
    Vector sample(Rng& rng) const;
};

struct ModelDims {
    Index D = 0, M1 = 0, M2 = 0, K = 0, dim_u = 0;
};

struct TrainingSample {
    Vector u;
    Vector x_obs;
};

/// The hypothesis space: a deterministic map (u, w) -> LP coefficients with
/// per-w sensitivities, the admissible set W, and dataset plumbing.
struct ParametricModel {
    ModelDims dims;
    std::string name;
    std::uint64_t seed = 0;

    std::function<LinearProgram(const Vector& u, const Vector& w)> coeffs;
    std::function<std::vector<CoeffSensitivity>(const Vector& u, const Vector& w)> coeff_jacobians;

    AdmissibleSet admissible;
    std::optional<Vector> true_w;  // known for synthetic instances

    std::vector<RowDependence> ineq_w_dependence;  // per inequality row
    std::vector<RowDependence> eq_w_dependence;    // per equality row

    std::function<Vector(Rng&)> sample_u;

    /// True when w literally packs the LP coefficients (the sensitivity is
    /// the identity embedding); enables a fast gradient path.
    bool packs_coefficients = false;

    LinearProgram lp_at(const Vector& u, const Vector& w) const;
};

/// Two-variable PLP with cost (cos(w1+w2 u), sin(w1+w2 u)) over a
/// triangle whose faces move with w; true_w = (-0.5, -0.2).
ParametricModel figure1_model();

/// The generalization-study PLP: c = (-w1 u1, -w2 u2) over the unit box
/// intersected with x1 + x2 <= max(1, u1 + u2); true_w = (1, 1).
ParametricModel figure5_model();

struct SyntheticSpec {
    Index D = 10;
    Index M1 = 80;
    Index M2 = 0;
    Index K = 6;
    Index dim_u = 2;
    std::uint64_t seed = 0;
};

/// Random affine-in-(u,w) PLP with a known true_w in W = [-1,1]^K and an
/// interior point kept feasible at true_w (verified on probe draws of u,
/// resampling on failure).
ParametricModel synthetic_plp_generator(const SyntheticSpec& spec);

/// All LP coefficients become adjustable: K = D + M1*D + M1 (+ M2*D + M2),
/// coeffs ignores u and the sensitivity is the identity embedding.
ParametricModel full_coefficient_model(const LinearProgram& base);

/// Pack/unpack order used by full_coefficient_model: c, A row-major, b,
/// G row-major, h.
Vector pack_coefficients(const LinearProgram& lp);
LinearProgram unpack_coefficients(const Vector& w, Index D, Index M1, Index M2);

struct FlowNetwork {
    struct Commodity {
        int source = 0;
        int sink = 0;
        double demand = 1.0;
    };
    int nodes = 0;
    std::vector<std::pair<int, int>> arcs;  // (tail, head)
    std::vector<Commodity> commodities;
    Vector arc_length;  // l_j > 0
    Vector arc_toll;    // p_j

    Index num_arcs() const { return static_cast<Index>(arcs.size()); }
    /// Full node-arc incidence block for one commodity (nodes x arcs);
    /// row n sums outflow minus inflow at node n.
    Matrix incidence() const;
};

/// The 13-node, 19-arc Nguyen-Dupuis instance with 4 unit-demand
/// commodities; arc features l_j in [0.5, 2], p_j in [0, 1] drawn from the
/// seed.
FlowNetwork nguyen_dupuis_network(std::uint64_t seed);

/// Multi-commodity flow PLP with periodic arc costs
///   c_j = l_j + w1 p_j + w2 l_j (sin(2 pi (w3 + w4 t + w5 l_j)) + 1)
/// and affine capacities b_j = 1 + w6 + w7 l_j, K = 7, u = t in [0, 1],
/// W = {w >= 0, w3 + w4 + w5 = 1}. Flow conservation is independent of w.
ParametricModel nguyen_dupuis_model(std::uint64_t seed);

/// Samples u's, solves the model at true_w, and keeps Optimal draws;
/// resamples on failure so targets always exist.
std::vector<TrainingSample> generate_dataset(const ParametricModel& model, Index n, Rng& rng,
                                             const IpmSettings& settings = {});

}  // namespace invlp
