#include "invlp/model.hpp"

#include <Eigen/QR>
#include <cmath>
#include <numbers>

namespace invlp {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

namespace {

Vector gaussian_vector(Rng& rng, Index n, double sigma = 1.0) {
    std::normal_distribution<double> g(0.0, sigma);
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = g(rng);
    return v;
}

Matrix gaussian_matrix(Rng& rng, Index rows, Index cols, double sigma = 1.0) {
    std::normal_distribution<double> g(0.0, sigma);
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c) m(r, c) = g(rng);
    return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// AdmissibleSet
// ---------------------------------------------------------------------------

AdmissibleSet AdmissibleSet::box(const Vector& lo, const Vector& hi) {
    if (lo.size() != hi.size() || (hi - lo).minCoeff() < 0)
        throw std::invalid_argument("AdmissibleSet::box: inconsistent bounds");
    AdmissibleSet s;
    s.lower = lo;
    s.upper = hi;
    s.sample_lo = lo;
    s.sample_hi = hi;
    s.A.resize(0, lo.size());
    s.b.resize(0);
    s.G.resize(0, lo.size());
    s.h.resize(0);
    return s;
}

AdmissibleSet AdmissibleSet::unconstrained(Index k, double sample_halfwidth) {
    AdmissibleSet s;
    s.lower = Vector::Constant(k, -std::numeric_limits<double>::infinity());
    s.upper = Vector::Constant(k, std::numeric_limits<double>::infinity());
    s.sample_lo = Vector::Constant(k, -sample_halfwidth);
    s.sample_hi = Vector::Constant(k, sample_halfwidth);
    s.A.resize(0, k);
    s.b.resize(0);
    s.G.resize(0, k);
    s.h.resize(0);
    return s;
}

double AdmissibleSet::violation(const Vector& w) const {
    double v = 0.0;
    for (Index i = 0; i < lower.size(); ++i) {
        if (std::isfinite(lower(i))) v = std::max(v, lower(i) - w(i));
        if (std::isfinite(upper(i))) v = std::max(v, w(i) - upper(i));
    }
    if (A.rows() > 0) v = std::max(v, (A * w - b).maxCoeff());
    if (G.rows() > 0) v = std::max(v, (G * w - h).cwiseAbs().maxCoeff());
    return std::max(v, 0.0);
}

Vector AdmissibleSet::sample(Rng& rng) const {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int attempt = 1; attempt <= 10000; ++attempt) {
        Vector w(dim());
        for (Index i = 0; i < dim(); ++i)
            w(i) = sample_lo(i) + (sample_hi(i) - sample_lo(i)) * unif(rng);
        if (G.rows() > 0) {
            // Least-squares projection onto the equality manifold.
            Eigen::CompleteOrthogonalDecomposition<Matrix> cod(G);
            w -= cod.pseudoInverse() * (G * w - h);
        }
        if (violation(w) <= 1e-9) return w;
    }
    throw std::runtime_error("AdmissibleSet::sample: rejection sampling stalled (acceptance < 1e-4)");
}

LinearProgram ParametricModel::lp_at(const Vector& u, const Vector& w) const {
    if (u.size() != dims.dim_u) throw std::invalid_argument(name + ": u dimension mismatch");
    if (w.size() != dims.K) throw std::invalid_argument(name + ": w dimension mismatch");
    LinearProgram lp = coeffs(u, w);
    lp.validate();
    return lp;
}

// ---------------------------------------------------------------------------
// Figure-1 model
// ---------------------------------------------------------------------------

ParametricModel figure1_model() {
    ParametricModel m;
    m.dims = {.D = 2, .M1 = 3, .M2 = 0, .K = 2, .dim_u = 1};
    m.name = "figure1";

    m.coeffs = [](const Vector& u, const Vector& w) {
        const double w1 = w(0), w2 = w(1), t = u(0);
        const double theta = w1 + w2 * t;
        LinearProgram lp;
        lp.c = Vector(2);
        lp.c << std::cos(theta), std::sin(theta);
        lp.A = Matrix(3, 2);
        lp.A << -(1 + w2 * t), 0, 0, -(1 + w1), 1, 1;
        lp.b = Vector(3);
        lp.b << -w1, -w2 * t, 1 + w1 + w2 * t;
        lp.G = Matrix(0, 2);
        lp.h = Vector(0);
        return lp;
    };

    m.coeff_jacobians = [](const Vector& u, const Vector& w) {
        const double w1 = w(0), w2 = w(1), t = u(0);
        const double theta = w1 + w2 * t;
        std::vector<CoeffSensitivity> jac(2);
        for (auto& j : jac) {
            j.dc = Vector::Zero(2);
            j.dA = Matrix::Zero(3, 2);
            j.db = Vector::Zero(3);
            j.dG = Matrix::Zero(0, 2);
            j.dh = Vector::Zero(0);
        }
        jac[0].dc << -std::sin(theta), std::cos(theta);
        jac[1].dc << -t * std::sin(theta), t * std::cos(theta);
        jac[0].dA(1, 1) = -1.0;
        jac[1].dA(0, 0) = -t;
        jac[0].db << -1, 0, 1;
        jac[1].db << 0, -t, t;
        return jac;
    };

    m.admissible = AdmissibleSet::box(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0));
    m.true_w = (Vector(2) << -0.5, -0.2).finished();
    m.ineq_w_dependence = {RowDependence::Affine, RowDependence::Affine, RowDependence::Affine};
    m.sample_u = [](Rng& rng) {
        std::uniform_real_distribution<double> d(0.5, 1.5);
        return Vector::Constant(1, d(rng));
    };
    return m;
}

// ---------------------------------------------------------------------------
// Figure-5 model
// ---------------------------------------------------------------------------

ParametricModel figure5_model() {
    ParametricModel m;
    m.dims = {.D = 2, .M1 = 5, .M2 = 0, .K = 2, .dim_u = 2};
    m.name = "figure5";

    m.coeffs = [](const Vector& u, const Vector& w) {
        LinearProgram lp;
        lp.c = Vector(2);
        lp.c << -w(0) * u(0), -w(1) * u(1);
        lp.A = Matrix(5, 2);
        lp.A << 1, 1, 1, 0, 0, 1, -1, 0, 0, -1;
        lp.b = Vector(5);
        lp.b << std::max(1.0, u(0) + u(1)), 1, 1, 0, 0;  // kink is in u only
        lp.G = Matrix(0, 2);
        lp.h = Vector(0);
        return lp;
    };

    m.coeff_jacobians = [](const Vector& u, const Vector&) {
        std::vector<CoeffSensitivity> jac(2);
        for (auto& j : jac) {
            j.dc = Vector::Zero(2);
            j.dA = Matrix::Zero(5, 2);
            j.db = Vector::Zero(5);
            j.dG = Matrix::Zero(0, 2);
            j.dh = Vector::Zero(0);
        }
        jac[0].dc(0) = -u(0);
        jac[1].dc(1) = -u(1);
        return jac;
    };

    m.admissible = AdmissibleSet::box(Vector::Zero(2), Vector::Constant(2, 5.0));
    m.true_w = Vector::Ones(2);
    m.ineq_w_dependence.assign(5, RowDependence::Independent);
    m.sample_u = [](Rng& rng) {
        std::uniform_real_distribution<double> d(0.0, 1.0);
        Vector u(2);
        u << d(rng), d(rng);
        return u;
    };
    return m;
}

// ---------------------------------------------------------------------------
// Synthetic generator
// ---------------------------------------------------------------------------

namespace {

struct SyntheticData {
    Vector x0, c0, b0;
    Matrix A0, Cu, Cw, Bu, Bw, G0;
    std::vector<Matrix> Ak, Gk;
};

LinearProgram synthetic_coeffs(const SyntheticData& d, const Vector& u, const Vector& w) {
    LinearProgram lp;
    lp.c = d.c0 + d.Cu * u + d.Cw * w;
    lp.A = d.A0;
    for (Index k = 0; k < w.size(); ++k) lp.A += w(k) * d.Ak[k];
    lp.b = d.b0 + d.Bu * u + d.Bw * w;
    if (d.G0.rows() > 0) {
        lp.G = d.G0;
        for (Index k = 0; k < w.size(); ++k) lp.G += w(k) * d.Gk[k];
        lp.h = lp.G * d.x0;  // the interior point stays on the equality manifold
    } else {
        lp.G = Matrix(0, lp.c.size());
        lp.h = Vector(0);
    }
    return lp;
}

}  // namespace

ParametricModel synthetic_plp_generator(const SyntheticSpec& spec) {
    if (spec.D < 2) throw std::invalid_argument("synthetic_plp_generator: D must be >= 2");
    if (spec.M1 < spec.D + 1)
        throw std::invalid_argument("synthetic_plp_generator: M1 must be >= D + 1");
    if (spec.K < 1 || spec.dim_u < 0 || spec.M2 < 0)
        throw std::invalid_argument("synthetic_plp_generator: inconsistent spec");

    for (std::uint64_t attempt = 0; attempt < 200; ++attempt) {
        Rng rng(mix_seed(spec.seed, attempt));
        SyntheticData d;
        d.x0 = gaussian_vector(rng, spec.D);
        d.A0.resize(spec.M1, spec.D);
        for (Index r = 0; r < spec.M1; ++r) {
            Vector row;
            do {
                row = gaussian_vector(rng, spec.D);
            } while (row.norm() < 1e-8);
            d.A0.row(r) = row / row.norm();
        }
        std::uniform_real_distribution<double> slack(0.1, 1.0);
        d.b0.resize(spec.M1);
        for (Index r = 0; r < spec.M1; ++r) d.b0(r) = d.A0.row(r).dot(d.x0) + slack(rng);
        d.c0 = gaussian_vector(rng, spec.D);
        d.c0 /= d.c0.norm();
        d.Cu = gaussian_matrix(rng, spec.D, spec.dim_u, 0.1);
        d.Cw = gaussian_matrix(rng, spec.D, spec.K, 0.1);
        d.Bu = gaussian_matrix(rng, spec.M1, spec.dim_u, 0.1);
        d.Bw = gaussian_matrix(rng, spec.M1, spec.K, 0.1);
        for (Index k = 0; k < spec.K; ++k)
            d.Ak.push_back(gaussian_matrix(rng, spec.M1, spec.D, 0.1));
        // Keep x0 strictly interior for every u, w in the unit boxes: raise
        // each rhs entry by the row's worst-case perturbation.
        for (Index r = 0; r < spec.M1; ++r) {
            double margin = d.Bu.row(r).cwiseAbs().sum() + d.Bw.row(r).cwiseAbs().sum();
            for (Index k = 0; k < spec.K; ++k) margin += std::abs(d.Ak[k].row(r).dot(d.x0));
            d.b0(r) += margin;
        }
        if (spec.M2 > 0) {
            d.G0 = gaussian_matrix(rng, spec.M2, spec.D);
            for (Index k = 0; k < spec.K; ++k)
                d.Gk.push_back(gaussian_matrix(rng, spec.M2, spec.D, 0.1));
        } else {
            d.G0 = Matrix(0, spec.D);
        }

        std::uniform_real_distribution<double> wdist(-1.0, 1.0);
        Vector true_w(spec.K);
        for (Index k = 0; k < spec.K; ++k) true_w(k) = wdist(rng);

        ParametricModel m;
        m.dims = {.D = spec.D, .M1 = spec.M1, .M2 = spec.M2, .K = spec.K, .dim_u = spec.dim_u};
        m.name = "synthetic";
        m.seed = spec.seed;
        m.coeffs = [d](const Vector& u, const Vector& w) { return synthetic_coeffs(d, u, w); };
        m.coeff_jacobians = [d](const Vector&, const Vector&) {
            std::vector<CoeffSensitivity> jac(d.Cw.cols());
            for (Index k = 0; k < d.Cw.cols(); ++k) {
                jac[k].dc = d.Cw.col(k);
                jac[k].dA = d.Ak[k];
                jac[k].db = d.Bw.col(k);
                if (d.G0.rows() > 0) {
                    jac[k].dG = d.Gk[k];
                    jac[k].dh = d.Gk[k] * d.x0;
                } else {
                    jac[k].dG = Matrix(0, d.x0.size());
                    jac[k].dh = Vector(0);
                }
            }
            return jac;
        };
        m.admissible = AdmissibleSet::box(Vector::Constant(spec.K, -1.0),
                                          Vector::Constant(spec.K, 1.0));
        m.true_w = true_w;
        m.ineq_w_dependence.assign(spec.M1, RowDependence::Affine);
        m.eq_w_dependence.assign(spec.M2, RowDependence::Affine);
        const Index dim_u = spec.dim_u;
        m.sample_u = [dim_u](Rng& r) {
            std::uniform_real_distribution<double> du(-1.0, 1.0);
            Vector u(dim_u);
            for (Index i = 0; i < dim_u; ++i) u(i) = du(r);
            return u;
        };

        // Probe feasibility, boundedness, and the interior margin at true_w.
        Rng probe_rng(mix_seed(spec.seed, attempt + 1000));
        bool ok = true;
        for (int probe = 0; probe < 8 && ok; ++probe) {
            const Vector u = m.sample_u(probe_rng);
            const LinearProgram lp = m.coeffs(u, true_w);
            if ((lp.b - lp.A * d.x0).minCoeff() < 0.02) ok = false;
            if (ok && solve(lp).status != SolveStatus::Optimal) ok = false;
        }
        if (ok) return m;
    }
    throw std::runtime_error("synthetic_plp_generator: could not build a feasible instance");
}

// ---------------------------------------------------------------------------
// Full-coefficient model
// ---------------------------------------------------------------------------

Vector pack_coefficients(const LinearProgram& lp) {
    const Index D = lp.dim(), M1 = lp.num_ineq(), M2 = lp.num_eq();
    Vector w(D + M1 * D + M1 + M2 * D + M2);
    Index at = 0;
    w.segment(at, D) = lp.c;
    at += D;
    for (Index r = 0; r < M1; ++r, at += D) w.segment(at, D) = lp.A.row(r);
    w.segment(at, M1) = lp.b;
    at += M1;
    for (Index r = 0; r < M2; ++r, at += D) w.segment(at, D) = lp.G.row(r);
    w.segment(at, M2) = lp.h;
    return w;
}

LinearProgram unpack_coefficients(const Vector& w, Index D, Index M1, Index M2) {
    if (w.size() != D + M1 * D + M1 + M2 * D + M2)
        throw std::invalid_argument("unpack_coefficients: wrong packed length");
    LinearProgram lp;
    Index at = 0;
    lp.c = w.segment(at, D);
    at += D;
    lp.A.resize(M1, D);
    for (Index r = 0; r < M1; ++r, at += D) lp.A.row(r) = w.segment(at, D);
    lp.b = w.segment(at, M1);
    at += M1;
    lp.G.resize(M2, D);
    for (Index r = 0; r < M2; ++r, at += D) lp.G.row(r) = w.segment(at, D);
    lp.h = w.segment(at, M2);
    return lp;
}

ParametricModel full_coefficient_model(const LinearProgram& base) {
    base.validate();
    const Index D = base.dim(), M1 = base.num_ineq(), M2 = base.num_eq();
    const Index K = D + M1 * D + M1 + M2 * D + M2;

    ParametricModel m;
    m.dims = {.D = D, .M1 = M1, .M2 = M2, .K = K, .dim_u = 0};
    m.name = "full_coefficient";
    m.packs_coefficients = true;
    m.coeffs = [D, M1, M2](const Vector&, const Vector& w) {
        return unpack_coefficients(w, D, M1, M2);
    };
    m.coeff_jacobians = [D, M1, M2, K](const Vector&, const Vector&) {
        std::vector<CoeffSensitivity> jac(K);
        for (Index k = 0; k < K; ++k) {
            Vector e = Vector::Zero(K);
            e(k) = 1.0;
            const LinearProgram unit = unpack_coefficients(e, D, M1, M2);
            jac[k].dc = unit.c;
            jac[k].dA = unit.A;
            jac[k].db = unit.b;
            jac[k].dG = unit.G;
            jac[k].dh = unit.h;
        }
        return jac;
    };
    const Vector packed = pack_coefficients(base);
    m.admissible = AdmissibleSet::box(Vector(packed.array() - 1.0), Vector(packed.array() + 1.0));
    m.true_w = packed;
    m.ineq_w_dependence.assign(M1, RowDependence::Affine);
    m.eq_w_dependence.assign(M2, RowDependence::Affine);
    m.sample_u = [](Rng&) { return Vector(0); };
    return m;
}

// ---------------------------------------------------------------------------
// Nguyen-Dupuis flow model
// ---------------------------------------------------------------------------

Matrix FlowNetwork::incidence() const {
    Matrix inc = Matrix::Zero(nodes, num_arcs());
    for (Index j = 0; j < num_arcs(); ++j) {
        inc(arcs[j].first, j) += 1.0;
        inc(arcs[j].second, j) -= 1.0;
    }
    return inc;
}

FlowNetwork nguyen_dupuis_network(std::uint64_t seed) {
    FlowNetwork net;
    net.nodes = 13;
    net.arcs = {{0, 4}, {0, 11}, {3, 4}, {3, 8}, {4, 5},  {4, 8},  {5, 6},
                {5, 9}, {6, 7},  {6, 10}, {7, 1}, {8, 9},  {8, 12}, {9, 10},
                {10, 1}, {10, 2}, {11, 5}, {11, 7}, {12, 2}};
    net.commodities = {{0, 1, 1.0}, {0, 2, 1.0}, {3, 1, 1.0}, {3, 2, 1.0}};
    Rng rng(mix_seed(seed, 0));
    std::uniform_real_distribution<double> len(0.5, 2.0), toll(0.0, 1.0);
    net.arc_length.resize(net.num_arcs());
    net.arc_toll.resize(net.num_arcs());
    for (Index j = 0; j < net.num_arcs(); ++j) {
        net.arc_length(j) = len(rng);
        net.arc_toll(j) = toll(rng);
    }
    return net;
}

namespace {

Vector periodic_arc_cost(const FlowNetwork& net, double t, const Vector& w) {
    Vector c(net.num_arcs());
    for (Index j = 0; j < net.num_arcs(); ++j) {
        const double l = net.arc_length(j), p = net.arc_toll(j);
        const double phase = 2.0 * std::numbers::pi * (w(2) + w(3) * t + w(4) * l);
        c(j) = l + w(0) * p + w(1) * l * (std::sin(phase) + 1.0);
    }
    return c;
}

}  // namespace

ParametricModel nguyen_dupuis_model(std::uint64_t seed) {
    const FlowNetwork net = nguyen_dupuis_network(seed);
    const Index n_arcs = net.num_arcs();
    const Index n_comm = static_cast<Index>(net.commodities.size());
    const Index D = n_arcs * n_comm;
    const Index M1 = n_arcs + D;  // joint capacities, then x >= 0
    // One conservation row per node and commodity, dropping the sink row of
    // each commodity to keep G full row rank.
    const Index M2 = (net.nodes - 1) * n_comm;

    // w-independent equality block, built once.
    Matrix G = Matrix::Zero(M2, D);
    Vector h = Vector::Zero(M2);
    const Matrix inc = net.incidence();
    Index row = 0;
    for (Index k = 0; k < n_comm; ++k) {
        const auto& com = net.commodities[k];
        for (int n = 0; n < net.nodes; ++n) {
            if (n == com.sink) continue;
            G.block(row, k * n_arcs, 1, n_arcs) = inc.row(n);
            h(row) = (n == com.source) ? com.demand : 0.0;
            ++row;
        }
    }

    ParametricModel m;
    m.dims = {.D = D, .M1 = M1, .M2 = M2, .K = 7, .dim_u = 1};
    m.name = "nguyen_dupuis";
    m.seed = seed;

    m.coeffs = [net, G, h, n_arcs, n_comm, D](const Vector& u, const Vector& w) {
        LinearProgram lp;
        const Vector arc_cost = periodic_arc_cost(net, u(0), w);
        lp.c.resize(D);
        for (Index k = 0; k < n_comm; ++k) lp.c.segment(k * n_arcs, n_arcs) = arc_cost;
        lp.A = Matrix::Zero(n_arcs + D, D);
        lp.b.resize(n_arcs + D);
        for (Index j = 0; j < n_arcs; ++j) {
            for (Index k = 0; k < n_comm; ++k) lp.A(j, k * n_arcs + j) = 1.0;
            lp.b(j) = 1.0 + w(5) + w(6) * net.arc_length(j);
        }
        lp.A.bottomRows(D) = -Matrix::Identity(D, D);
        lp.b.tail(D).setZero();
        lp.G = G;
        lp.h = h;
        return lp;
    };

    m.coeff_jacobians = [net, n_arcs, n_comm, D, M1, M2](const Vector& u, const Vector& w) {
        std::vector<CoeffSensitivity> jac(7);
        for (auto& j : jac) {
            j.dc = Vector::Zero(D);
            j.dA = Matrix::Zero(M1, D);
            j.db = Vector::Zero(M1);
            j.dG = Matrix::Zero(M2, D);
            j.dh = Vector::Zero(M2);
        }
        const double t = u(0);
        Vector darc[5];
        for (auto& v : darc) v = Vector::Zero(n_arcs);
        for (Index j = 0; j < n_arcs; ++j) {
            const double l = net.arc_length(j), p = net.arc_toll(j);
            const double phase = 2.0 * std::numbers::pi * (w(2) + w(3) * t + w(4) * l);
            const double ring = 2.0 * std::numbers::pi * w(1) * l * std::cos(phase);
            darc[0](j) = p;
            darc[1](j) = l * (std::sin(phase) + 1.0);
            darc[2](j) = ring;
            darc[3](j) = ring * t;
            darc[4](j) = ring * l;
        }
        for (int kk = 0; kk < 5; ++kk)
            for (Index k = 0; k < n_comm; ++k)
                jac[kk].dc.segment(k * n_arcs, n_arcs) = darc[kk];
        jac[5].db.head(n_arcs).setOnes();
        jac[6].db.head(n_arcs) = net.arc_length;
        return jac;
    };

    AdmissibleSet W;
    W.lower = Vector::Zero(7);
    W.upper = Vector::Constant(7, std::numeric_limits<double>::infinity());
    W.sample_lo = Vector::Zero(7);
    W.sample_hi = Vector::Ones(7);
    W.A.resize(0, 7);
    W.b.resize(0);
    W.G = Matrix::Zero(1, 7);
    W.G(0, 2) = W.G(0, 3) = W.G(0, 4) = 1.0;
    W.h = Vector::Ones(1);
    m.admissible = W;

    m.ineq_w_dependence.assign(M1, RowDependence::Independent);
    for (Index j = 0; j < n_arcs; ++j) m.ineq_w_dependence[j] = RowDependence::Affine;
    m.eq_w_dependence.assign(M2, RowDependence::Independent);
    m.sample_u = [](Rng& rng) {
        std::uniform_real_distribution<double> d(0.0, 1.0);
        return Vector::Constant(1, d(rng));
    };

    // Sample a true_w in W: uniform coordinates plus a uniform simplex draw
    // for (w3, w4, w5); verified on probe features.
    for (std::uint64_t attempt = 0; attempt < 50; ++attempt) {
        Rng rng(mix_seed(seed, 7000 + attempt));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        Vector w(7);
        w(0) = unif(rng);
        w(1) = unif(rng);
        double a = unif(rng), b2 = unif(rng);
        if (a > b2) std::swap(a, b2);
        w(2) = a;
        w(3) = b2 - a;
        w(4) = 1.0 - b2;
        w(5) = unif(rng);
        w(6) = unif(rng);

        bool ok = true;
        Rng probe_rng(mix_seed(seed, 9000 + attempt));
        for (int probe = 0; probe < 4 && ok; ++probe) {
            const Vector u = m.sample_u(probe_rng);
            if (solve(m.coeffs(u, w)).status != SolveStatus::Optimal) ok = false;
        }
        if (ok) {
            m.true_w = w;
            return m;
        }
    }
    throw std::runtime_error("nguyen_dupuis_model: could not find a workable true_w");
}

// ---------------------------------------------------------------------------
// Dataset generation
// ---------------------------------------------------------------------------

std::vector<TrainingSample> generate_dataset(const ParametricModel& model, Index n, Rng& rng,
                                             const IpmSettings& settings) {
    if (!model.true_w.has_value())
        throw std::invalid_argument("generate_dataset: model has no true_w");
    std::vector<TrainingSample> out;
    out.reserve(n);
    const Index max_attempts = 100 * n + 100;
    Index attempts = 0;
    while (static_cast<Index>(out.size()) < n) {
        if (++attempts > max_attempts)
            throw std::runtime_error("generate_dataset: too many non-Optimal draws");
        const Vector u = model.sample_u(rng);
        const PrimalDualSolution sol = solve(model.lp_at(u, *model.true_w), settings);
        if (sol.status != SolveStatus::Optimal) continue;
        out.push_back({u, sol.x});
    }
    return out;
}

}  // namespace invlp
