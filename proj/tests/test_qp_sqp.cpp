#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "invlp/qp.hpp"
#include "invlp/sqp.hpp"

using namespace invlp;

namespace {

Matrix empty_rows(Index k) { return Matrix(0, k); }

// Brute-force KKT check over all active subsets for QPs with few rows.
Vector enumerate_qp_solution(const Matrix& B, const Vector& g, const Matrix& Ain,
                             const Vector& bin) {
    const Index k = g.size(), m = Ain.rows();
    const Matrix H = 2.0 * B;
    Vector best;
    double best_obj = std::numeric_limits<double>::infinity();
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
        std::vector<Index> act;
        for (Index i = 0; i < m; ++i)
            if (mask & (1u << i)) act.push_back(i);
        const Index na = static_cast<Index>(act.size());
        Matrix kkt(k + na, k + na);
        kkt.setZero();
        kkt.topLeftCorner(k, k) = H;
        Vector rhs(k + na);
        rhs.head(k) = -g;
        for (Index j = 0; j < na; ++j) {
            kkt.block(0, k + j, k, 1) = Ain.row(act[j]).transpose();
            kkt.block(k + j, 0, 1, k) = Ain.row(act[j]);
            rhs(k + j) = -bin(act[j]);
        }
        Eigen::FullPivLU<Matrix> lu(kkt);
        if (!lu.isInvertible()) continue;
        const Vector sol = lu.solve(rhs);
        const Vector delta = sol.head(k);
        const Vector mu = sol.tail(na);
        if (na > 0 && mu.minCoeff() < -1e-9) continue;
        if (m > 0 && (Ain * delta + bin).maxCoeff() > 1e-9) continue;
        const double obj = g.dot(delta) + delta.dot(B * delta);
        if (obj < best_obj) {
            best_obj = obj;
            best = delta;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("qp: unconstrained minimizer of g'd + d'Bd") {
    Vector g(2);
    g << 1, 0;
    const QpResult res = solve_qp_subproblem(Matrix::Identity(2, 2), g, empty_rows(2), Vector(0),
                                             empty_rows(2), Vector(0));
    CHECK(res.feasible);
    CHECK(res.delta(0) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(res.delta(1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("qp: single equality projection") {
    Matrix Aeq(1, 2);
    Aeq << 1, 1;
    Vector beq(1);
    beq << -1;  // d1 + d2 - 1 = 0
    const QpResult res = solve_qp_subproblem(Matrix::Identity(2, 2), Vector::Zero(2),
                                             empty_rows(2), Vector(0), Aeq, beq);
    CHECK(res.feasible);
    CHECK(res.delta(0) == doctest::Approx(0.5));
    CHECK(res.delta(1) == doctest::Approx(0.5));
}

TEST_CASE("qp: active inequality with multiplier") {
    // min d1 + |d|^2 s.t. d1 >= 0  (i.e. -d1 <= 0): optimum at 0, mu = 1.
    Vector g(2);
    g << 1, 0;
    Matrix Ain(1, 2);
    Ain << -1, 0;
    Vector bin = Vector::Zero(1);
    const QpResult res = solve_qp_subproblem(Matrix::Identity(2, 2), g, Ain, bin, empty_rows(2),
                                             Vector(0));
    CHECK(res.feasible);
    CHECK(res.delta.cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(res.mult_ineq(0) == doctest::Approx(1.0));
}

TEST_CASE("qp: random problems against subset enumeration") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const Index k = 2 + (trial % 2);
        Matrix R(k, k);
        for (Index i = 0; i < k; ++i)
            for (Index j = 0; j < k; ++j) R(i, j) = gauss(rng);
        const Matrix B = R * R.transpose() + 0.3 * Matrix::Identity(k, k);
        Vector g(k);
        for (Index i = 0; i < k; ++i) g(i) = gauss(rng);
        const Index m = trial % 4;
        Matrix Ain(m, k);
        Vector bin(m);
        for (Index i = 0; i < m; ++i) {
            for (Index j = 0; j < k; ++j) Ain(i, j) = gauss(rng);
            bin(i) = gauss(rng);
        }
        const Vector want = enumerate_qp_solution(B, g, Ain, bin);
        if (want.size() == 0) continue;  // enumeration found nothing usable
        const QpResult got = solve_qp_subproblem(B, g, Ain, bin, empty_rows(k), Vector(0));
        REQUIRE(got.feasible);
        CHECK((got.delta - want).cwiseAbs().maxCoeff() <= 1e-7);
        // KKT stationarity with the returned multipliers.
        Vector stat = 2.0 * B * got.delta + g;
        if (m > 0) stat += Ain.transpose() * got.mult_ineq;
        CHECK(stat.cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("qp: inconsistent constraints reported infeasible") {
    Matrix Ain(2, 1);
    Ain << 1, -1;
    Vector bin(2);
    bin << 1, 1;  // d <= -1 and d >= 1
    const QpResult res = solve_qp_subproblem(Matrix::Identity(1, 1), Vector::Zero(1), Ain, bin,
                                             empty_rows(1), Vector(0));
    CHECK_FALSE(res.feasible);

    Matrix Aeq(2, 1);
    Aeq << 1, 1;
    Vector beq(2);
    beq << 0, -1;  // d = 0 and d = 1
    const QpResult res2 = solve_qp_subproblem(Matrix::Identity(1, 1), Vector::Zero(1),
                                              empty_rows(1), Vector(0), Aeq, beq);
    CHECK_FALSE(res2.feasible);
}

namespace {

NlpProblem quadratic_bowl(Index k) {
    return NlpProblem::unconstrained(k, [](const Vector& w, bool want_grad) {
        return std::make_pair(w.squaredNorm(), want_grad ? Vector(2.0 * w) : Vector());
    });
}

}  // namespace

TEST_CASE("sqp: unconstrained quadratic converges") {
    const NlpProblem p = quadratic_bowl(2);
    SqpOptions opts;
    opts.max_iters = 50;
    const NlpOutcome out = sqp_solve(p, Vector::Ones(2), opts);
    CHECK(out.w.norm() <= 1e-6);
    CHECK(out.stop == StopReason::KktTolerance);
    CHECK(out.iterations <= 50);
}

TEST_CASE("sqp: linear objective over a halfspace") {
    NlpProblem p;
    p.dim = 2;
    p.objective = [](const Vector& w, bool want_grad) {
        Vector g(2);
        g << 1, 1;
        return std::make_pair(w(0) + w(1), want_grad ? g : Vector());
    };
    p.Ain = Matrix(1, 2);
    p.Ain << -1, -1;  // 1 - w1 - w2 <= 0
    p.bin = Vector::Constant(1, -1.0);
    p.Aeq = Matrix(0, 2);
    p.beq = Vector(0);
    const NlpOutcome out = sqp_solve(p, Vector::Constant(2, 3.0));
    CHECK(std::abs(out.f - 1.0) <= 1e-6);
    CHECK(out.max_violation <= 1e-8);
}

TEST_CASE("sqp: merit is non-increasing along accepted steps") {
    NlpProblem p;
    p.dim = 3;
    p.objective = [](const Vector& w, bool want_grad) {
        const double f = std::pow(w(0) - 1, 2) + 2 * std::pow(w(1) + 0.5, 2) + w(2) * w(2) +
                         0.3 * std::sin(w(0) * w(1));
        Vector g(3);
        g << 2 * (w(0) - 1) + 0.3 * w(1) * std::cos(w(0) * w(1)),
            4 * (w(1) + 0.5) + 0.3 * w(0) * std::cos(w(0) * w(1)), 2 * w(2);
        return std::make_pair(f, want_grad ? g : Vector());
    };
    p.Ain = Matrix(1, 3);
    p.Ain << 1, 1, 1;
    p.bin = Vector::Constant(1, 2.0);
    p.Aeq = Matrix(0, 3);
    p.beq = Vector(0);
    const NlpOutcome out = sqp_solve(p, Vector::Constant(3, 0.3));
    // Merit values recorded with each step's rho; compare consecutive rows
    // evaluated at the same rho by recomputing phi from the trace data.
    for (size_t i = 1; i < out.trace.size(); ++i) {
        const auto& prev = out.trace[i - 1];
        const auto& cur = out.trace[i];
        if (prev.step_alpha == 0.0) continue;
        const double viol_prev = std::max(prev.max_g, 0.0) + prev.norm_h;
        const double viol_cur = std::max(cur.max_g, 0.0) + cur.norm_h;
        const double phi_prev = prev.f + prev.merit_rho * viol_prev;
        const double phi_cur = cur.f + prev.merit_rho * viol_cur;
        CHECK(phi_cur <= phi_prev + 1e-9 * (1.0 + std::abs(phi_prev)));
    }
    CHECK(out.stop == StopReason::KktTolerance);
}

TEST_CASE("sqp: regression suite of randomized convex problems") {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> gauss(0.0, 1.0);
    int solved = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const Index k = 2 + (trial % 4);
        Matrix R(k, k);
        for (Index i = 0; i < k; ++i)
            for (Index j = 0; j < k; ++j) R(i, j) = gauss(rng);
        const Matrix Q = R * R.transpose() + Matrix::Identity(k, k);
        Vector target(k);
        for (Index i = 0; i < k; ++i) target(i) = gauss(rng);

        NlpProblem p;
        p.dim = k;
        p.objective = [Q, target](const Vector& w, bool want_grad) {
            const Vector d = w - target;
            return std::make_pair(0.5 * d.dot(Q * d), want_grad ? Vector(Q * d) : Vector());
        };
        const Index m = 1 + (trial % 3);
        p.Ain.resize(m, k);
        p.bin.resize(m);
        for (Index i = 0; i < m; ++i) {
            for (Index j = 0; j < k; ++j) p.Ain(i, j) = gauss(rng);
            p.bin(i) = gauss(rng) + 1.0;
        }
        p.Aeq = Matrix(0, k);
        p.beq = Vector(0);

        SqpOptions opts;
        opts.max_iters = 200;
        opts.kkt_tol = 1e-6;
        const NlpOutcome out = sqp_solve(p, Vector::Zero(k), opts);
        if (out.stop == StopReason::KktTolerance && out.max_violation <= 1e-6) ++solved;
    }
    CHECK(solved == 20);
}

TEST_CASE("random search: monotone best and deterministic traces") {
    NlpProblem p = quadratic_bowl(1);
    const WSampler sampler = [](Rng& rng) {
        std::uniform_real_distribution<double> d(-3.0, 3.0);
        return Vector::Constant(1, d(rng));
    };
    RandomSearchOptions opts;
    opts.max_samples = 200;
    opts.seed = 5;
    const NlpOutcome a = random_search(p, sampler, opts);
    const NlpOutcome b = random_search(p, sampler, opts);
    REQUIRE(a.trace.size() == 200);
    REQUIRE(b.trace.size() == 200);
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < a.trace.size(); ++i) {
        CHECK(a.trace[i].f == b.trace[i].f);  // identical trace under the seed
        best = std::min(best, a.trace[i].f);
    }
    CHECK(a.f == best);
    CHECK(a.f <= 0.05);  // dense sampling of a 1-D bowl gets close
}

TEST_CASE("random search: infeasible samples lose to feasible ones") {
    NlpProblem p = quadratic_bowl(1);
    p.Ain = Matrix(1, 1);
    p.Ain << -1;  // w >= 0.5
    p.bin = Vector::Constant(1, -0.5);
    const WSampler sampler = [](Rng& rng) {
        std::uniform_real_distribution<double> d(-3.0, 3.0);
        return Vector::Constant(1, d(rng));
    };
    RandomSearchOptions opts;
    opts.max_samples = 500;
    opts.seed = 11;
    const NlpOutcome out = random_search(p, sampler, opts);
    CHECK(out.max_violation <= 1e-8);
    CHECK(out.w(0) >= 0.5 - 1e-9);
}
