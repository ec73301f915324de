#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "invlp/ipm.hpp"
#include "invlp/lp_core.hpp"
#include "test_support.hpp"

using namespace invlp;

namespace {

LinearProgram one_dim_lp() {
    LinearProgram lp;
    lp.c = Vector::Ones(1);
    lp.A = Matrix(1, 1);
    lp.A << -1;
    lp.b = Vector(1);
    lp.b << -1;
    lp.G = Matrix(0, 1);
    lp.h = Vector(0);
    return lp;
}

LinearProgram figure1_lp() {
    const double w1 = -0.5, w2 = -0.2, u = 1.0;
    const double theta = w1 + w2 * u;
    LinearProgram lp;
    lp.c = Vector(2);
    lp.c << std::cos(theta), std::sin(theta);
    lp.A = Matrix(3, 2);
    lp.A << -(1 + w2 * u), 0, 0, -(1 + w1), 1, 1;
    lp.b = Vector(3);
    lp.b << -w1, -w2 * u, 1 + w1 + w2 * u;
    lp.G = Matrix(0, 2);
    lp.h = Vector(0);
    return lp;
}

bool bit_identical(const PrimalDualSolution& a, const PrimalDualSolution& b) {
    if (a.status != b.status || a.iterations != b.iterations) return false;
    if (a.x.size() != b.x.size()) return false;
    for (Index i = 0; i < a.x.size(); ++i)
        if (a.x(i) != b.x(i)) return false;
    for (Index i = 0; i < a.lam.size(); ++i)
        if (a.lam(i) != b.lam(i)) return false;
    for (Index i = 0; i < a.nu.size(); ++i)
        if (a.nu(i) != b.nu(i)) return false;
    return a.objective == b.objective;
}

}  // namespace

TEST_CASE("ipm: one-dimensional instance") {
    const PrimalDualSolution sol = solve(one_dim_lp());
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.x(0) == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(sol.lam(0) == doctest::Approx(-1.0).epsilon(1e-7));
}

TEST_CASE("ipm: Figure-1 forward solve") {
    const PrimalDualSolution sol = solve(figure1_lp());
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(std::abs(sol.x(0) - (-0.625)) <= 1e-6);
    CHECK(std::abs(sol.x(1) - 0.925) <= 1e-6);
}

TEST_CASE("ipm: infeasible instance classified") {
    LinearProgram lp;
    lp.c = Vector::Zero(1);
    lp.A = Matrix(2, 1);
    lp.A << 1, -1;
    lp.b = Vector(2);
    lp.b << -1, 0;
    lp.G = Matrix(0, 1);
    lp.h = Vector(0);
    CHECK(solve(lp).status == SolveStatus::PrimalInfeasible);
}

TEST_CASE("ipm: unbounded instance classified") {
    LinearProgram lp;
    lp.c = Vector(1);
    lp.c << -1;
    lp.A = Matrix(1, 1);
    lp.A << -1;
    lp.b = Vector::Zero(1);
    lp.G = Matrix(0, 1);
    lp.h = Vector(0);
    CHECK(solve(lp).status == SolveStatus::DualInfeasibleUnbounded);
}

TEST_CASE("ipm: equality-only instance") {
    // min x1 + x2 s.t. x1 + x2 = 1 is solvable with any x on the plane.
    LinearProgram lp;
    lp.c = Vector::Ones(2);
    lp.A = Matrix(0, 2);
    lp.b = Vector(0);
    lp.G = Matrix(1, 2);
    lp.G << 1, 1;
    lp.h = Vector::Ones(1);
    const PrimalDualSolution sol = solve(lp);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(sol.nu(0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("ipm: matches the vertex enumeration oracle on random LPs") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> dims(2, 6);
    for (int trial = 0; trial < 300; ++trial) {
        const Index d = dims(rng);
        const Index m1 = d + 1 + static_cast<Index>(rng() % 6);
        const Index m2 = trial % 4 == 0 ? 1 : 0;
        const LinearProgram lp = invlp::testing::random_feasible_bounded_lp(rng, d, m1, m2);
        const PrimalDualSolution got = solve(lp);
        REQUIRE(got.status == SolveStatus::Optimal);
        const PrimalDualSolution want = vertex_enumeration_solve(lp);
        REQUIRE(want.status == SolveStatus::Optimal);
        CHECK(std::abs(got.objective - want.objective) <=
              1e-6 * (1.0 + std::abs(want.objective)));
        CHECK(check_kkt(lp, got).max() <= 1e-6);
    }
}

TEST_CASE("ipm: certificate soundness against the oracle") {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        // Infeasible: a feasible base plus a contradicting pair.
        LinearProgram lp = invlp::testing::random_feasible_bounded_lp(rng, 3, 5);
        const Index m1 = lp.num_ineq();
        lp.A.conservativeResize(m1 + 1, 3);
        lp.b.conservativeResize(m1 + 1);
        lp.A.row(m1) = -lp.A.row(0);
        lp.b(m1) = -lp.b(0) - 1.0;  // a'x >= b0 + 1 contradicts a'x <= b0
        CHECK(solve(lp).status == SolveStatus::PrimalInfeasible);
        CHECK(vertex_enumeration_solve(lp).status == SolveStatus::PrimalInfeasible);
    }
    for (int trial = 0; trial < 40; ++trial) {
        // Unbounded: one halfspace with the cost pointing along its normal.
        LinearProgram lp;
        lp.c = Vector(3);
        for (Index i = 0; i < 3; ++i) lp.c(i) = gauss(rng);
        if (lp.c.norm() < 1e-3) continue;
        lp.A = Matrix(1, 3);
        lp.A = lp.c.transpose();
        lp.b = Vector::Ones(1);
        lp.G = Matrix(0, 3);
        lp.h = Vector(0);
        CHECK(solve(lp).status == SolveStatus::DualInfeasibleUnbounded);
        CHECK(vertex_enumeration_solve(lp).status == SolveStatus::DualInfeasibleUnbounded);
    }
}

TEST_CASE("ipm: determinism and residual monotonicity") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const LinearProgram lp = invlp::testing::random_feasible_bounded_lp(rng, 4, 9);
        const PrimalDualSolution a = solve(lp);
        const PrimalDualSolution b = solve(lp);
        CHECK(bit_identical(a, b));
        const auto& hist = a.diag.residual_history;
        for (size_t i = 1; i < hist.size(); ++i)
            CHECK(hist[i] <= hist[i - 1] + 1e-12 * (1.0 + hist[i - 1]));
    }
}

TEST_CASE("ipm: complementarity at optimum") {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 30; ++trial) {
        const LinearProgram lp = invlp::testing::random_feasible_bounded_lp(rng, 4, 8);
        IpmSettings settings;
        const PrimalDualSolution sol = solve(lp, settings);
        REQUIRE(sol.status == SolveStatus::Optimal);
        const Vector slack = lp.b - lp.A * sol.x;
        const double mu = slack.cwiseProduct(-sol.lam).sum() / (lp.num_ineq() + 1);
        CHECK(mu <= settings.tol_gap * (1.0 + std::abs(sol.objective)) * 10);
    }
}

TEST_CASE("ipm: iteration limit still returns duals") {
    LinearProgram lp = figure1_lp();
    IpmSettings settings;
    settings.max_iters = 2;
    const PrimalDualSolution sol = solve(lp, settings);
    CHECK(sol.status == SolveStatus::IterationLimit);
    CHECK(sol.x.allFinite());
    CHECK(sol.lam.size() == lp.num_ineq());
    CHECK(sol.lam.allFinite());
}

TEST_CASE("ipm: settings are validated") {
    IpmSettings bad;
    bad.step_fraction = 1.5;
    CHECK_THROWS_AS(solve(one_dim_lp(), bad), std::invalid_argument);
    bad = IpmSettings{};
    bad.tol_gap = 0.0;
    CHECK_THROWS_AS(solve(one_dim_lp(), bad), std::invalid_argument);
}

TEST_CASE("ipm: batch equals sequential, empty batch works") {
    std::mt19937_64 rng(23);
    std::vector<LinearProgram> lps;
    for (int i = 0; i < 20; ++i)
        lps.push_back(invlp::testing::random_feasible_bounded_lp(rng, 3 + i % 3, 7));
    const auto batch = solve_batch(lps);
    REQUIRE(batch.size() == lps.size());
    for (size_t i = 0; i < lps.size(); ++i) CHECK(bit_identical(batch[i], solve(lps[i])));

    CHECK(solve_batch({}).empty());
    const auto single = solve_batch({lps[0]});
    REQUIRE(single.size() == 1);
    CHECK(bit_identical(single[0], solve(lps[0])));
}
