#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "invlp/ipm.hpp"
#include "invlp/json_io.hpp"
#include "invlp/lp_core.hpp"
#include "test_support.hpp"

using namespace invlp;

namespace {

LinearProgram box_min_lp() {
    // min -x1 - x2  s.t.  x1 <= 1, x2 <= 1, -x1 <= 0, -x2 <= 0
    LinearProgram lp;
    lp.c = Vector(2);
    lp.c << -1, -1;
    lp.A = Matrix(4, 2);
    lp.A << 1, 0, 0, 1, -1, 0, 0, -1;
    lp.b = Vector(4);
    lp.b << 1, 1, 0, 0;
    lp.G = Matrix(0, 2);
    lp.h = Vector(0);
    return lp;
}

LinearProgram figure1_lp() {
    // The Figure-1 PLP instantiated at u = 1, w = (-0.5, -0.2).
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

PrimalDualSolution make_sol(Vector x, Vector lam, Vector nu = Vector(0)) {
    PrimalDualSolution sol;
    sol.x = std::move(x);
    sol.lam = std::move(lam);
    sol.nu = std::move(nu);
    sol.status = SolveStatus::Optimal;
    sol.objective = 0;
    return sol;
}

}  // namespace

TEST_CASE("check_kkt: exact stationary point has zero residuals") {
    const LinearProgram lp = box_min_lp();
    Vector x(2), lam(4);
    x << 1, 1;
    lam << -1, -1, 0, 0;
    const KktResiduals r = check_kkt(lp, make_sol(x, lam));
    CHECK(r.max() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("check_kkt: positive multiplier shows up as sign residual") {
    const LinearProgram lp = box_min_lp();
    Vector x(2), lam(4);
    x << 1, 1;
    lam << -1, -1, 0.5, 0;
    const KktResiduals r = check_kkt(lp, make_sol(x, lam));
    CHECK(r.sign == doctest::Approx(0.5));
}

TEST_CASE("check_kkt: dimension mismatch throws") {
    const LinearProgram lp = box_min_lp();
    CHECK_THROWS_AS(check_kkt(lp, make_sol(Vector::Zero(3), Vector::Zero(4))),
                    std::invalid_argument);
}

TEST_CASE("check_kkt: residuals of ipm solutions on random LPs") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const LinearProgram lp = invlp::testing::random_feasible_bounded_lp(rng, 4, 8);
        const PrimalDualSolution sol = solve(lp);
        REQUIRE(sol.status == SolveStatus::Optimal);
        CHECK(check_kkt(lp, sol).max() <= 1e-6);
    }
}

TEST_CASE("vertex_enumeration_solve: one-dimensional instance") {
    LinearProgram lp;
    lp.c = Vector::Ones(1);
    lp.A = Matrix(1, 1);
    lp.A << -1;
    lp.b = Vector(1);
    lp.b << -1;
    lp.G = Matrix(0, 1);
    lp.h = Vector(0);
    const PrimalDualSolution sol = vertex_enumeration_solve(lp);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.x(0) == doctest::Approx(1.0));
    CHECK(sol.objective == doctest::Approx(1.0));
    CHECK(sol.lam(0) == doctest::Approx(-1.0));
}

TEST_CASE("vertex_enumeration_solve: Figure-1 instance") {
    const PrimalDualSolution sol = vertex_enumeration_solve(figure1_lp());
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.x(0) == doctest::Approx(-0.625).epsilon(1e-9));
    CHECK(sol.x(1) == doctest::Approx(0.925).epsilon(1e-9));
}

TEST_CASE("vertex_enumeration_solve: unbounded and infeasible statuses") {
    LinearProgram lp;
    lp.c = Vector(1);
    lp.c << -1;
    lp.A = Matrix(1, 1);
    lp.A << -1;
    lp.b = Vector::Zero(1);
    lp.G = Matrix(0, 1);
    lp.h = Vector(0);
    CHECK(vertex_enumeration_solve(lp).status == SolveStatus::DualInfeasibleUnbounded);

    LinearProgram infeas;
    infeas.c = Vector::Zero(1);
    infeas.A = Matrix(2, 1);
    infeas.A << 1, -1;
    infeas.b = Vector(2);
    infeas.b << -1, 0;  // x <= -1 and x >= 0
    infeas.G = Matrix(0, 1);
    infeas.h = Vector(0);
    CHECK(vertex_enumeration_solve(infeas).status == SolveStatus::PrimalInfeasible);
}

TEST_CASE("vertex_enumeration_solve: size guard") {
    LinearProgram lp;
    lp.c = Vector::Zero(11);
    lp.A = Matrix::Zero(1, 11);
    lp.b = Vector::Zero(1);
    lp.G = Matrix(0, 11);
    lp.h = Vector(0);
    CHECK_THROWS_AS(vertex_enumeration_solve(lp), std::invalid_argument);
}

TEST_CASE("enumerate_feasible_vertices: unit square") {
    const LinearProgram lp = box_min_lp();
    const auto data = enumerate_feasible_vertices(lp);
    CHECK(data.vertices.size() == 4);
    CHECK(data.lineality_dim == 0);
}

TEST_CASE("degeneracy_report: non-degenerate 1-D vertex") {
    LinearProgram lp;
    lp.c = Vector::Ones(1);
    lp.A = Matrix(1, 1);
    lp.A << -1;
    lp.b = Vector::Zero(1);
    lp.G = Matrix(0, 1);
    lp.h = Vector(0);
    Vector lam(1);
    lam << -1;
    const DegeneracyReport rep = degeneracy_report(lp, make_sol(Vector::Zero(1), lam));
    CHECK_FALSE(rep.is_degenerate);
    CHECK(rep.active_rank == 1);
    CHECK(rep.strictly_active.size() == 1);
}

TEST_CASE("degeneracy_report: three constraints through one point") {
    LinearProgram lp;
    lp.c = Vector(2);
    lp.c << -1, -1;
    lp.A = Matrix(3, 2);
    lp.A << 1, 1, 1, 0, 0, 1;
    lp.b = Vector::Zero(3);
    lp.G = Matrix(0, 2);
    lp.h = Vector(0);
    Vector lam(3);
    lam << -1, 0, 0;
    const DegeneracyReport rep = degeneracy_report(lp, make_sol(Vector::Zero(2), lam));
    CHECK(rep.is_degenerate);
    CHECK(rep.active_inequalities.size() == 3);
}

TEST_CASE("degeneracy_report: interior optimum of a feasibility LP") {
    LinearProgram lp;
    lp.c = Vector::Zero(2);
    lp.A = Matrix(4, 2);
    lp.A << 1, 0, 0, 1, -1, 0, 0, -1;
    lp.b = Vector::Ones(4);
    lp.G = Matrix(0, 2);
    lp.h = Vector(0);
    const DegeneracyReport rep = degeneracy_report(lp, make_sol(Vector::Zero(2), Vector::Zero(4)));
    CHECK(rep.strictly_active.empty());
    CHECK_FALSE(rep.is_degenerate);

    // Boundary point with zero multiplier: weakly active.
    Vector x(2);
    x << 1, 0;
    const DegeneracyReport rep2 = degeneracy_report(lp, make_sol(x, Vector::Zero(4)));
    CHECK(rep2.weakly_active.size() == 1);
}

TEST_CASE("degeneracy_report: invariant to row permutation") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const LinearProgram lp = invlp::testing::random_feasible_bounded_lp(rng, 3, 7);
        const PrimalDualSolution sol = solve(lp);
        REQUIRE(sol.status == SolveStatus::Optimal);
        const DegeneracyReport rep = degeneracy_report(lp, sol);

        std::vector<Index> perm(lp.num_ineq());
        for (Index i = 0; i < lp.num_ineq(); ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), rng);
        LinearProgram plp = lp;
        PrimalDualSolution psol = sol;
        for (Index i = 0; i < lp.num_ineq(); ++i) {
            plp.A.row(i) = lp.A.row(perm[i]);
            plp.b(i) = lp.b(perm[i]);
            psol.lam(i) = sol.lam(perm[i]);
        }
        const DegeneracyReport prep = degeneracy_report(plp, psol);
        CHECK(prep.is_degenerate == rep.is_degenerate);
        CHECK(prep.active_rank == rep.active_rank);
        CHECK(prep.active_inequalities.size() == rep.active_inequalities.size());
        CHECK(prep.strictly_active.size() == rep.strictly_active.size());
    }
}

TEST_CASE("lp json round trip") {
    const LinearProgram lp = figure1_lp();
    const LinearProgram back = lp_from_json(to_json(lp));
    CHECK((back.c - lp.c).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.A - lp.A).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.b - lp.b).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.num_eq() == 0);

    // Absent G/h means no equality block.
    const LinearProgram parsed = lp_from_json(Json{{"c", {1.0}}, {"A", {{-1.0}}}, {"b", {-1.0}}});
    CHECK(parsed.num_eq() == 0);
    CHECK(parsed.num_ineq() == 1);
}
