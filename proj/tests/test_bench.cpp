#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "invlp/bench.hpp"

using namespace invlp;

namespace {

TrialConfig quick_figure1(std::uint64_t seed, SolverKind solver = SolverKind::SqpDirect) {
    TrialConfig c;
    c.family = Family::Figure1;
    c.solver = solver;
    c.n_train = 1;
    c.n_test = 4;
    c.seed = seed;
    c.time_budget_s = 30.0;
    c.sqp.max_iters = 120;
    c.rs_max_samples = 300;
    return c;
}

}  // namespace

TEST_CASE("run_trial: figure-1 with sqp_direct learns the instance") {
    const TrialResult r = run_trial(quick_figure1(7));
    REQUIRE(r.valid);
    CHECK(r.w_learned.size() == 2);
    CHECK(r.max_outer_violation <= 1e-6);
    CHECK(r.train_aoe <= 1e-5);
    CHECK(r.success);
    CHECK(r.time_to_success_s <= 30.0);
}

TEST_CASE("run_trial: deterministic content under a fixed seed") {
    const TrialConfig config = quick_figure1(11);
    const TrialResult a = run_trial(config);
    const TrialResult b = run_trial(config);
    const Json ja = to_json(a, false);
    const Json jb = to_json(b, false);
    CHECK(ja.dump() == jb.dump());
}

TEST_CASE("run_trial: random search on figure-1 mostly violates target feasibility") {
    const TrialResult r = run_trial(quick_figure1(13, SolverKind::RandomSearch));
    REQUIRE(r.valid);
    // Counting trace rows with positive violation: most samples break
    // the outer constraints.
    int violated = 0;
    for (const auto& row : r.trace)
        if (std::max(row.max_g, row.norm_h) > 1e-8) ++violated;
    CHECK(violated * 2 > static_cast<int>(r.trace.size()));
}

TEST_CASE("box_stats and success_curve basics") {
    const BoxStats s = box_stats({3, 1, 2, 4, 5});
    CHECK(s.min == 1);
    CHECK(s.max == 5);
    CHECK(s.median == 3);
    CHECK(s.mean == 3);

    std::vector<TrialResult> trials(4);
    trials[0].success = true;
    trials[0].time_to_success_s = 0.5;
    trials[1].success = true;
    trials[1].time_to_success_s = 2.0;
    trials[2].success = false;
    trials[3].success = true;
    trials[3].time_to_success_s = 10.0;
    const auto curve = success_curve(trials, 60.0, 32);
    REQUIRE(!curve.empty());
    double prev = 0.0;
    for (const auto& p : curve) {
        CHECK(p.probability >= prev - 1e-12);  // monotone CDF
        CHECK(p.probability >= 0.0);
        CHECK(p.probability <= 1.0);
        prev = p.probability;
    }
    CHECK(curve.back().probability == doctest::Approx(0.75));
}

TEST_CASE("suite outputs: files exist and CSV rows round-trip the JSON store") {
    const std::string out_dir = "bench_test_out";
    std::filesystem::remove_all(out_dir);

    std::vector<TrialConfig> configs = {quick_figure1(17)};
    configs[0].label = "fig1";
    const SuiteReport report = run_suite(configs, 2);
    REQUIRE(report.runs.size() == 1);
    REQUIRE(report.runs[0].trials.size() == 2);
    write_suite_outputs(report, out_dir);

    CHECK(std::filesystem::exists(out_dir + "/results.json"));
    CHECK(std::filesystem::exists(out_dir + "/success_curve.csv"));
    CHECK(std::filesystem::exists(out_dir + "/loss_box.csv"));
    CHECK(std::filesystem::exists(out_dir + "/trace_fig1_0.csv"));

    // Round trip: trace CSV rows reproduce the stored trace values exactly.
    const Json store = load_json_file(out_dir + "/results.json");
    std::ifstream trace(out_dir + "/trace_fig1_0.csv");
    std::string header;
    std::getline(trace, header);
    CHECK(header == "iter,wall_time_s,f,max_g,norm_h,step_alpha");
    const auto& rows = report.runs[0].trials[0].trace;
    size_t idx = 0;
    std::string line;
    while (std::getline(trace, line)) {
        REQUIRE(idx < rows.size());
        std::stringstream ss(line);
        std::string field;
        std::getline(ss, field, ',');
        CHECK(std::stoi(field) == rows[idx].iter);
        std::getline(ss, field, ',');
        CHECK(std::stod(field) == rows[idx].wall_time_s);
        std::getline(ss, field, ',');
        CHECK(std::stod(field) == rows[idx].f);
        std::getline(ss, field, ',');
        CHECK(std::stod(field) == rows[idx].max_g);
        std::getline(ss, field, ',');
        CHECK(std::stod(field) == rows[idx].norm_h);
        std::getline(ss, field, ',');
        CHECK(std::stod(field) == rows[idx].step_alpha);
        ++idx;
    }
    CHECK(idx == rows.size());
    std::filesystem::remove_all(out_dir);
}

TEST_CASE("figure-5 reproduction exhibits the generalization gap") {
    Figure5Options opts;
    opts.grid_points = 11;  // keep the unit test quick
    const Figure5Report report = figure5_reproduction(opts);
    CHECK(report.train_aoe <= 1e-6);
    CHECK(report.test_aoe >= 0.05);
    CHECK(report.test_aoe <= 1.0);
    CHECK(report.decision_grid.rows() == 121);
    // The learned map should still fit the training points but disagree at
    // the test point, which sits at SOE around 8/9.
    CHECK(report.test_soe > 0.1);
}

TEST_CASE("figure-1 suite succeeds on nearly every seed") {
    TrialConfig config = quick_figure1(71);
    config.label = "f1_suite";
    const SuiteReport report = run_suite({config}, 10);
    int successes = 0;
    for (const auto& t : report.runs[0].trials)
        if (t.valid && t.success) ++successes;
    CHECK(successes >= 9);
    const auto curve = success_curve(report.runs[0].trials, config.time_budget_s);
    if (successes == 10) CHECK(curve.back().probability == doctest::Approx(1.0));
}

TEST_CASE("random search fails on the larger synthetic shape") {
    TrialConfig rs;
    rs.family = Family::Synthetic;
    rs.gen = {.D = 10, .M1 = 80, .M2 = 0, .K = 6, .dim_u = 2, .seed = 0};
    rs.solver = SolverKind::RandomSearch;
    rs.n_train = 20;
    rs.n_test = 0;
    rs.seed = 73;
    rs.time_budget_s = 60.0;
    rs.rs_max_samples = 300;
    const TrialResult r = run_trial(rs);
    REQUIRE(r.valid);
    CHECK_FALSE(r.success);
    CHECK(r.train_aoe > 1e-5);
}

TEST_CASE("failed trials flag the suite incomplete") {
    TrialConfig broken;
    broken.family = Family::Synthetic;
    broken.gen.D = 1;  // the generator rejects D < 2
    broken.seed = 3;
    const SuiteReport report = run_suite({broken}, 2);
    CHECK_FALSE(report.complete);
    CHECK_FALSE(report.runs[0].trials[0].valid);
    CHECK_FALSE(report.runs[0].trials[0].error.empty());
}

TEST_CASE("trial config json round trip") {
    TrialConfig c = quick_figure1(23);
    c.loss = Loss::Sde;
    c.solver = SolverKind::SqpImplicit;
    c.reduction = false;
    c.multi_start = 3;
    c.gen.D = 4;
    const TrialConfig back = trial_config_from_json(to_json(c));
    CHECK(back.family == c.family);
    CHECK(back.loss == c.loss);
    CHECK(back.solver == c.solver);
    CHECK(back.reduction == c.reduction);
    CHECK(back.multi_start == c.multi_start);
    CHECK(back.gen.D == c.gen.D);
    CHECK(back.seed == c.seed);
    CHECK(back.sqp.max_iters == c.sqp.max_iters);
}
