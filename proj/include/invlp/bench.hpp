#pragma once

#include <string>

#include "invlp/ilop.hpp"
#include "invlp/json_io.hpp"

namespace invlp {

enum class Family { Figure1, Figure5, Synthetic, FullCoefficient, Nguyen };
enum class SolverKind { SqpDirect, SqpImplicit, SqpFd, RandomSearch };

const char* to_string(Family f);
const char* to_string(SolverKind s);
Family family_from_string(const std::string& s);
SolverKind solver_from_string(const std::string& s);

struct TrialConfig {
    Family family = Family::Synthetic;
    SyntheticSpec gen;  // sizes for synthetic / full-coefficient families
    Index n_train = 20;
    Index n_test = 20;
    Loss loss = Loss::Aoe;
    SolverKind solver = SolverKind::SqpDirect;
    double time_budget_s = 60.0;
    double success_tol = 1e-5;  // on mean train AOE
    double feas_tol = 1e-6;     // on the outer constraint violation
    std::uint64_t seed = 0;
    int multi_start = 1;
    bool reduction = true;
    double regularizer_weight = 0.0;
    SqpOptions sqp;
    long rs_max_samples = 2000;
    std::string label;  // used in report files; defaults to family/solver

    std::string display_label() const;
};

struct TrialResult {
    bool valid = true;   // generation or solver hard failures record invalid trials
    std::string error;
    double train_loss = std::numeric_limits<double>::infinity();  // configured loss
    double train_aoe = std::numeric_limits<double>::infinity();   // success metric
    double test_aoe_mean = 0.0, test_aoe_median = 0.0;
    double test_sde_mean = 0.0, test_sde_median = 0.0;
    double max_outer_violation = std::numeric_limits<double>::infinity();
    bool success = false;
    double time_to_success_s = std::numeric_limits<double>::infinity();
    double learn_time_s = 0.0;  // excludes instance generation
    Vector w_learned;
    int starts_used = 0;
    int iterations = 0;
    int objective_evals = 0;
    std::vector<SqpTraceRow> trace;  // best start's trace
};

TrialResult run_trial(const TrialConfig& config);

Json to_json(const TrialConfig& c);
TrialConfig trial_config_from_json(const Json& j);
/// Deterministic content only unless include_timing is set: wall-clock
/// fields stay out of the byte-comparable result store.
Json to_json(const TrialResult& r, bool include_timing = true);

struct BoxStats {
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, mean = 0;
};
BoxStats box_stats(std::vector<double> values);

struct CurvePoint {
    double t = 0;
    double probability = 0;
};
/// CDF of time-to-success over trials on a log-spaced grid.
std::vector<CurvePoint> success_curve(const std::vector<TrialResult>& trials, double t_max,
                                      int points = 64);

struct SuiteRun {
    TrialConfig config;
    std::vector<TrialResult> trials;
};

struct SuiteReport {
    std::vector<SuiteRun> runs;
    bool complete = true;
    Json to_json(bool include_timing = true) const;
};

/// Runs `trials` seeded repetitions of every config (trial seeds derived
/// from the config seed), in parallel across a worker pool.
SuiteReport run_suite(const std::vector<TrialConfig>& configs, int trials);

/// Writes results.json, success_curve.csv, loss_box.csv and per-trial
/// trace_<label>_<index>.csv under out_dir.
void write_suite_outputs(const SuiteReport& report, const std::string& out_dir);

struct Figure5Options {
    Vector w_ini = (Vector(2) << 4.0, 1.0).finished();
    std::vector<Vector> train_u;  // defaults to {(1, 1/3), (1/3, 1)}
    Vector u_test = (Vector(2) << 0.5, 5.0 / 6.0).finished();
    SqpOptions sqp;
    Index grid_points = 41;
};

struct Figure5Report {
    Vector w_ini, w_learned;
    double train_aoe = 0.0;
    double test_aoe = 0.0;
    double test_soe = 0.0;  // squared decision error without the 1/2 factor
    /// Rows of (u1, u2, x1_true, x2_true, x1_learned, x2_learned).
    Matrix decision_grid;
    Json to_json() const;
};

/// Trains the figure-5 PLP from w_ini on its two training points and
/// evaluates the generalization gap at u_test, emitting decision-map grids
/// for plotting.
Figure5Report figure5_reproduction(const Figure5Options& opts = {});

void write_figure5_outputs(const Figure5Report& report, const std::string& out_dir);

/// Builds the model for a family (seed-derived true_w for generated
/// families).
ParametricModel build_family_model(Family family, const SyntheticSpec& gen, std::uint64_t seed);

}  // namespace invlp
