#include "invlp/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "invlp/parallel.hpp"

namespace invlp {

namespace fs = std::filesystem;

const char* to_string(Family f) {
    switch (f) {
        case Family::Figure1: return "figure1";
        case Family::Figure5: return "figure5";
        case Family::Synthetic: return "synthetic";
        case Family::FullCoefficient: return "full_coefficient";
        case Family::Nguyen: return "nguyen";
    }
    return "unknown";
}

const char* to_string(SolverKind s) {
    switch (s) {
        case SolverKind::SqpDirect: return "sqp_direct";
        case SolverKind::SqpImplicit: return "sqp_implicit";
        case SolverKind::SqpFd: return "sqp_fd";
        case SolverKind::RandomSearch: return "random_search";
    }
    return "unknown";
}

Family family_from_string(const std::string& s) {
    if (s == "figure1") return Family::Figure1;
    if (s == "figure5") return Family::Figure5;
    if (s == "synthetic") return Family::Synthetic;
    if (s == "full_coefficient") return Family::FullCoefficient;
    if (s == "nguyen") return Family::Nguyen;
    throw std::invalid_argument("unknown family: " + s);
}

SolverKind solver_from_string(const std::string& s) {
    if (s == "sqp_direct") return SolverKind::SqpDirect;
    if (s == "sqp_implicit") return SolverKind::SqpImplicit;
    if (s == "sqp_fd") return SolverKind::SqpFd;
    if (s == "random_search") return SolverKind::RandomSearch;
    throw std::invalid_argument("unknown solver: " + s);
}

std::string TrialConfig::display_label() const {
    if (!label.empty()) return label;
    return std::string(to_string(family)) + "_" + to_string(solver);
}

ParametricModel build_family_model(Family family, const SyntheticSpec& gen, std::uint64_t seed) {
    switch (family) {
        case Family::Figure1: return figure1_model();
        case Family::Figure5: return figure5_model();
        case Family::Synthetic: {
            SyntheticSpec spec = gen;
            spec.seed = mix_seed(seed, 1);
            return synthetic_plp_generator(spec);
        }
        case Family::FullCoefficient: {
            SyntheticSpec spec = gen;
            spec.seed = mix_seed(seed, 1);
            spec.dim_u = 0;
            const ParametricModel synth = synthetic_plp_generator(spec);
            const LinearProgram base = synth.coeffs(Vector(0), *synth.true_w);
            return full_coefficient_model(base);
        }
        case Family::Nguyen: return nguyen_dupuis_model(mix_seed(seed, 1));
    }
    throw std::invalid_argument("build_family_model: bad family");
}

namespace {

GradMethod grad_method_for(SolverKind solver) {
    switch (solver) {
        case SolverKind::SqpImplicit: return GradMethod::Implicit;
        case SolverKind::SqpFd: return GradMethod::FiniteDifference;
        default: return GradMethod::Direct;
    }
}

double mean_train_aoe(const IlopProblem& problem, const Vector& w_full) {
    IlopProblem aoe = problem;
    aoe.loss = Loss::Aoe;
    aoe.reduced.reset();
    return outer_objective(aoe, w_full, false).f;
}

}  // namespace

TrialResult run_trial(const TrialConfig& config) {
    TrialResult result;
    try {
        // Instance generation: excluded from the learning clock.
        ParametricModel model = build_family_model(config.family, config.gen, config.seed);
        Rng data_rng(mix_seed(config.seed, 2));
        Index n_train = config.n_train;
        Index n_test = config.n_test;
        if (config.family == Family::FullCoefficient) {
            n_train = 1;  // a single target fully specifies the instance
            n_test = 0;
        }
        const auto train = generate_dataset(model, n_train, data_rng);
        const auto test = generate_dataset(model, n_test, data_rng);

        IlopProblem problem;
        problem.model = model;
        problem.train = train;
        problem.loss = config.loss;
        problem.regularizer_weight = config.regularizer_weight;
        problem.grad_method = grad_method_for(config.solver);

        // Violation is always reported against the unreduced system.
        const Vector some_w = *model.true_w;
        const AssembledNlp monitor = assemble_nlp(problem, some_w, false);

        const auto t0 = std::chrono::steady_clock::now();
        auto elapsed = [&] {
            return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        };

        bool have_best = false;
        Vector best_w;  // in full coordinates
        double best_viol = std::numeric_limits<double>::infinity();

        for (int start = 0; start < std::max(1, config.multi_start); ++start) {
            if (start > 0 && elapsed() > config.time_budget_s / 2) break;
            ++result.starts_used;
            Rng start_rng(mix_seed(config.seed, 100 + static_cast<std::uint64_t>(start)));
            const Vector w_ini = model.admissible.sample(start_rng);

            NlpOutcome out;
            Vector w_full;
            if (config.solver == SolverKind::RandomSearch) {
                const AssembledNlp nlp = assemble_nlp(problem, w_ini, false);
                RandomSearchOptions rs;
                rs.max_samples = config.rs_max_samples;
                rs.time_budget_s = config.time_budget_s - elapsed();
                rs.seed = mix_seed(config.seed, 200 + static_cast<std::uint64_t>(start));
                const AdmissibleSet W = model.admissible;
                out = random_search(nlp.nlp, [W](Rng& rng) { return W.sample(rng); }, rs);
                w_full = out.w;
            } else {
                const AssembledNlp nlp = assemble_nlp(problem, w_ini, config.reduction);
                SqpOptions opts = config.sqp;
                opts.time_budget_s = config.time_budget_s - elapsed();
                out = sqp_solve(nlp.nlp, nlp.w0, opts);
                w_full = nlp.reduction ? nlp.reduction->to_full(out.w) : out.w;
            }
            result.iterations += out.iterations;
            result.objective_evals += out.objective_evals;
            if (w_full.size() == 0) continue;

            const double viol = monitor.nlp.violation(w_full);
            const double aoe = mean_train_aoe(problem, w_full);
            const bool succeeded = aoe <= config.success_tol && viol <= config.feas_tol;

            const bool better =
                !have_best ||
                (viol <= config.feas_tol && best_viol > config.feas_tol) ||
                ((viol <= config.feas_tol) == (best_viol <= config.feas_tol) &&
                 aoe < result.train_aoe);
            if (better) {
                have_best = true;
                best_w = w_full;
                best_viol = viol;
                result.train_aoe = aoe;
                result.trace = out.trace;
            }
            if (succeeded) {
                result.success = true;
                result.time_to_success_s = elapsed();
                break;
            }
        }

        result.learn_time_s = elapsed();
        if (!have_best) {
            result.valid = false;
            result.error = "no usable iterate produced";
            return result;
        }
        if (result.success && result.time_to_success_s > config.time_budget_s)
            result.success = false;

        result.w_learned = best_w;
        result.max_outer_violation = best_viol;
        IlopProblem eval_problem = problem;
        eval_problem.reduced.reset();
        result.train_loss = outer_objective(eval_problem, best_w, false).f;

        std::vector<double> aoes, sdes;
        for (const auto& s : test) {
            const TestLosses tl = test_losses(model, *model.true_w, best_w, s);
            aoes.push_back(tl.aoe);
            sdes.push_back(tl.sde);
        }
        if (!aoes.empty()) {
            const BoxStats ba = box_stats(aoes);
            const BoxStats bs = box_stats(sdes);
            result.test_aoe_mean = ba.mean;
            result.test_aoe_median = ba.median;
            result.test_sde_mean = bs.mean;
            result.test_sde_median = bs.median;
        }
    } catch (const std::exception& e) {
        result.valid = false;
        result.error = e.what();
    }
    return result;
}

// ---------------------------------------------------------------------------
// Statistics and reports
// ---------------------------------------------------------------------------

BoxStats box_stats(std::vector<double> values) {
    BoxStats stats;
    if (values.empty()) return stats;
    std::sort(values.begin(), values.end());
    auto quantile = [&](double q) {
        const double pos = q * (values.size() - 1);
        const size_t lo = static_cast<size_t>(pos);
        const size_t hi = std::min(lo + 1, values.size() - 1);
        const double frac = pos - lo;
        return values[lo] * (1 - frac) + values[hi] * frac;
    };
    stats.min = values.front();
    stats.max = values.back();
    stats.q1 = quantile(0.25);
    stats.median = quantile(0.5);
    stats.q3 = quantile(0.75);
    stats.mean = 0;
    for (double v : values) stats.mean += v;
    stats.mean /= static_cast<double>(values.size());
    return stats;
}

std::vector<CurvePoint> success_curve(const std::vector<TrialResult>& trials, double t_max,
                                      int points) {
    std::vector<CurvePoint> curve;
    if (trials.empty() || points < 2) return curve;
    const double t_lo = 1e-3;
    for (int i = 0; i < points; ++i) {
        const double t =
            t_lo * std::pow(std::max(t_max, 2 * t_lo) / t_lo, i / static_cast<double>(points - 1));
        int hits = 0;
        for (const auto& r : trials)
            if (r.success && r.time_to_success_s <= t) ++hits;
        curve.push_back({t, hits / static_cast<double>(trials.size())});
    }
    return curve;
}

SuiteReport run_suite(const std::vector<TrialConfig>& configs, int trials) {
    if (trials < 1) throw std::invalid_argument("run_suite: trials must be >= 1");
    SuiteReport report;
    report.runs.resize(configs.size());
    for (size_t c = 0; c < configs.size(); ++c) {
        report.runs[c].config = configs[c];
        report.runs[c].trials.resize(trials);
    }
    const Index total = static_cast<Index>(configs.size()) * trials;
    parallel_for(total, [&](Index idx) {
        const size_t c = static_cast<size_t>(idx) / trials;
        const int t = static_cast<int>(idx % trials);
        TrialConfig config = configs[c];
        config.seed = mix_seed(configs[c].seed, static_cast<std::uint64_t>(t) + 1);
        report.runs[c].trials[t] = run_trial(config);
    });
    for (const auto& run : report.runs)
        for (const auto& t : run.trials)
            if (!t.valid) report.complete = false;
    return report;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

Json to_json(const TrialConfig& c) {
    Json j;
    j["family"] = to_string(c.family);
    j["generator"] = {{"d", c.gen.D},         {"m1", c.gen.M1}, {"m2", c.gen.M2},
                      {"k", c.gen.K},         {"dim_u", c.gen.dim_u}};
    j["n_train"] = c.n_train;
    j["n_test"] = c.n_test;
    j["loss"] = to_string(c.loss);
    j["solver"] = to_string(c.solver);
    j["time_budget_s"] = c.time_budget_s;
    j["success_tol"] = c.success_tol;
    j["feas_tol"] = c.feas_tol;
    j["seed"] = c.seed;
    j["multi_start"] = c.multi_start;
    j["reduction"] = c.reduction ? "on" : "off";
    j["regularizer_weight"] = c.regularizer_weight;
    j["rs_max_samples"] = c.rs_max_samples;
    j["label"] = c.display_label();
    j["sqp"] = {{"max_iters", c.sqp.max_iters},
                {"kkt_tol", c.sqp.kkt_tol},
                {"step_tol", c.sqp.step_tol},
                {"merit_rho0", c.sqp.merit_rho0},
                {"seed", c.sqp.seed}};
    return j;
}

TrialConfig trial_config_from_json(const Json& j) {
    TrialConfig c;
    if (j.contains("family")) c.family = family_from_string(j["family"].get<std::string>());
    if (j.contains("generator")) {
        const Json& g = j["generator"];
        if (g.contains("d")) c.gen.D = g["d"].get<Index>();
        if (g.contains("m1")) c.gen.M1 = g["m1"].get<Index>();
        if (g.contains("m2")) c.gen.M2 = g["m2"].get<Index>();
        if (g.contains("k")) c.gen.K = g["k"].get<Index>();
        if (g.contains("dim_u")) c.gen.dim_u = g["dim_u"].get<Index>();
    }
    if (j.contains("n_train")) c.n_train = j["n_train"].get<Index>();
    if (j.contains("n_test")) c.n_test = j["n_test"].get<Index>();
    if (j.contains("loss")) c.loss = j["loss"].get<std::string>() == "sde" ? Loss::Sde : Loss::Aoe;
    if (j.contains("solver")) c.solver = solver_from_string(j["solver"].get<std::string>());
    if (j.contains("time_budget_s")) c.time_budget_s = j["time_budget_s"].get<double>();
    if (j.contains("success_tol")) c.success_tol = j["success_tol"].get<double>();
    if (j.contains("feas_tol")) c.feas_tol = j["feas_tol"].get<double>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("multi_start")) c.multi_start = j["multi_start"].get<int>();
    if (j.contains("reduction")) {
        const auto& r = j["reduction"];
        c.reduction = r.is_boolean() ? r.get<bool>() : r.get<std::string>() == "on";
    }
    if (j.contains("regularizer_weight"))
        c.regularizer_weight = j["regularizer_weight"].get<double>();
    if (j.contains("rs_max_samples")) c.rs_max_samples = j["rs_max_samples"].get<long>();
    if (j.contains("label")) c.label = j["label"].get<std::string>();
    if (j.contains("sqp")) {
        const Json& s = j["sqp"];
        if (s.contains("max_iters")) c.sqp.max_iters = s["max_iters"].get<int>();
        if (s.contains("kkt_tol")) c.sqp.kkt_tol = s["kkt_tol"].get<double>();
        if (s.contains("step_tol")) c.sqp.step_tol = s["step_tol"].get<double>();
        if (s.contains("merit_rho0")) c.sqp.merit_rho0 = s["merit_rho0"].get<double>();
        if (s.contains("seed")) c.sqp.seed = s["seed"].get<std::uint64_t>();
    }
    return c;
}

Json to_json(const TrialResult& r, bool include_timing) {
    Json j;
    j["valid"] = r.valid;
    if (!r.error.empty()) j["error"] = r.error;
    j["train_loss"] = r.train_loss;
    j["train_aoe"] = r.train_aoe;
    j["test_aoe_mean"] = r.test_aoe_mean;
    j["test_aoe_median"] = r.test_aoe_median;
    j["test_sde_mean"] = r.test_sde_mean;
    j["test_sde_median"] = r.test_sde_median;
    j["max_outer_violation"] = r.max_outer_violation;
    j["success"] = r.success;
    j["w_learned"] = to_json(r.w_learned);
    j["starts_used"] = r.starts_used;
    j["iterations"] = r.iterations;
    j["objective_evals"] = r.objective_evals;
    if (include_timing) {
        j["time_to_success_s"] = std::isfinite(r.time_to_success_s) ? Json(r.time_to_success_s)
                                                                    : Json(nullptr);
        j["learn_time_s"] = r.learn_time_s;
    }
    return j;
}

Json SuiteReport::to_json(bool include_timing) const {
    Json j;
    j["complete"] = complete;
    Json runs_json = Json::array();
    for (const auto& run : runs) {
        Json r;
        r["config"] = invlp::to_json(run.config);
        Json trials_json = Json::array();
        for (const auto& t : run.trials) trials_json.push_back(invlp::to_json(t, include_timing));
        r["trials"] = std::move(trials_json);
        runs_json.push_back(std::move(r));
    }
    j["runs"] = std::move(runs_json);
    return j;
}

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void write_suite_outputs(const SuiteReport& report, const std::string& out_dir) {
    fs::create_directories(out_dir);
    save_json_file(out_dir + "/results.json", report.to_json(true));

    std::ofstream curve(out_dir + "/success_curve.csv");
    curve << "label,t_seconds,probability\n";
    for (const auto& run : report.runs) {
        const auto points = success_curve(run.trials, run.config.time_budget_s);
        for (const auto& p : points)
            curve << run.config.display_label() << "," << fmt_double(p.t) << ","
                  << fmt_double(p.probability) << "\n";
    }

    std::ofstream box(out_dir + "/loss_box.csv");
    box << "label,metric,min,q1,median,q3,max,mean\n";
    for (const auto& run : report.runs) {
        std::vector<double> train, test_mean, test_median;
        for (const auto& t : run.trials) {
            if (!t.valid) continue;
            train.push_back(t.train_loss);
            test_mean.push_back(t.test_aoe_mean);
            test_median.push_back(t.test_aoe_median);
        }
        const auto emit = [&](const std::string& metric, const BoxStats& s) {
            box << run.config.display_label() << "," << metric << "," << fmt_double(s.min) << ","
                << fmt_double(s.q1) << "," << fmt_double(s.median) << "," << fmt_double(s.q3)
                << "," << fmt_double(s.max) << "," << fmt_double(s.mean) << "\n";
        };
        emit("train_loss", box_stats(train));
        emit("test_aoe_mean", box_stats(test_mean));
        emit("test_aoe_median", box_stats(test_median));
    }

    for (const auto& run : report.runs) {
        for (size_t t = 0; t < run.trials.size(); ++t) {
            std::ofstream trace(out_dir + "/trace_" + run.config.display_label() + "_" +
                                std::to_string(t) + ".csv");
            trace << "iter,wall_time_s,f,max_g,norm_h,step_alpha\n";
            for (const auto& row : run.trials[t].trace)
                trace << row.iter << "," << fmt_double(row.wall_time_s) << "," << fmt_double(row.f)
                      << "," << fmt_double(row.max_g) << "," << fmt_double(row.norm_h) << ","
                      << fmt_double(row.step_alpha) << "\n";
        }
    }
}

// ---------------------------------------------------------------------------
// Figure-5 reproduction
// ---------------------------------------------------------------------------

Figure5Report figure5_reproduction(const Figure5Options& opts) {
    ParametricModel model = figure5_model();
    std::vector<Vector> train_u = opts.train_u;
    if (train_u.empty()) {
        train_u.push_back((Vector(2) << 1.0, 1.0 / 3.0).finished());
        train_u.push_back((Vector(2) << 1.0 / 3.0, 1.0).finished());
    }

    IlopProblem problem;
    problem.model = model;
    for (const Vector& u : train_u) {
        const PrimalDualSolution sol = solve(model.lp_at(u, *model.true_w));
        if (sol.status != SolveStatus::Optimal)
            throw std::runtime_error("figure5_reproduction: training solve failed");
        problem.train.push_back({u, sol.x});
    }
    problem.loss = Loss::Aoe;
    problem.grad_method = GradMethod::Direct;

    const AssembledNlp nlp = assemble_nlp(problem, opts.w_ini, false);
    const NlpOutcome out = sqp_solve(nlp.nlp, nlp.w0, opts.sqp);

    Figure5Report report;
    report.w_ini = opts.w_ini;
    report.w_learned = out.w;
    report.train_aoe = mean_train_aoe(problem, out.w);

    TrainingSample test_sample;
    test_sample.u = opts.u_test;
    const PrimalDualSolution test_sol = solve(model.lp_at(opts.u_test, *model.true_w));
    test_sample.x_obs = test_sol.x;
    const TestLosses tl = test_losses(model, *model.true_w, out.w, test_sample);
    report.test_aoe = tl.aoe;
    report.test_soe = 2.0 * tl.sde;

    const Index n = std::max<Index>(opts.grid_points, 2);
    report.decision_grid.resize(n * n, 6);
    Index row = 0;
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j, ++row) {
            Vector u(2);
            u << i / static_cast<double>(n - 1), j / static_cast<double>(n - 1);
            const PrimalDualSolution st = solve(model.lp_at(u, *model.true_w));
            const PrimalDualSolution sl = solve(model.lp_at(u, out.w));
            report.decision_grid(row, 0) = u(0);
            report.decision_grid(row, 1) = u(1);
            report.decision_grid(row, 2) = st.x(0);
            report.decision_grid(row, 3) = st.x(1);
            report.decision_grid(row, 4) = sl.x(0);
            report.decision_grid(row, 5) = sl.x(1);
        }
    }
    return report;
}

Json Figure5Report::to_json() const {
    Json j;
    j["w_ini"] = invlp::to_json(w_ini);
    j["w_learned"] = invlp::to_json(w_learned);
    j["train_aoe"] = train_aoe;
    j["test_aoe"] = test_aoe;
    j["test_soe"] = test_soe;
    return j;
}

void write_figure5_outputs(const Figure5Report& report, const std::string& out_dir) {
    fs::create_directories(out_dir);
    save_json_file(out_dir + "/figure5.json", report.to_json());
    std::ofstream grid(out_dir + "/decision_map.csv");
    grid << "u1,u2,x1_true,x2_true,x1_learned,x2_learned\n";
    for (Index r = 0; r < report.decision_grid.rows(); ++r) {
        for (Index c = 0; c < 6; ++c) {
            grid << fmt_double(report.decision_grid(r, c));
            grid << (c == 5 ? '\n' : ',');
        }
    }
}

}  // namespace invlp
