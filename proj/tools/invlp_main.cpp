#include <CLI11.hpp>
#include <iostream>

#include "invlp/bench.hpp"
#include "invlp/grad.hpp"
#include "invlp/ilop.hpp"
#include "invlp/ipm.hpp"
#include "invlp/json_io.hpp"
#include "invlp/lp_core.hpp"
#include "invlp/model.hpp"

namespace {

using namespace invlp;

int cmd_solve(const std::string& lp_path, double tol, int max_iters) {
    const LinearProgram lp = lp_from_json(load_json_file(lp_path));
    IpmSettings settings;
    if (tol > 0) settings.tol_gap = settings.tol_primal = settings.tol_dual = tol;
    settings.max_iters = max_iters;
    const PrimalDualSolution sol = solve(lp, settings);
    std::cout << to_json(sol).dump(2) << "\n";
    return 0;
}

int cmd_grad(const std::string& lp_path, const std::string& xobs_path, const std::string& loss,
             const std::string& method, double step) {
    const LinearProgram lp = lp_from_json(load_json_file(lp_path));
    const Vector x_obs = vector_from_json(load_json_file(xobs_path));
    const LossKind kind = loss == "sde" ? LossKind::Sde : LossKind::Aoe;

    CoefficientJacobians jac;
    if (method == "fd") {
        jac = finite_difference_grads(lp, x_obs, kind, step);
    } else {
        const PrimalDualSolution sol = solve(lp);
        if (sol.status != SolveStatus::Optimal) {
            std::cerr << "solve status: " << to_string(sol.status)
                      << " (gradients need an Optimal solution)\n";
            return 3;
        }
        if (method == "implicit") {
            jac = kind == LossKind::Aoe ? aoe_implicit_grads(lp, sol, x_obs)
                                        : implicit_grads(lp, sol, Vector(sol.x - x_obs));
        } else {
            if (kind == LossKind::Sde) {
                std::cerr << "the direct method covers objective-error losses only; "
                             "use --method implicit for sde\n";
                return 2;
            }
            jac = aoe_coefficient_grads(lp, sol, x_obs);
        }
        if (jac.degenerate_warning)
            std::cerr << "warning: degenerate optimum; returned values are a subgradient choice\n";
    }
    std::cout << to_json(jac).dump(2) << "\n";
    return 0;
}

int cmd_generate(const std::string& family_name, std::uint64_t seed, const std::string& out_dir,
                 const SyntheticSpec& gen, Index n_train, Index n_test) {
    const Family family = family_from_string(family_name);
    const ParametricModel model = build_family_model(family, gen, seed);
    Rng rng(mix_seed(seed, 2));
    const auto train = generate_dataset(model, n_train, rng);
    const auto test = generate_dataset(model, n_test, rng);

    std::filesystem::create_directories(out_dir);
    Json meta;
    meta["family"] = family_name;
    meta["name"] = model.name;
    meta["seed"] = seed;
    meta["dims"] = {{"d", model.dims.D},
                    {"m1", model.dims.M1},
                    {"m2", model.dims.M2},
                    {"k", model.dims.K},
                    {"dim_u", model.dims.dim_u}};
    if (model.true_w) meta["true_w"] = to_json(*model.true_w);
    save_json_file(out_dir + "/model.json", meta);

    auto dataset_json = [](const std::vector<TrainingSample>& samples) {
        Json arr = Json::array();
        for (const auto& s : samples)
            arr.push_back(Json{{"u", to_json(s.u)}, {"x_obs", to_json(s.x_obs)}});
        return arr;
    };
    save_json_file(out_dir + "/train.json", dataset_json(train));
    save_json_file(out_dir + "/test.json", dataset_json(test));
    std::cout << "wrote " << out_dir << "/model.json, train.json (" << train.size()
              << "), test.json (" << test.size() << ")\n";
    return 0;
}

int cmd_learn(const std::string& config_path, const std::string& out_dir) {
    const TrialConfig config = trial_config_from_json(load_json_file(config_path));
    const TrialResult result = run_trial(config);
    std::filesystem::create_directories(out_dir);
    save_json_file(out_dir + "/results.json", to_json(result, true));
    SuiteReport single;
    single.runs.push_back({config, {result}});
    write_suite_outputs(single, out_dir);
    std::cout << to_json(result, true).dump(2) << "\n";
    return result.valid ? 0 : 3;
}

int cmd_bench(const std::string& suite_path, const std::string& out_dir) {
    const Json j = load_json_file(suite_path);
    const int trials = j.value("trials", 10);
    std::vector<TrialConfig> configs;
    for (const Json& cj : j.at("configs")) configs.push_back(trial_config_from_json(cj));
    const SuiteReport report = run_suite(configs, trials);
    write_suite_outputs(report, out_dir);
    std::cout << "suite " << (report.complete ? "complete" : "INCOMPLETE (failed trials)")
              << "; outputs in " << out_dir << "\n";
    return 0;
}

int cmd_figure5(const std::string& out_dir) {
    const Figure5Report report = figure5_reproduction();
    write_figure5_outputs(report, out_dir);
    std::cout << report.to_json().dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Inverse linear optimization toolkit"};
    app.require_subcommand(1);

    std::string lp_path, xobs_path, config_path, suite_path;
    std::string out_dir = "out";
    std::string loss = "aoe", method = "direct", family = "synthetic";
    double tol = -1.0, step = 1e-5;
    int max_iters = 200;
    std::uint64_t seed = 0;
    invlp::SyntheticSpec gen;
    invlp::Index n_train = 20, n_test = 20;

    auto* solve_cmd = app.add_subcommand("solve", "Solve an LP from a JSON file");
    solve_cmd->add_option("lp", lp_path, "LP JSON file")->required();
    solve_cmd->add_option("--tol", tol, "solver tolerance");
    solve_cmd->add_option("--max-iters", max_iters, "iteration cap");

    auto* grad_cmd = app.add_subcommand("grad", "Loss gradients through an LP solution");
    grad_cmd->add_option("lp", lp_path, "LP JSON file")->required();
    grad_cmd->add_option("xobs", xobs_path, "observed decision JSON file")->required();
    grad_cmd->add_option("--loss", loss, "aoe|sde")->check(CLI::IsMember({"aoe", "sde"}));
    grad_cmd->add_option("--method", method, "direct|implicit|fd")
        ->check(CLI::IsMember({"direct", "implicit", "fd"}));
    grad_cmd->add_option("--step", step, "finite-difference step");

    auto* gen_cmd = app.add_subcommand("generate", "Write a model and train/test datasets");
    gen_cmd->add_option("--family", family, "figure1|figure5|synthetic|full_coefficient|nguyen");
    gen_cmd->add_option("--seed", seed, "generator seed");
    gen_cmd->add_option("--out", out_dir, "output directory");
    gen_cmd->add_option("--d", gen.D, "decision dimension");
    gen_cmd->add_option("--m1", gen.M1, "inequality rows");
    gen_cmd->add_option("--m2", gen.M2, "equality rows");
    gen_cmd->add_option("--k", gen.K, "weight dimension");
    gen_cmd->add_option("--dim-u", gen.dim_u, "feature dimension");
    gen_cmd->add_option("--n-train", n_train, "training samples");
    gen_cmd->add_option("--n-test", n_test, "testing samples");

    auto* learn_cmd = app.add_subcommand("learn", "Run one learning trial from a config");
    learn_cmd->add_option("config", config_path, "trial config JSON")->required();
    learn_cmd->add_option("--out", out_dir, "output directory");

    auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark suite");
    bench_cmd->add_option("suite", suite_path, "suite JSON")->required();
    bench_cmd->add_option("--out", out_dir, "output directory");

    auto* fig5_cmd = app.add_subcommand("figure5", "Generalization-study reproduction");
    fig5_cmd->add_option("--out", out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (solve_cmd->parsed()) return cmd_solve(lp_path, tol, max_iters);
        if (grad_cmd->parsed()) return cmd_grad(lp_path, xobs_path, loss, method, step);
        if (gen_cmd->parsed()) return cmd_generate(family, seed, out_dir, gen, n_train, n_test);
        if (learn_cmd->parsed()) return cmd_learn(config_path, out_dir);
        if (bench_cmd->parsed()) return cmd_bench(suite_path, out_dir);
        if (fig5_cmd->parsed()) return cmd_figure5(out_dir);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const invlp::Json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
