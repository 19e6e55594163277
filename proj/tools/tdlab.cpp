// tdlab command line: oracles, single evaluations and control runs, preset sweeps.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tdlab/harness.hpp"

namespace {

using namespace tdlab;

std::vector<double> to_std(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text))
        throw Error(Errc::Io, "cannot write " + path);
}

void print_summary(const SweepResult& result) {
    for (const auto& cell : result.cells)
        std::cerr << cell.algo << ' ' << axis_name(result.config.axis) << '=' << format_double(cell.axis_value)
                  << " mean=" << cell.mean << " ci95=" << cell.ci_half_width << " diverged=" << cell.diverged << '/'
                  << cell.runs.size() << '\n';
}

std::string csv_text(const SweepResult& result) {
    std::ostringstream os;
    write_csv(os, result);
    return os.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Average-reward TD(lambda): standard, implicit and projected implicit learners"};
    app.set_version_flag("--version", std::string(version_string()));
    app.require_subcommand(1);

    // oracle
    auto* oracle = app.add_subcommand("oracle", "Exact oracle quantities of an evaluation problem, as JSON");
    std::string o_env = "mrp", o_out, o_dump;
    long o_states = 100, o_features = 20;
    double o_lambda = 0.25;
    std::uint64_t o_seed = 1;
    oracle->add_option("--env", o_env, "mrp or boyan")->check(CLI::IsMember({"mrp", "boyan"}));
    oracle->add_option("--n-states", o_states, "MRP state count");
    oracle->add_option("--features", o_features, "MRP feature dimension");
    oracle->add_option("--lambda", o_lambda, "trace parameter");
    oracle->add_option("--seed", o_seed, "master seed (same instance as a sweep with this seed)");
    oracle->add_option("--out", o_out, "output file, default stdout");
    oracle->add_option("--dump-features", o_dump, "also write the feature matrix as CSV");

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluation runs at one step-size, one CSV row per iteration");
    std::string e_env = "mrp", e_schedule = "constant", e_out;
    std::vector<std::string> e_algos{"standard", "implicit"};
    double e_beta0 = 1.0, e_s = 0.99, e_lambda = 0.25, e_calpha = 1.0, e_rtheta = 1000.0;
    long e_hold = 0, e_runs = 10, e_steps = 2000, e_states = 100, e_features = 20;
    std::uint64_t e_seed = 1;
    eval->add_option("--env", e_env, "mrp or boyan")->check(CLI::IsMember({"mrp", "boyan"}));
    eval->add_option("--algo", e_algos, "standard, implicit, implicit-proj[:radius]; repeatable");
    eval->add_option("--schedule", e_schedule, "constant or poly")->check(CLI::IsMember({"constant", "poly"}));
    eval->add_option("--beta0", e_beta0, "initial step-size");
    eval->add_option("--s", e_s, "poly exponent");
    eval->add_option("--hold", e_hold, "iterations before decay starts");
    eval->add_option("--lambda", e_lambda, "trace parameter");
    eval->add_option("--c-alpha", e_calpha, "alpha/beta ratio");
    eval->add_option("--r-theta", e_rtheta, "projection radius for implicit-proj");
    eval->add_option("--runs", e_runs, "independent runs");
    eval->add_option("--steps", e_steps, "iterations per run");
    eval->add_option("--n-states", e_states, "MRP state count");
    eval->add_option("--features", e_features, "MRP feature dimension");
    eval->add_option("--seed", e_seed, "master seed");
    eval->add_option("--out", e_out, "CSV path, default stdout");

    // control
    auto* control = app.add_subcommand("control", "SARSA(lambda) runs on access control or the pendulum");
    std::string c_env = "access", c_variant = "implicit", c_out;
    double c_beta0 = 1.0, c_lambda = 0.25;
    long c_runs = 30, c_steps = 15000;
    std::uint64_t c_seed = 1;
    std::optional<double> c_epsilon;
    control->add_option("--env", c_env, "access or pendulum")->check(CLI::IsMember({"access", "pendulum"}));
    control->add_option("--variant", c_variant, "standard, implicit or implicit-proj[:radius]");
    control->add_option("--beta0", c_beta0, "effective initial step-size; beta_t = 400 beta0 / (t + 400)^0.99");
    control->add_option("--lambda", c_lambda, "trace parameter");
    control->add_option("--runs", c_runs, "independent runs");
    control->add_option("--steps", c_steps, "iterations per run");
    control->add_option("--seed", c_seed, "master seed");
    control->add_option("--epsilon", c_epsilon, "fixed exploration rate instead of the schedule");
    control->add_option("--out", c_out, "CSV path, default stdout");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Run a preset or config file and write CSV, plot script and metadata");
    std::string s_preset, s_config, s_out = ".";
    bool s_desk = false;
    std::optional<std::uint64_t> s_seed;
    std::optional<unsigned> s_workers;
    auto* preset_opt = sweep->add_option("--preset", s_preset, "preset name (see `presets --list`)");
    sweep->add_option("--config", s_config, "config file")->excludes(preset_opt)->check(CLI::ExistingFile);
    sweep->add_flag("--desk-scale", s_desk, "half the runs and every other grid point");
    sweep->add_option("--seed", s_seed, "master seed override");
    sweep->add_option("--workers", s_workers, "worker threads, overrides TDLAB_WORKERS");
    sweep->add_option("--out", s_out, "output directory");

    // presets
    auto* presets = app.add_subcommand("presets", "List named presets");
    bool p_list = false, p_show = false;
    std::string p_name;
    presets->add_flag("--list", p_list, "one line per preset");
    presets->add_option("--show", p_name, "print a preset's config text");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*oracle) {
            ExperimentConfig config;
            config.id = "oracle";
            config.env = parse_env_kind(o_env);
            config.n_states = o_states;
            config.features = o_features;
            config.lambda = o_lambda;
            config.seed = o_seed;
            config.validate();
            const EvaluationProblem problem = make_shared_problem(config);
            const auto& o = problem.oracle;
            nlohmann::ordered_json j;
            j["pi"] = to_std(o.pi);
            j["omega"] = o.omega;
            j["v"] = to_std(o.v);
            j["theta_star"] = to_std(o.theta_star);
            j["theta_e"] = to_std(o.theta_e);
            j["delta"] = o.delta;
            j["calpha_min"] = o.calpha_min;
            j["feature_scale"] = problem.features.scale;
            j["seed"] = o_seed;
            j["config-hash"] = config_hash(config);
            write_text(o_out, j.dump(2) + "\n");
            if (!o_dump.empty()) {
                std::ostringstream os;
                write_features_csv(os, problem.features);
                write_text(o_dump, os.str());
            }
        } else if (*eval) {
            ExperimentConfig config;
            config.id = "eval";
            config.env = parse_env_kind(e_env);
            config.shared_env = config.env == EnvKind::Mrp;
            config.n_states = e_states;
            config.features = e_features;
            config.algos = e_algos;
            config.lambda = e_lambda;
            config.c_alpha = e_calpha;
            config.schedule.kind = e_schedule == "constant" ? ScheduleKind::Constant : ScheduleKind::Poly;
            config.schedule.s = e_s;
            config.schedule.hold = e_hold;
            config.grid = {e_beta0};
            config.runs = e_runs;
            config.steps = e_steps;
            config.seed = e_seed;
            config.projection.r_theta = e_rtheta;
            config.plot = PlotKind::Trajectory;
            const SweepResult result = run_sweep(config);
            write_text(e_out, csv_text(result));
            print_summary(result);
        } else if (*control) {
            ExperimentConfig config = find_preset("fig4-control");
            config.id = "control";
            config.env = parse_env_kind(c_env);
            config.algos = {c_variant};
            config.grid = {c_beta0};
            config.lambda = c_lambda;
            config.runs = c_runs;
            config.steps = c_steps;
            config.seed = c_seed;
            config.epsilon = c_epsilon;
            config.record_every = 1;
            config.plot = PlotKind::Trajectory;
            const SweepResult result = run_sweep(config);
            write_text(c_out, csv_text(result));
            print_summary(result);
        } else if (*sweep) {
            if (s_preset.empty() && s_config.empty())
                throw Error(Errc::InvalidConfig, "sweep needs --preset or --config");
            ExperimentConfig config = s_preset.empty() ? load_config(s_config) : find_preset(s_preset);
            if (s_desk)
                config = desk_scale(std::move(config));
            if (s_seed)
                config.seed = *s_seed;
            const SweepResult result = s_workers ? run_sweep(config, *s_workers) : run_sweep(config);
            emit_all(result, s_out, config.id, s_desk);
            print_summary(result);
        } else if (*presets) {
            p_show = !p_name.empty();
            if (p_show) {
                std::cout << format_config(find_preset(p_name));
            } else {
                for (const auto& p : figure_presets())
                    std::cout << p.id << "  env=" << to_string(p.env) << " axis=" << axis_name(p.axis)
                              << " points=" << p.grid.size() << " runs=" << p.runs << " steps=" << p.steps << '\n';
            }
        }
    } catch (const Error& e) {
        std::cerr << "tdlab: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
