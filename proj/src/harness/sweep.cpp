#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "tdlab/harness.hpp"

namespace tdlab {

std::uint64_t run_seed(const ExperimentConfig& config, double axis_value, long run) {
    return derive_seed(config.seed, std::string_view(config.id), axis_value, run);
}

unsigned default_workers() {
    if (const char* env = std::getenv("TDLAB_WORKERS"); env && *env) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (*end != '\0' || n < 1)
            throw Error(Errc::InvalidConfig, "TDLAB_WORKERS must be a positive integer, got '" + std::string(env) + "'");
        return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void summarize(CellSummary& cell, const std::vector<double>& values) {
    const auto n = static_cast<double>(values.size());
    cell.mean = cell.sd = cell.ci_half_width = 0.0;
    if (values.empty())
        return;
    double sum = 0.0;
    for (double v : values)
        sum += v;
    cell.mean = sum / n;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values)
            ss += (v - cell.mean) * (v - cell.mean);
        cell.sd = std::sqrt(ss / (n - 1.0));
        cell.ci_half_width = 1.96 * cell.sd / std::sqrt(n);
    }
}

namespace {

EvaluationProblem make_evaluation_problem(const ExperimentConfig& c, std::uint64_t seed) {
    if (c.env == EnvKind::Mrp)
        return make_mrp_problem(c.n_states, c.features, c.lambda, seed);
    return make_boyan_problem(c.lambda, seed);
}

} // namespace

EvaluationProblem make_shared_problem(const ExperimentConfig& c) {
    if (is_control(c.env))
        throw Error(Errc::InvalidConfig, "control envs have no exact oracle");
    return make_evaluation_problem(c, derive_seed(c.seed, "env", to_string(c.env), c.n_states, c.features));
}

namespace {

struct Job {
    std::size_t cell;
    long run;
};

RunSummary summarize_run(const ExperimentConfig& c, const RunRecord& record, long run, long first_t) {
    RunSummary out;
    out.run = run;
    out.seed = record.seed;
    out.value = record.reduce(c.reduction, static_cast<std::size_t>(c.tail));
    out.diverged = record.diverged;
    out.truncation_index = record.truncation_index;
    out.max_trace_norm = record.max_trace_norm;
    const long last = first_t + static_cast<long>(record.metric.size()) - 1;
    for (std::size_t i = 0; i < record.metric.size(); ++i) {
        const long t = first_t + static_cast<long>(i);
        if (t % c.record_every == 0 || t == last) {
            out.t.push_back(t);
            out.metric.push_back(record.metric[i]);
        }
    }
    return out;
}

} // namespace

SweepResult run_sweep(const ExperimentConfig& config, unsigned workers) {
    config.validate();
    const std::vector<AlgoSpec> algos = config.algo_specs();

    SweepResult result;
    result.config = config;
    for (const auto& a : algos)
        for (double g : config.grid) {
            CellSummary cell;
            cell.algo = a.label;
            cell.axis_value = g;
            cell.runs.resize(static_cast<std::size_t>(config.runs));
            result.cells.push_back(std::move(cell));
        }

    std::optional<EvaluationProblem> shared;
    if (!is_control(config.env) && config.shared_env)
        shared = make_shared_problem(config);

    std::vector<Job> jobs;
    for (std::size_t cell = 0; cell < result.cells.size(); ++cell)
        for (long r = 0; r < config.runs; ++r)
            jobs.push_back({cell, r});

    auto run_job = [&](const Job& job) {
        CellSummary& cell = result.cells[job.cell];
        const AlgoSpec& algo = algos[job.cell / config.grid.size()];
        const double value = cell.axis_value;
        const std::uint64_t seed = run_seed(config, value, job.run);

        StepSchedule schedule = config.schedule;
        schedule.c_alpha = config.axis == SweepAxis::CAlpha ? value : config.c_alpha;
        if (config.axis == SweepAxis::Beta0)
            schedule.beta0 = value * config.beta0_scale;

        if (is_control(config.env)) {
            ControlSettings settings;
            settings.env = config.env == EnvKind::Access ? ControlEnv::Access : ControlEnv::Pendulum;
            settings.variant = algo.algo;
            settings.schedule = schedule;
            settings.projection = algo.projection;
            settings.lambda = config.lambda;
            settings.steps = config.steps;
            settings.fixed_epsilon = config.epsilon;
            const RunRecord record = run_control(settings, seed);
            cell.runs[static_cast<std::size_t>(job.run)] = summarize_run(config, record, job.run, 1);
            return;
        }
        EvaluationSettings settings;
        settings.algo = algo.algo;
        settings.schedule = schedule;
        settings.projection = algo.projection;
        settings.lambda = config.lambda;
        settings.steps = config.steps;
        const RunRecord record = shared ? run_evaluation(*shared, settings, seed)
                                        : run_evaluation(make_evaluation_problem(config, derive_seed(seed, "env")),
                                                         settings, seed);
        cell.runs[static_cast<std::size_t>(job.run)] = summarize_run(config, record, job.run, 0);
    };

    // Each job writes only its own slot; the first failure by job index wins.
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::size_t error_index = jobs.size();
    std::exception_ptr error;
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            try {
                run_job(jobs[i]);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (i < error_index) {
                    error_index = i;
                    error = std::current_exception();
                }
            }
        }
    };
    const unsigned n_threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(jobs.size())));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < n_threads; ++i)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    if (error)
        std::rethrow_exception(error);

    for (auto& cell : result.cells) {
        std::vector<double> values;
        cell.diverged = 0;
        for (const auto& r : cell.runs) {
            values.push_back(r.value);
            cell.diverged += r.diverged ? 1 : 0;
        }
        summarize(cell, values);
    }
    return result;
}

} // namespace tdlab
