#include "tdlab/evaluation.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace tdlab {

EvaluationProblem make_mrp_problem(Eigen::Index n_states, Eigen::Index d, double lambda, std::uint64_t seed,
                                   const OracleTolerances& tol) {
    return make_problem(generate_mrp(n_states, derive_seed(seed, "chain")), lambda,
                        [&](const VectorXd& v) {
                            return build_random_features(n_states, d, v, derive_seed(seed, "features"));
                        },
                        tol);
}

EvaluationProblem make_boyan_problem(double lambda, std::uint64_t seed, const OracleTolerances& tol) {
    return make_problem(sample_boyan_policy(derive_seed(seed, "policy")), lambda,
                        [](const VectorXd& v) { return build_boyan_features(v); }, tol);
}

RunRecord run_evaluation(const EvaluationProblem& problem, const EvaluationSettings& settings,
                         LearnerState<double> state, Eigen::Index start_state, Rng& rng) {
    const auto n = problem.chain.n_states();
    std::vector<VectorXd> phi(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        phi[static_cast<std::size_t>(i)] = problem.features.matrix.row(i).transpose();

    RunRecord record;
    record.metric.reserve(static_cast<std::size_t>(settings.steps + 1));
    record.metric.push_back(evaluation_loss(state, problem.oracle));

    const double c_alpha = settings.schedule.c_alpha;
    Eigen::Index s = start_state;
    for (long t = 0; t < settings.steps; ++t) {
        const ChainStep step = sample_transition(problem.chain, s, rng);
        const Transition<double> tr{phi[static_cast<std::size_t>(s)], step.reward,
                                    phi[static_cast<std::size_t>(step.next_state)]};
        const double beta = beta_at(settings.schedule, t);
        double loss = 0.0;
        if (!record.diverged) {
            try {
                state = td_step(settings.algo, std::move(state), tr, beta, c_alpha, settings.lambda,
                                settings.projection);
                record.max_trace_norm = std::max(record.max_trace_norm, state.trace.norm());
                loss = evaluation_loss(state, problem.oracle);
                if (!std::isfinite(loss))
                    throw Error(Errc::NonFiniteUpdate, "loss overflowed");
            } catch (const Error& e) {
                if (e.code() != Errc::NonFiniteUpdate)
                    throw;
                record.diverged = true;
                record.truncation_index = t;
            }
        }
        record.metric.push_back(record.diverged ? record.metric.back() : loss);
        if (record.diverged)
            break;
        s = step.next_state;
    }
    record.metric.resize(static_cast<std::size_t>(settings.steps + 1), record.metric.back());
    return record;
}

RunRecord run_evaluation(const EvaluationProblem& problem, const EvaluationSettings& settings, std::uint64_t seed) {
    Rng init_rng = make_rng(derive_seed(seed, "init"));
    std::uniform_real_distribution<double> weight(-1.0, 1.0);
    const auto d = problem.features.dim();
    VectorXd theta0(d);
    for (Eigen::Index i = 0; i < d; ++i)
        theta0(i) = weight(init_rng);
    std::uniform_int_distribution<Eigen::Index> start(0, problem.chain.n_states() - 1);
    const Eigen::Index s0 = start(init_rng);

    Rng env_rng = make_rng(derive_seed(seed, "transitions"));
    RunRecord record = run_evaluation(problem, settings, LearnerState<double>::initial(0.0, std::move(theta0)), s0,
                                      env_rng);
    record.seed = seed;
    return record;
}

} // namespace tdlab
