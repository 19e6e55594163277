#pragma once

#include <cstdint>
#include <optional>

#include "tdlab/envs.hpp"
#include "tdlab/features.hpp"
#include "tdlab/markov.hpp"
#include "tdlab/record.hpp"
#include "tdlab/td.hpp"

namespace tdlab {

/// A chain under a fixed policy, its features and the exact oracle.
struct EvaluationProblem {
    ChainModel<double> chain;
    FeatureMatrix features;
    OracleSolution<double> oracle;
};

/// Random MRP with [Bernoulli | e | v] features of dimension d.
EvaluationProblem make_mrp_problem(Eigen::Index n_states, Eigen::Index d, double lambda, std::uint64_t seed,
                                   const OracleTolerances& tol = {});

/// Boyan chain under a sampled deterministic policy with interpolation features.
EvaluationProblem make_boyan_problem(double lambda, std::uint64_t seed, const OracleTolerances& tol = {});

/// Features for a given chain: computes v, builds the features from it, then
/// the full oracle.
template <typename FeatureBuilder>
EvaluationProblem make_problem(ChainModel<double> chain, double lambda, FeatureBuilder&& build,
                               const OracleTolerances& tol = {}) {
    const VectorXd pi = stationary_distribution(chain, tol);
    const VectorXd v = differential_value(chain, pi, average_reward(pi, chain.reward), tol);
    FeatureMatrix features = build(v);
    OracleSolution<double> oracle = compute_oracle<double>(chain, features.matrix, lambda, tol);
    return {std::move(chain), std::move(features), std::move(oracle)};
}

struct EvaluationSettings {
    Algorithm algo = Algorithm::Standard;
    StepSchedule schedule;
    ProjectionConfig projection;
    double lambda = 0.25;
    long steps = 2000;
};

/// Runs one evaluation from an explicit initial learner state and start
/// state. The metric trajectory has steps + 1 entries, the first being the
/// loss before any update; each later entry is recorded after the full
/// update including projection.
RunRecord run_evaluation(const EvaluationProblem& problem, const EvaluationSettings& settings,
                         LearnerState<double> initial, Eigen::Index start_state, Rng& rng);

/// Seeded run: omega_0 = 0, theta_0 ~ Unif[-1,1]^d, start state uniform.
RunRecord run_evaluation(const EvaluationProblem& problem, const EvaluationSettings& settings, std::uint64_t seed);

} // namespace tdlab
