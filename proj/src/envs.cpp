#include "tdlab/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "tdlab/error.hpp"

namespace tdlab {

ChainModel<double> generate_mrp(Eigen::Index n_states, std::uint64_t seed) {
    if (n_states < 2)
        throw Error(Errc::InvalidConfig, "MRP needs at least two states");
    Rng rng = make_rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    ChainModel<double> chain{MatrixXd(n_states, n_states), VectorXd(n_states)};
    std::vector<double> cuts(static_cast<std::size_t>(n_states - 1));
    for (Eigen::Index i = 0; i < n_states; ++i) {
        for (auto& c : cuts)
            c = unif(rng);
        std::sort(cuts.begin(), cuts.end());
        double prev = 0.0;
        double total = 0.0;
        for (Eigen::Index j = 0; j + 1 < n_states; ++j) {
            chain.transition(i, j) = cuts[static_cast<std::size_t>(j)] - prev;
            prev = cuts[static_cast<std::size_t>(j)];
            total += chain.transition(i, j);
        }
        chain.transition(i, n_states - 1) = std::max(0.0, 1.0 - total);
    }
    for (Eigen::Index i = 0; i < n_states; ++i)
        chain.reward(i) = unif(rng);
    return chain;
}

BoyanPolicy sample_boyan_actions(std::uint64_t seed) {
    Rng rng = make_rng(seed);
    std::bernoulli_distribution coin(0.5);
    BoyanPolicy policy{};
    for (auto& a : policy)
        a = coin(rng) ? 1 : 0;
    return policy;
}

ChainModel<double> boyan_chain(const BoyanPolicy& policy) {
    constexpr int n = kBoyanStates;
    ChainModel<double> chain{MatrixXd::Zero(n, n), VectorXd(n)};
    chain.transition.row(0).setConstant(1.0 / n);
    chain.transition(1, 0) = 1.0;
    for (int i = 2; i < n; ++i)
        chain.transition(i, policy[static_cast<std::size_t>(i)] == 0 ? i - 2 : i - 1) = 1.0;
    for (int i = 0; i < n; ++i)
        chain.reward(i) = policy[static_cast<std::size_t>(i)] == 0 ? 0.5 : 1.0;
    return chain;
}

ChainModel<double> sample_boyan_policy(std::uint64_t seed) { return boyan_chain(sample_boyan_actions(seed)); }

ChainStep sample_transition(const ChainModel<double>& chain, Eigen::Index state, Rng& rng) {
    const auto n = chain.n_states();
    if (state < 0 || state >= n)
        throw Error(Errc::IndexOutOfRange, "state index out of range");
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = unif(rng);
    double acc = 0.0;
    Eigen::Index last_positive = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double p = chain.transition(state, j);
        if (p <= 0.0)
            continue;
        acc += p;
        last_positive = j;
        if (u < acc)
            return {j, chain.reward(state)};
    }
    return {last_positive, chain.reward(state)};
}

int sample_binomial(int trials, double p, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = unif(rng);
    double pmf = std::pow(1.0 - p, trials);
    double cdf = pmf;
    int k = 0;
    while (u >= cdf && k < trials) {
        pmf *= (static_cast<double>(trials - k) / static_cast<double>(k + 1)) * (p / (1.0 - p));
        ++k;
        cdf += pmf;
    }
    return k;
}

AccessStep access_control_step(const AccessControlParams& params, const AccessControlState& state, AccessAction action,
                               Rng& rng) {
    const bool accept = action == AccessAction::Accept;
    if (accept && state.free_servers <= 0)
        throw Error(Errc::IllegalAction, "cannot accept with no free servers");
    const double reward = accept ? std::ldexp(1.0, state.customer_class - params.classes) : 0.0;
    const int after = state.free_servers - (accept ? 1 : 0);
    const int busy = params.servers - after;
    const int completed = sample_binomial(busy, params.completion_prob, rng);
    std::uniform_int_distribution<int> next_class(1, params.classes);
    AccessControlState next;
    next.free_servers = std::min(params.servers, after + completed);
    next.customer_class = next_class(rng);
    return {next, reward};
}

double wrap_angle(double angle) {
    constexpr double pi = std::numbers::pi;
    double wrapped = std::fmod(angle + pi, 2.0 * pi);
    if (wrapped < 0.0)
        wrapped += 2.0 * pi;
    wrapped -= pi;
    return wrapped == -pi ? pi : wrapped;
}

PendulumStep pendulum_step(const PendulumState& state, double torque, const PendulumParams& params) {
    const double eta = wrap_angle(state.angle);
    const double eta_dot = state.angular_velocity;
    const double penalty = eta * eta + 0.1 * eta_dot * eta_dot + 0.001 * torque * torque;
    const double reward = -penalty / params.reward_scale;

    const double accel = 3.0 * params.gravity / (2.0 * params.length) * std::sin(eta) +
                         3.0 / (params.mass * params.length * params.length) * torque;
    PendulumState next;
    next.angular_velocity = std::clamp(eta_dot + accel * params.dt, -params.max_speed, params.max_speed);
    next.angle = wrap_angle(eta + next.angular_velocity * params.dt);
    return {next, reward};
}

} // namespace tdlab
