#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Dense>

#include "tdlab/markov.hpp"
#include "tdlab/random.hpp"

namespace tdlab {

/// Rows are uniform spacings of n-1 sorted Unif[0,1] draws; rewards Unif[0,1].
ChainModel<double> generate_mrp(Eigen::Index n_states, std::uint64_t seed);

inline constexpr int kBoyanStates = 13;

/// Action per state: 0 moves two states down (reward 0.5), 1 moves one state
/// down (reward 1). State 1 always goes to 0; state 0 restarts uniformly.
using BoyanPolicy = std::array<int, kBoyanStates>;

BoyanPolicy sample_boyan_actions(std::uint64_t seed);
ChainModel<double> boyan_chain(const BoyanPolicy& policy);
ChainModel<double> sample_boyan_policy(std::uint64_t seed);

struct ChainStep {
    Eigen::Index next_state;
    double reward;  ///< reward of the current state
};

ChainStep sample_transition(const ChainModel<double>& chain, Eigen::Index state, Rng& rng);

// Access-control queuing ---------------------------------------------------

struct AccessControlParams {
    int servers = 10;
    int classes = 4;
    double completion_prob = 0.06;
};

struct AccessControlState {
    int free_servers = 0;
    int customer_class = 1;  ///< 1..C
};

enum class AccessAction { Accept = 0, Reject = 1 };

struct AccessStep {
    AccessControlState next;
    double reward;
};

/// Y ~ Binomial(trials, p) by inverse transform.
int sample_binomial(int trials, double p, Rng& rng);

AccessStep access_control_step(const AccessControlParams& params, const AccessControlState& state, AccessAction action,
                               Rng& rng);

// Pendulum ----------------------------------------------------------------

struct PendulumParams {
    double gravity = 10.0;
    double mass = 1.0;
    double length = 1.0;
    double dt = 0.05;
    double max_speed = 8.0;
    double reward_scale = 16.27;
};

struct PendulumState {
    double angle = 0.0;  ///< from upright, wrapped to (-pi, pi]
    double angular_velocity = 0.0;
};

inline constexpr std::array<double, 5> kPendulumTorques{-2.0, -1.0, 0.0, 1.0, 2.0};

struct PendulumStep {
    PendulumState next;
    double reward;
};

double wrap_angle(double angle);

/// Reward -(eta^2 + 0.1 eta_dot^2 + 0.001 a^2) / 16.27 from the pre-step state;
/// semi-implicit Euler with velocity clipping.
PendulumStep pendulum_step(const PendulumState& state, double torque, const PendulumParams& params = {});

} // namespace tdlab
