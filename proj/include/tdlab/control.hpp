#pragma once

// Average-reward SARSA(lambda) over joint state-action features phi(s) (x) e_a.
// The parameter update is the evaluation learner applied to phi(s, a).

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "tdlab/envs.hpp"
#include "tdlab/features.hpp"
#include "tdlab/random.hpp"
#include "tdlab/record.hpp"
#include "tdlab/td.hpp"

namespace tdlab {

/// 0.25 before step 5000, 0.125 before 10000, then 0.
double epsilon_at(long t);

/// Epsilon-greedy over the feasible actions; greedy ties go to the lowest index.
Eigen::Index select_action(const VectorXd& q_values, const std::vector<bool>& feasible, double epsilon, Rng& rng);

struct ControlLearnerState {
    LearnerState<double> learner;
    double epsilon = 0.25;

    static ControlLearnerState initial(double omega0, VectorXd theta0) {
        return {LearnerState<double>::initial(omega0, std::move(theta0)), epsilon_at(0)};
    }
};

/// One on-policy update toward phi(s', a'); epsilon follows the step count.
ControlLearnerState sarsa_step(ControlLearnerState state, const Transition<double>& tr, double beta, double c_alpha,
                               double lambda, Algorithm variant, const ProjectionConfig& projection = {});

enum class ControlEnv { Access, Pendulum };

ControlEnv parse_control_env(std::string_view name);
std::string_view to_string(ControlEnv env);

/// Environment plus its state feature map, as seen by the learner.
class ControlTask {
  public:
    virtual ~ControlTask() = default;

    virtual Eigen::Index n_actions() const = 0;
    virtual Eigen::Index state_feature_dim() const = 0;
    virtual void reset(Rng& rng) = 0;
    virtual VectorXd state_features() const = 0;
    virtual std::vector<bool> feasible_actions() const = 0;
    /// Applies the action, returns its reward and moves to the next state.
    virtual double step(Eigen::Index action, Rng& rng) = 0;

    VectorXd joint_features(Eigen::Index action) const {
        return joint_state_action_features(state_features(), action, n_actions());
    }
};

/// Access control: 20 Fourier features (gamma 1) of (k/n, (c-1)/(C-1)).
std::unique_ptr<ControlTask> make_access_task(const AccessControlParams& params, std::uint64_t feature_seed);

/// Pendulum: two maps of 150 Fourier features (gamma 0.5 and 1.0) of
/// the raw (cos, sin, velocity), concatenated.
std::unique_ptr<ControlTask> make_pendulum_task(const PendulumParams& params, std::uint64_t feature_seed);

std::unique_ptr<ControlTask> make_control_task(ControlEnv env, std::uint64_t feature_seed);

struct ControlSettings {
    ControlEnv env = ControlEnv::Access;
    Algorithm variant = Algorithm::Implicit;
    StepSchedule schedule{ScheduleKind::OffsetPoly, 400.0, 0.99, 150, 400, 1.0};
    ProjectionConfig projection{ProjectionMode::Separate, 5000.0, 1.0};
    double lambda = 0.25;
    long steps = 15000;
    std::optional<double> fixed_epsilon;  ///< overrides the schedule, e.g. 1 for a random policy
    std::size_t tail_window = 5000;
};

/// The metric after step t is the mean reward over the last min(t+1, tail_window)
/// steps, so the final entry is the tail metric. `rewards` and `omega_hat`
/// hold the per-step reward and average-reward estimate.
RunRecord run_control(ControlTask& task, const ControlSettings& settings, std::uint64_t seed);

/// Builds the task from the seed and runs it.
RunRecord run_control(const ControlSettings& settings, std::uint64_t seed);

} // namespace tdlab
