#include "tdlab/control.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace tdlab {

double epsilon_at(long t) {
    if (t < 5000)
        return 0.25;
    if (t < 10000)
        return 0.125;
    return 0.0;
}

Eigen::Index select_action(const VectorXd& q_values, const std::vector<bool>& feasible, double epsilon, Rng& rng) {
    if (static_cast<Eigen::Index>(feasible.size()) != q_values.size())
        throw Error(Errc::DimensionMismatch, "feasibility mask and q-values differ in length");
    std::vector<Eigen::Index> allowed;
    for (Eigen::Index a = 0; a < q_values.size(); ++a)
        if (feasible[static_cast<std::size_t>(a)])
            allowed.push_back(a);
    if (allowed.empty())
        throw Error(Errc::NoFeasibleAction, "no feasible action");

    std::uniform_real_distribution<double> unif(0.0, 1.0);
    if (epsilon > 0.0 && unif(rng) < epsilon) {
        std::uniform_int_distribution<std::size_t> pick(0, allowed.size() - 1);
        return allowed[pick(rng)];
    }
    Eigen::Index best = allowed.front();
    for (Eigen::Index a : allowed)
        if (q_values(a) > q_values(best))
            best = a;
    return best;
}

ControlLearnerState sarsa_step(ControlLearnerState state, const Transition<double>& tr, double beta, double c_alpha,
                               double lambda, Algorithm variant, const ProjectionConfig& projection) {
    state.learner = td_step(variant, std::move(state.learner), tr, beta, c_alpha, lambda, projection);
    state.epsilon = epsilon_at(state.learner.step);
    return state;
}

ControlEnv parse_control_env(std::string_view name) {
    if (name == "access")
        return ControlEnv::Access;
    if (name == "pendulum")
        return ControlEnv::Pendulum;
    throw Error(Errc::InvalidConfig, "unknown control env '" + std::string(name) + "'");
}

std::string_view to_string(ControlEnv env) { return env == ControlEnv::Access ? "access" : "pendulum"; }

namespace {

VectorXd concat_maps(const std::vector<FourierFeatureMap>& maps, const VectorXd& x) {
    Eigen::Index total = 0;
    for (const auto& m : maps)
        total += m.n_features();
    VectorXd out(total);
    Eigen::Index at = 0;
    for (const auto& m : maps) {
        out.segment(at, m.n_features()) = m(x);
        at += m.n_features();
    }
    return out;
}

class AccessTask final : public ControlTask {
  public:
    AccessTask(AccessControlParams params, std::uint64_t seed) : params_(params) {
        if (params.servers < 1 || params.classes < 2 || !(params.completion_prob > 0.0 && params.completion_prob < 1.0))
            throw Error(Errc::InvalidConfig, "access control needs servers >= 1, classes >= 2, 0 < p < 1");
        maps_.push_back(build_fourier_map(2, 20, 1.0, derive_seed(seed, "rff", 0)));
    }

    Eigen::Index n_actions() const override { return 2; }
    Eigen::Index state_feature_dim() const override { return 20; }

    void reset(Rng& rng) override {
        std::uniform_int_distribution<int> cls(1, params_.classes);
        state_ = {params_.servers, cls(rng)};
    }

    VectorXd state_features() const override {
        VectorXd x(2);
        x << static_cast<double>(state_.free_servers) / params_.servers,
            static_cast<double>(state_.customer_class - 1) / (params_.classes - 1);
        return concat_maps(maps_, x);
    }

    std::vector<bool> feasible_actions() const override { return {state_.free_servers > 0, true}; }

    double step(Eigen::Index action, Rng& rng) override {
        const AccessStep s = access_control_step(params_, state_, static_cast<AccessAction>(action), rng);
        state_ = s.next;
        return s.reward;
    }

  private:
    AccessControlParams params_;
    std::vector<FourierFeatureMap> maps_;
    AccessControlState state_;
};

class PendulumTask final : public ControlTask {
  public:
    // Observations go to the maps unscaled. On [0,1]-rescaled inputs these
    // bandwidths are too wide to separate upright from hanging.
    PendulumTask(PendulumParams params, std::uint64_t seed) : params_(params) {
        maps_.push_back(build_fourier_map(3, 150, 0.5, derive_seed(seed, "rff", 0)));
        maps_.push_back(build_fourier_map(3, 150, 1.0, derive_seed(seed, "rff", 1)));
    }

    Eigen::Index n_actions() const override { return static_cast<Eigen::Index>(kPendulumTorques.size()); }
    Eigen::Index state_feature_dim() const override { return 300; }

    void reset(Rng& rng) override {
        // upper end of the draw maps to pi after wrapping
        std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
        state_ = {wrap_angle(angle(rng)), 0.0};
    }

    VectorXd state_features() const override {
        VectorXd x(3);
        x << std::cos(state_.angle), std::sin(state_.angle), state_.angular_velocity;
        return concat_maps(maps_, x);
    }

    std::vector<bool> feasible_actions() const override { return std::vector<bool>(kPendulumTorques.size(), true); }

    double step(Eigen::Index action, Rng&) override {
        const PendulumStep s = pendulum_step(state_, kPendulumTorques.at(static_cast<std::size_t>(action)), params_);
        state_ = s.next;
        return s.reward;
    }

  private:
    PendulumParams params_;
    std::vector<FourierFeatureMap> maps_;
    PendulumState state_;
};

VectorXd q_values(const ControlTask& task, const VectorXd& phi_s, const VectorXd& theta) {
    const auto d = task.state_feature_dim();
    VectorXd q(task.n_actions());
    for (Eigen::Index a = 0; a < q.size(); ++a)
        q(a) = theta.segment(a * d, d).dot(phi_s);
    return q;
}

} // namespace

std::unique_ptr<ControlTask> make_access_task(const AccessControlParams& params, std::uint64_t feature_seed) {
    return std::make_unique<AccessTask>(params, feature_seed);
}

std::unique_ptr<ControlTask> make_pendulum_task(const PendulumParams& params, std::uint64_t feature_seed) {
    return std::make_unique<PendulumTask>(params, feature_seed);
}

std::unique_ptr<ControlTask> make_control_task(ControlEnv env, std::uint64_t feature_seed) {
    if (env == ControlEnv::Access)
        return make_access_task({}, feature_seed);
    return make_pendulum_task({}, feature_seed);
}

RunRecord run_control(ControlTask& task, const ControlSettings& settings, std::uint64_t seed) {
    if (settings.steps < 0 || settings.tail_window < 1)
        throw Error(Errc::InvalidConfig, "control run needs steps >= 0 and tail_window >= 1");
    settings.projection.validate();

    Rng init_rng = make_rng(derive_seed(seed, "init"));
    Rng env_rng = make_rng(derive_seed(seed, "transitions"));
    Rng policy_rng = make_rng(derive_seed(seed, "policy"));

    const Eigen::Index dim = task.state_feature_dim() * task.n_actions();
    std::uniform_real_distribution<double> weight(-0.5, 0.5);
    VectorXd theta0(dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        theta0(i) = weight(init_rng);
    ControlLearnerState state = ControlLearnerState::initial(0.0, std::move(theta0));
    task.reset(init_rng);

    auto epsilon = [&](long t) { return settings.fixed_epsilon ? *settings.fixed_epsilon : epsilon_at(t); };

    RunRecord record;
    record.seed = seed;
    const auto horizon = static_cast<std::size_t>(settings.steps);
    record.metric.reserve(horizon);
    record.rewards.reserve(horizon);
    record.omega_hat.reserve(horizon);

    VectorXd phi_s = task.state_features();
    Eigen::Index action =
        select_action(q_values(task, phi_s, state.learner.theta_hat), task.feasible_actions(), epsilon(0), policy_rng);
    double window_sum = 0.0;
    for (long t = 0; t < settings.steps; ++t) {
        const VectorXd phi = joint_state_action_features(phi_s, action, task.n_actions());
        const double reward = task.step(action, env_rng);
        const VectorXd phi_s_next = task.state_features();
        const Eigen::Index next_action = select_action(q_values(task, phi_s_next, state.learner.theta_hat),
                                                       task.feasible_actions(), epsilon(t + 1), policy_rng);
        const VectorXd phi_next = joint_state_action_features(phi_s_next, next_action, task.n_actions());
        try {
            state = sarsa_step(std::move(state), Transition<double>{phi, reward, phi_next},
                               beta_at(settings.schedule, t), settings.schedule.c_alpha, settings.lambda,
                               settings.variant, settings.projection);
        } catch (const Error& e) {
            if (e.code() != Errc::NonFiniteUpdate)
                throw;
            record.diverged = true;
            record.truncation_index = t;
            break;
        }
        record.max_trace_norm = std::max(record.max_trace_norm, state.learner.trace.norm());

        record.rewards.push_back(reward);
        record.omega_hat.push_back(state.learner.omega_hat);
        window_sum += reward;
        if (record.rewards.size() > settings.tail_window)
            window_sum -= record.rewards[record.rewards.size() - 1 - settings.tail_window];
        const auto window = std::min(record.rewards.size(), settings.tail_window);
        record.metric.push_back(window_sum / static_cast<double>(window));

        phi_s = phi_s_next;
        action = next_action;
    }
    if (!record.metric.empty() || record.diverged)
        record.metric.resize(horizon, record.metric.empty() ? 0.0 : record.metric.back());
    return record;
}

RunRecord run_control(const ControlSettings& settings, std::uint64_t seed) {
    auto task = make_control_task(settings.env, derive_seed(seed, "features"));
    return run_control(*task, settings, seed);
}

} // namespace tdlab
