#pragma once

// Average-reward TD(lambda) learners with linear features: the standard
// recursion, the implicit (closed-form fixed point) recursion, the
// projection step, step-size schedules and the stacked matrix form
// Theta <- Theta + beta_t {A(X_t) Theta + b(X_t)} used to cross-check them.

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "tdlab/error.hpp"
#include "tdlab/markov.hpp"

namespace tdlab {

enum class ScheduleKind { Constant, Poly, OffsetPoly };

/// beta_t family. Decay starts after `hold` iterations with its own clock,
/// so beta is continuous at the end of the hold window.
struct StepSchedule {
    ScheduleKind kind = ScheduleKind::Constant;
    double beta0 = 1.0;
    double s = 1.0;
    long hold = 0;
    long offset = 1;
    double c_alpha = 1.0;  ///< alpha_t / beta_t
};

inline double beta_at(const StepSchedule& schedule, long t) {
    const double clock = static_cast<double>(std::max(0L, t - schedule.hold));
    switch (schedule.kind) {
    case ScheduleKind::Constant:
        return schedule.beta0;
    case ScheduleKind::Poly:
        return schedule.beta0 / std::pow(clock + 1.0, schedule.s);
    case ScheduleKind::OffsetPoly:
        return schedule.beta0 / std::pow(clock + static_cast<double>(schedule.offset), schedule.s);
    }
    return schedule.beta0;
}

enum class Algorithm { Standard, Implicit, ImplicitProjected };

inline std::string_view to_string(Algorithm a) {
    switch (a) {
    case Algorithm::Standard: return "standard";
    case Algorithm::Implicit: return "implicit";
    case Algorithm::ImplicitProjected: return "implicit-proj";
    }
    return "?";
}

inline Algorithm parse_algorithm(std::string_view name) {
    if (name == "standard")
        return Algorithm::Standard;
    if (name == "implicit")
        return Algorithm::Implicit;
    if (name == "implicit-proj" || name == "implicit_projected" || name == "implicit-projected")
        return Algorithm::ImplicitProjected;
    throw Error(Errc::InvalidConfig, "unknown algorithm '" + std::string(name) + "'");
}

template <typename Scalar = double>
struct LearnerState {
    Scalar omega_hat{};
    Vec<Scalar> theta_hat;
    Vec<Scalar> trace;  ///< z_{t-1} before a step, z_t after it
    long step = 0;

    static LearnerState initial(Scalar omega0, Vec<Scalar> theta0) {
        LearnerState s;
        s.omega_hat = omega0;
        s.trace = Vec<Scalar>::Zero(theta0.size());
        s.theta_hat = std::move(theta0);
        return s;
    }
};

/// One observed transition (phi(S_t), R_t, phi(S_{t+1})).
template <typename Scalar = double>
struct Transition {
    const Vec<Scalar>& phi;
    Scalar reward;
    const Vec<Scalar>& phi_next;
};

/// R - omega_hat + theta_hat . (phi' - phi), with the pre-update omega_hat.
template <typename Scalar>
Scalar td_error(const LearnerState<Scalar>& state, const Transition<Scalar>& tr) {
    return tr.reward - state.omega_hat + state.theta_hat.dot(tr.phi_next - tr.phi);
}

namespace detail {

template <typename Scalar>
void check_dims(const LearnerState<Scalar>& state, const Transition<Scalar>& tr) {
    const auto d = state.theta_hat.size();
    if (tr.phi.size() != d || tr.phi_next.size() != d || state.trace.size() != d)
        throw Error(Errc::DimensionMismatch, "feature, trace and weight lengths differ");
}

template <typename Scalar>
void check_finite(const LearnerState<Scalar>& state) {
    if (!std::isfinite(static_cast<double>(state.omega_hat)) || !state.theta_hat.allFinite())
        throw Error(Errc::NonFiniteUpdate, "iterate became non-finite at step " + std::to_string(state.step));
}

} // namespace detail

/// z <- lambda z + phi; omega <- omega + c_alpha beta (R - omega);
/// theta <- theta + beta delta z.
template <typename Scalar>
LearnerState<Scalar> td_step_standard(LearnerState<Scalar> state, const Transition<Scalar>& tr, Scalar beta,
                                      Scalar c_alpha, Scalar lambda) {
    detail::check_dims(state, tr);
    state.trace = lambda * state.trace + tr.phi;
    const Scalar delta = td_error(state, tr);
    state.omega_hat += c_alpha * beta * (tr.reward - state.omega_hat);
    state.theta_hat += (beta * delta) * state.trace;
    ++state.step;
    detail::check_finite(state);
    return state;
}

/// Closed-form solution of the implicit recursions: the same directions as
/// the standard step with effective steps c_alpha beta / (1 + c_alpha beta)
/// and beta / (1 + beta |z|^2).
template <typename Scalar>
LearnerState<Scalar> td_step_implicit(LearnerState<Scalar> state, const Transition<Scalar>& tr, Scalar beta,
                                      Scalar c_alpha, Scalar lambda) {
    detail::check_dims(state, tr);
    state.trace = lambda * state.trace + tr.phi;
    const Scalar delta = td_error(state, tr);
    const Scalar omega_step = c_alpha * beta / (Scalar(1) + c_alpha * beta);
    const Scalar theta_step = beta / (Scalar(1) + beta * state.trace.squaredNorm());
    state.omega_hat += omega_step * (tr.reward - state.omega_hat);
    state.theta_hat += (theta_step * delta) * state.trace;
    ++state.step;
    detail::check_finite(state);
    return state;
}

enum class ProjectionMode { None, Joint, Separate };

/// Joint: ball of radius r_theta on (omega, theta). Separate: omega to
/// [-r_omega, r_omega] and theta to the r_theta ball independently.
struct ProjectionConfig {
    ProjectionMode mode = ProjectionMode::None;
    double r_theta = 1000.0;
    double r_omega = 1.0;

    void validate() const {
        if (mode != ProjectionMode::None && !(r_theta > 0.0 && r_omega > 0.0))
            throw Error(Errc::InvalidConfig, "projection radii must be positive");
    }
};

template <typename Scalar>
LearnerState<Scalar> apply_projection(LearnerState<Scalar> state, const ProjectionConfig& config) {
    switch (config.mode) {
    case ProjectionMode::None:
        break;
    case ProjectionMode::Joint: {
        const Scalar radius = Scalar(config.r_theta);
        const Scalar norm = std::sqrt(state.omega_hat * state.omega_hat + state.theta_hat.squaredNorm());
        if (norm > radius) {
            const Scalar k = radius / norm;
            state.omega_hat *= k;
            state.theta_hat *= k;
        }
        break;
    }
    case ProjectionMode::Separate: {
        const Scalar r_omega = Scalar(config.r_omega);
        state.omega_hat = std::clamp(state.omega_hat, -r_omega, r_omega);
        const Scalar norm = state.theta_hat.norm();
        if (norm > Scalar(config.r_theta))
            state.theta_hat *= Scalar(config.r_theta) / norm;
        break;
    }
    }
    return state;
}

/// One learner step of the given algorithm, projection included for the
/// projected variant.
template <typename Scalar>
LearnerState<Scalar> td_step(Algorithm algo, LearnerState<Scalar> state, const Transition<Scalar>& tr, Scalar beta,
                             Scalar c_alpha, Scalar lambda, const ProjectionConfig& projection) {
    switch (algo) {
    case Algorithm::Standard:
        return td_step_standard(std::move(state), tr, beta, c_alpha, lambda);
    case Algorithm::Implicit:
        return td_step_implicit(std::move(state), tr, beta, c_alpha, lambda);
    case Algorithm::ImplicitProjected:
        return apply_projection(td_step_implicit(std::move(state), tr, beta, c_alpha, lambda), projection);
    }
    return state;
}

/// A(X_t), b(X_t), the implicit scaling D_t and gamma_t for one step.
template <typename Scalar = double>
struct CanonicalStep {
    Mat<Scalar> a_matrix;
    Vec<Scalar> b_vector;
    Vec<Scalar> d_diagonal;
    Scalar gamma_t{};

    Mat<Scalar> d_matrix() const { return d_diagonal.asDiagonal(); }
};

/// `trace` is z_t, i.e. already includes phi(S_t).
template <typename Scalar>
CanonicalStep<Scalar> canonical_form(const Transition<Scalar>& tr, const Vec<Scalar>& trace, Scalar beta,
                                     Scalar c_alpha, Scalar lambda) {
    const auto d = trace.size();
    CanonicalStep<Scalar> out;
    out.a_matrix = Mat<Scalar>::Zero(d + 1, d + 1);
    out.a_matrix(0, 0) = -c_alpha;
    out.a_matrix.bottomLeftCorner(d, 1) = -trace;
    out.a_matrix.bottomRightCorner(d, d) = trace * (tr.phi_next - tr.phi).transpose();
    out.b_vector.resize(d + 1);
    out.b_vector(0) = c_alpha * tr.reward;
    out.b_vector.tail(d) = tr.reward * trace;
    out.d_diagonal.resize(d + 1);
    out.d_diagonal(0) = Scalar(1) / (Scalar(1) + c_alpha * beta);
    out.d_diagonal.tail(d).setConstant(Scalar(1) / (Scalar(1) + beta * trace.squaredNorm()));
    const Scalar q = (Scalar(1) - lambda) * (Scalar(1) - lambda);
    out.gamma_t = std::min(Scalar(1) / (Scalar(1) + c_alpha * beta), q / (q + beta));
    return out;
}

/// Stacks (omega, theta) into Theta.
template <typename Scalar>
Vec<Scalar> stack(Scalar omega, const Vec<Scalar>& theta) {
    Vec<Scalar> out(theta.size() + 1);
    out << omega, theta;
    return out;
}

/// Theta + beta (A Theta + b), or Theta + beta D_t (A Theta + b) when implicit.
template <typename Scalar>
Vec<Scalar> canonical_update(const CanonicalStep<Scalar>& step, const Vec<Scalar>& big_theta, Scalar beta,
                             bool implicit) {
    Vec<Scalar> direction = step.a_matrix * big_theta + step.b_vector;
    if (implicit)
        direction = step.d_diagonal.asDiagonal() * direction;
    return big_theta + beta * direction;
}

/// (omega_hat - omega)^2 + |Pi_O (theta_hat - theta*)|^2.
template <typename Scalar>
Scalar evaluation_loss(Scalar omega_hat, const Vec<Scalar>& theta_hat, const OracleSolution<Scalar>& oracle) {
    if (theta_hat.size() != oracle.theta_star.size())
        throw Error(Errc::DimensionMismatch, "weight length does not match oracle");
    const Scalar dw = omega_hat - oracle.omega;
    return dw * dw + (oracle.projector * (theta_hat - oracle.theta_star)).squaredNorm();
}

template <typename Scalar>
Scalar evaluation_loss(const LearnerState<Scalar>& state, const OracleSolution<Scalar>& oracle) {
    return evaluation_loss(state.omega_hat, state.theta_hat, oracle);
}

} // namespace tdlab
