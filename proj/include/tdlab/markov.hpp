#pragma once

// Exact oracle quantities for a finite Markov reward process under a fixed
// policy: stationary law, average reward, differential value, weight solves,
// the projector removing the constant-shift direction, and the negative
// definiteness margin of the mean TD(lambda) operator.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tdlab/error.hpp"

namespace tdlab {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VectorXd = Vec<double>;
using MatrixXd = Mat<double>;

/// Numerical tolerances used by the oracle pipeline.
struct OracleTolerances {
    double entry = 1e-12;    ///< row sums, nonnegativity, zero-direction checks
    double residual = 1e-8;  ///< differential-value and weight residuals
    double stationary = 1e-10;
};

/// Transition matrix and state reward vector of a Markov reward process.
template <typename Scalar = double>
struct ChainModel {
    Mat<Scalar> transition;
    Vec<Scalar> reward;

    Eigen::Index n_states() const { return transition.rows(); }

    /// Throws InvalidModel when the matrix is not row-stochastic or a reward
    /// falls outside [0, 1].
    void validate(double tol = 1e-12) const {
        const auto n = transition.rows();
        if (n == 0 || transition.cols() != n)
            throw Error(Errc::InvalidModel, "transition matrix must be square and non-empty");
        if (reward.size() != n)
            throw Error(Errc::DimensionMismatch, "reward length does not match state count");
        for (Eigen::Index i = 0; i < n; ++i) {
            if ((transition.row(i).array() < Scalar(0)).any())
                throw Error(Errc::InvalidModel, "negative transition probability in row " + std::to_string(i));
            const Scalar sum = transition.row(i).sum();
            if (std::abs(static_cast<double>(sum - Scalar(1))) > tol)
                throw Error(Errc::InvalidModel, "row " + std::to_string(i) + " does not sum to 1");
            if (reward(i) < Scalar(0) || reward(i) > Scalar(1))
                throw Error(Errc::InvalidModel, "reward " + std::to_string(i) + " outside [0,1]");
        }
    }
};

struct ErgodicityReport {
    bool ergodic = false;
    bool irreducible = false;
    bool aperiodic = false;
    std::string diagnostic;
};

/// Irreducibility by strong connectivity of the positive-entry digraph;
/// aperiodicity by the gcd of cycle lengths through state 0 (BFS levels).
template <typename Derived>
ErgodicityReport verify_ergodic(const Eigen::MatrixBase<Derived>& transition, double tol = 1e-12) {
    const auto n = transition.rows();
    ErgodicityReport report;
    auto edge = [&](Eigen::Index i, Eigen::Index j) { return static_cast<double>(transition(i, j)) > tol; };

    auto reach = [&](bool reverse) {
        std::vector<char> seen(static_cast<std::size_t>(n), 0);
        std::vector<Eigen::Index> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            const auto u = stack.back();
            stack.pop_back();
            for (Eigen::Index v = 0; v < n; ++v) {
                if (!seen[static_cast<std::size_t>(v)] && (reverse ? edge(v, u) : edge(u, v))) {
                    seen[static_cast<std::size_t>(v)] = 1;
                    stack.push_back(v);
                }
            }
        }
        return std::find(seen.begin(), seen.end(), 0) == seen.end();
    };
    report.irreducible = n > 0 && reach(false) && reach(true);
    if (!report.irreducible) {
        report.diagnostic = "reducible: positive-entry digraph is not strongly connected";
        return report;
    }

    // For an irreducible chain the period equals gcd over edges (u,v) of
    // level(u) + 1 - level(v), with BFS levels from any root.
    std::vector<long> level(static_cast<std::size_t>(n), -1);
    std::vector<Eigen::Index> queue{0};
    level[0] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const auto u = queue[head];
        for (Eigen::Index v = 0; v < n; ++v) {
            if (edge(u, v) && level[static_cast<std::size_t>(v)] < 0) {
                level[static_cast<std::size_t>(v)] = level[static_cast<std::size_t>(u)] + 1;
                queue.push_back(v);
            }
        }
    }
    long period = 0;
    for (Eigen::Index u = 0; u < n; ++u)
        for (Eigen::Index v = 0; v < n; ++v)
            if (edge(u, v))
                period = std::gcd(period, std::abs(level[static_cast<std::size_t>(u)] + 1 - level[static_cast<std::size_t>(v)]));
    report.aperiodic = period == 1;
    if (!report.aperiodic) {
        report.diagnostic = "periodic: period " + std::to_string(period);
        return report;
    }
    report.ergodic = true;
    report.diagnostic = "irreducible and aperiodic";
    return report;
}

/// Solves pi^T P = pi^T, sum(pi) = 1 by replacing the last stationarity
/// equation with the normalization row.
template <typename Scalar>
Vec<Scalar> stationary_distribution(const ChainModel<Scalar>& chain, const OracleTolerances& tol = {}) {
    const auto n = chain.n_states();
    Mat<Scalar> system = (Mat<Scalar>::Identity(n, n) - chain.transition).transpose();
    system.row(n - 1).setOnes();
    Vec<Scalar> rhs = Vec<Scalar>::Zero(n);
    rhs(n - 1) = Scalar(1);

    Eigen::FullPivLU<Mat<Scalar>> lu(system);
    lu.setThreshold(Scalar(tol.entry));
    if (lu.rank() < n)
        throw Error(Errc::SingularSystem, "stationary system is rank deficient (chain not ergodic?)");
    Vec<Scalar> pi = lu.solve(rhs);

    const double residual = static_cast<double>((pi.transpose() * chain.transition - pi.transpose()).cwiseAbs().maxCoeff());
    if (!(residual <= tol.stationary) || !((pi.array() > Scalar(0)).all()))
        throw Error(Errc::SingularSystem, "stationary solve failed (residual " + std::to_string(residual) + ")");
    return pi;
}

template <typename Scalar>
Scalar average_reward(const Vec<Scalar>& pi, const Vec<Scalar>& reward) {
    if (pi.size() != reward.size())
        throw Error(Errc::DimensionMismatch, "pi and reward lengths differ");
    return pi.dot(reward);
}

/// Basic differential value: (I - P) v = r - omega e with pi^T v = 0,
/// solved as the consistent (n+1) x n augmented system.
template <typename Scalar>
Vec<Scalar> differential_value(const ChainModel<Scalar>& chain, const Vec<Scalar>& pi, Scalar omega,
                               const OracleTolerances& tol = {}) {
    const auto n = chain.n_states();
    if (pi.size() != n)
        throw Error(Errc::DimensionMismatch, "pi length does not match state count");
    Mat<Scalar> system(n + 1, n);
    system.topRows(n) = Mat<Scalar>::Identity(n, n) - chain.transition;
    system.row(n) = pi.transpose();
    Vec<Scalar> rhs(n + 1);
    rhs.head(n) = chain.reward.array() - omega;
    rhs(n) = Scalar(0);

    Eigen::ColPivHouseholderQR<Mat<Scalar>> qr(system);
    Vec<Scalar> v = qr.solve(rhs);
    const double residual = static_cast<double>((system * v - rhs).cwiseAbs().maxCoeff());
    if (qr.rank() < n || !(residual <= tol.residual))
        throw Error(Errc::SingularSystem, "differential value residual " + std::to_string(residual));
    return v;
}

/// Minimum-norm least-squares weights for features * theta ~= target.
template <typename Scalar>
Vec<Scalar> solve_weights(const Mat<Scalar>& features, const Vec<Scalar>& target, double rank_tol = 1e-12) {
    if (features.rows() != target.size())
        throw Error(Errc::DimensionMismatch, "feature rows do not match target length");
    Eigen::CompleteOrthogonalDecomposition<Mat<Scalar>> cod;
    cod.setThreshold(Scalar(rank_tol));
    cod.compute(features);
    if (cod.rank() < features.cols())
        throw Error(Errc::RankDeficient, "feature matrix rank " + std::to_string(cod.rank()) + " < " +
                                             std::to_string(features.cols()));
    return cod.solve(target);
}

/// I - theta_e theta_e^T / |theta_e|^2.
template <typename Scalar>
Mat<Scalar> projector_onto_O(const Vec<Scalar>& theta_e, double zero_tol = 1e-12) {
    const Scalar norm2 = theta_e.squaredNorm();
    if (!(std::sqrt(static_cast<double>(norm2)) > zero_tol))
        throw Error(Errc::ZeroDirection, "constant-direction weights are zero");
    const auto d = theta_e.size();
    return Mat<Scalar>::Identity(d, d) - theta_e * theta_e.transpose() / norm2;
}

/// (1 - lambda) sum_m lambda^m P^{m+1} in closed form (1-lambda) P (I - lambda P)^{-1}.
template <typename Scalar>
Mat<Scalar> lambda_transition(const Mat<Scalar>& transition, Scalar lambda) {
    const auto n = transition.rows();
    Mat<Scalar> resolvent = (Mat<Scalar>::Identity(n, n) - lambda * transition).partialPivLu().inverse();
    return (Scalar(1) - lambda) * transition * resolvent;
}

/// Lower bound on c_alpha from the margin Delta:
/// Delta + sqrt(1/(Delta^2 (1-lambda)^4) - 1/(1-lambda)^2).
template <typename Scalar>
Scalar calpha_threshold(Scalar delta, Scalar lambda) {
    const Scalar q = (Scalar(1) - lambda) * (Scalar(1) - lambda);
    Scalar radicand = Scalar(1) / (delta * delta * q * q) - Scalar(1) / q;
    if (radicand < Scalar(0))
        radicand = Scalar(0);
    return delta + std::sqrt(radicand);
}

/// Orthonormal basis of the range of a symmetric projector (eigenvalue ~ 1).
template <typename Scalar>
Mat<Scalar> range_basis(const Mat<Scalar>& projector) {
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig(projector);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i)
        if (eig.eigenvalues()(i) > Scalar(0.5))
            keep.push_back(i);
    Mat<Scalar> basis(projector.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k)
        basis.col(static_cast<Eigen::Index>(k)) = eig.eigenvectors().col(keep[k]);
    return basis;
}

template <typename Scalar = double>
struct StabilityMargin {
    Mat<Scalar> p_lambda;
    Mat<Scalar> weighting;   ///< diag(pi)
    Mat<Scalar> quadratic;   ///< Phi^T M (I - P^(lambda)) Phi
    Scalar delta{};
    Scalar calpha_min{};
};

/// Delta = min over unit theta in O of theta^T Phi^T M (I - P^(lambda)) Phi theta,
/// computed as the smallest eigenvalue of the symmetric part restricted to a
/// basis of O. Throws NonPositiveMargin when Delta <= 0.
template <typename Scalar>
StabilityMargin<Scalar> stability_margin(const ChainModel<Scalar>& chain, const Vec<Scalar>& pi,
                                         const Mat<Scalar>& features, const Mat<Scalar>& projector,
                                         Scalar lambda) {
    const auto n = chain.n_states();
    if (features.rows() != n || pi.size() != n || projector.rows() != features.cols())
        throw Error(Errc::DimensionMismatch, "stability margin inputs disagree in size");
    StabilityMargin<Scalar> out;
    out.p_lambda = lambda_transition<Scalar>(chain.transition, lambda);
    out.weighting = pi.asDiagonal();
    out.quadratic = features.transpose() * pi.asDiagonal() *
                    (Mat<Scalar>::Identity(n, n) - out.p_lambda) * features;
    const Mat<Scalar> sym = (out.quadratic + out.quadratic.transpose()) / Scalar(2);
    const Mat<Scalar> basis = range_basis(projector);
    const Mat<Scalar> restricted = basis.transpose() * sym * basis;
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig(restricted, Eigen::EigenvaluesOnly);
    out.delta = eig.eigenvalues().minCoeff();
    if (!(out.delta > Scalar(0)))
        throw Error(Errc::NonPositiveMargin, "margin " + std::to_string(static_cast<double>(out.delta)));
    out.calpha_min = calpha_threshold(out.delta, lambda);
    return out;
}

template <typename Scalar = double>
struct OracleSolution {
    Vec<Scalar> pi;
    Scalar omega{};
    Vec<Scalar> v;
    Vec<Scalar> theta_star;
    Vec<Scalar> theta_e;
    Mat<Scalar> projector;
    Scalar delta{};
    Scalar calpha_min{};
    double value_residual = 0;    ///< |Phi theta* - v|_inf
    double constant_residual = 0; ///< |Phi theta_e - e|_inf
};

/// Full oracle pipeline for a chain and a feature matrix. When the column
/// space contains e and v the reported residuals are at round-off level.
template <typename Scalar>
OracleSolution<Scalar> compute_oracle(const ChainModel<Scalar>& chain, const Mat<Scalar>& features, Scalar lambda,
                                      const OracleTolerances& tol = {}) {
    chain.validate(tol.entry);
    const auto report = verify_ergodic(chain.transition, tol.entry);
    if (!report.ergodic)
        throw Error(Errc::SingularSystem, "chain is not ergodic: " + report.diagnostic);
    OracleSolution<Scalar> out;
    out.pi = stationary_distribution(chain, tol);
    out.omega = average_reward(out.pi, chain.reward);
    out.v = differential_value(chain, out.pi, out.omega, tol);
    out.theta_star = solve_weights<Scalar>(features, out.v);
    const Vec<Scalar> ones = Vec<Scalar>::Ones(chain.n_states());
    out.theta_e = solve_weights<Scalar>(features, ones);
    out.value_residual = static_cast<double>((features * out.theta_star - out.v).cwiseAbs().maxCoeff());
    out.constant_residual = static_cast<double>((features * out.theta_e - ones).cwiseAbs().maxCoeff());
    out.projector = projector_onto_O<Scalar>(out.theta_e, tol.entry);
    const auto margin = stability_margin<Scalar>(chain, out.pi, features, out.projector, lambda);
    out.delta = margin.delta;
    out.calpha_min = margin.calpha_min;
    return out;
}

} // namespace tdlab
