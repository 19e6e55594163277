#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tdlab/envs.hpp"
#include "tdlab/markov.hpp"

using namespace tdlab;

namespace {

ChainModel<double> two_state() {
    ChainModel<double> c;
    c.transition.resize(2, 2);
    c.transition << 0.9, 0.1, 0.5, 0.5;
    c.reward.resize(2);
    c.reward << 0.0, 1.0;
    return c;
}

double inf_norm(const MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

} // namespace

// =============================================================================
// Stationary distribution
// =============================================================================

TEST(Stationary, SymmetricTwoState) {
    ChainModel<double> c;
    c.transition = MatrixXd::Constant(2, 2, 0.5);
    c.reward = VectorXd::Zero(2);
    const VectorXd pi = stationary_distribution(c);
    EXPECT_NEAR(pi(0), 0.5, 1e-14);
    EXPECT_NEAR(pi(1), 0.5, 1e-14);
}

TEST(Stationary, TwoStateByHand) {
    // pi_1 * 0.1 = pi_2 * 0.5 and pi_1 + pi_2 = 1
    const auto c = two_state();
    const VectorXd pi = stationary_distribution(c);
    EXPECT_NEAR(pi(0), 5.0 / 6.0, 1e-14);
    EXPECT_NEAR(pi(1), 1.0 / 6.0, 1e-14);
    const VectorXd power = oracle::power_iteration_pi(c.transition, 10000);
    EXPECT_NEAR((pi - power).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(Stationary, RandomFiveStateMatchesPowerIteration) {
    const auto c = generate_mrp(5, 7);
    const VectorXd pi = stationary_distribution(c);
    const VectorXd power = oracle::power_iteration_pi(c.transition, 1000000);
    EXPECT_LE((pi - power).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Stationary, SingularForReducibleChain) {
    ChainModel<double> c;
    c.transition = MatrixXd::Identity(3, 3);
    c.reward = VectorXd::Zero(3);
    try {
        stationary_distribution(c);
        FAIL() << "expected SingularSystem";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::SingularSystem);
    }
}

// =============================================================================
// Average reward
// =============================================================================

TEST(AverageReward, ConstantReward) {
    const VectorXd pi = VectorXd::Constant(4, 0.25);
    EXPECT_DOUBLE_EQ(average_reward(pi, VectorXd(VectorXd::Constant(4, 0.7))), 0.7);
}

TEST(AverageReward, BoyanAllOnePolicy) {
    BoyanPolicy all_one;
    all_one.fill(1);
    const auto c = boyan_chain(all_one);
    EXPECT_NEAR(average_reward(stationary_distribution(c), c.reward), 1.0, 1e-14);
}

TEST(AverageReward, TwoStateMatchesSimulation) {
    const auto c = two_state();
    VectorXd pi(2);
    pi << 5.0 / 6.0, 1.0 / 6.0;
    const double omega = average_reward(pi, c.reward);
    EXPECT_NEAR(omega, 1.0 / 6.0, 1e-15);

    Rng rng(11);
    Eigen::Index s = 0;
    const long n = 1000000;
    double sum = 0.0;
    for (long k = 0; k < n; ++k) {
        const auto step = sample_transition(c, s, rng);
        sum += step.reward;
        s = step.next_state;
    }
    // autocorrelated Bernoulli; the variance inflation (1+rho)/(1-rho) with rho = 0.4
    const double se = std::sqrt(omega * (1 - omega) / n * (1.4 / 0.6));
    EXPECT_NEAR(sum / n, omega, 3 * se);
}

TEST(AverageReward, DimensionMismatch) {
    EXPECT_THROW(average_reward(VectorXd(VectorXd::Ones(3)), VectorXd(VectorXd::Ones(2))), Error);
}

// =============================================================================
// Differential value
// =============================================================================

TEST(DifferentialValue, ConstantRewardIsZero) {
    auto c = generate_mrp(6, 3);
    c.reward.setConstant(0.4);
    const VectorXd pi = stationary_distribution(c);
    const VectorXd v = differential_value(c, pi, average_reward(pi, c.reward));
    EXPECT_LE(v.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(DifferentialValue, TwoStateMatchesSeries) {
    const auto c = two_state();
    const VectorXd pi = stationary_distribution(c);
    const double omega = average_reward(pi, c.reward);
    const VectorXd v = differential_value(c, pi, omega);
    const VectorXd series = oracle::series_value(c.transition, c.reward, omega, pi, 10000);
    EXPECT_LE((v - series).cwiseAbs().maxCoeff(), 1e-10);
    const VectorXd residual = (MatrixXd::Identity(2, 2) - c.transition) * v - (c.reward.array() - omega).matrix();
    EXPECT_LE(residual.cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE(std::abs(pi.dot(v)), 1e-8);
}

// =============================================================================
// Weights and projector
// =============================================================================

TEST(SolveWeights, IdentityFeatures) {
    VectorXd t(3);
    t << 0.2, -1.0, 4.0;
    EXPECT_LE((solve_weights<double>(MatrixXd::Identity(3, 3), t) - t).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(SolveWeights, AppendedColumnIsSelected) {
    const auto c = generate_mrp(30, 9);
    const VectorXd pi = stationary_distribution(c);
    const VectorXd v = differential_value(c, pi, average_reward(pi, c.reward));
    Rng rng(5);
    std::bernoulli_distribution coin(0.5);
    MatrixXd phi(30, 6);
    for (Eigen::Index i = 0; i < 30; ++i)
        for (Eigen::Index j = 0; j < 4; ++j)
            phi(i, j) = coin(rng) ? 1.0 : 0.0;
    phi.col(4).setOnes();
    phi.col(5) = v;
    const double scale = phi.rowwise().norm().maxCoeff();
    phi /= scale;
    VectorXd unit_e = VectorXd::Zero(6), unit_v = VectorXd::Zero(6);
    unit_e(4) = scale;
    unit_v(5) = scale;
    const VectorXd theta_star = solve_weights<double>(phi, v);
    EXPECT_LE((theta_star - unit_v).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE((solve_weights<double>(phi, VectorXd::Ones(30)) - unit_e).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE((phi * theta_star - v).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(SolveWeights, RankDeficient) {
    MatrixXd phi(4, 2);
    phi << 1, 2, 1, 2, 1, 2, 1, 2;
    try {
        solve_weights<double>(phi, VectorXd::Ones(4));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::RankDeficient);
    }
}

TEST(Projector, AxisAligned) {
    VectorXd e(2);
    e << 1.0, 0.0;
    const MatrixXd p = projector_onto_O<double>(e);
    MatrixXd expected(2, 2);
    expected << 0, 0, 0, 1;
    EXPECT_LE(inf_norm(p - expected), 1e-15);
}

TEST(Projector, Diagonal) {
    VectorXd e(2), theta(2);
    e << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    theta << 2.0, 0.0;
    const VectorXd out = projector_onto_O<double>(e) * theta;
    EXPECT_NEAR(out(0), 1.0, 1e-15);
    EXPECT_NEAR(out(1), -1.0, 1e-15);
}

TEST(Projector, IdentitiesOnRandomDirections) {
    Rng rng(2);
    std::normal_distribution<double> g;
    for (int k = 0; k < 50; ++k) {
        VectorXd e(7);
        for (auto& x : e)
            x = g(rng);
        const MatrixXd p = projector_onto_O<double>(e);
        EXPECT_LE(inf_norm(p - p.transpose()), 1e-15);
        EXPECT_LE(inf_norm(p * p - p), 1e-10);
        EXPECT_LE((p * e).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Projector, ZeroDirection) {
    try {
        projector_onto_O<double>(VectorXd::Zero(3));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::ZeroDirection);
    }
}

// =============================================================================
// Lambda-weighted transition and margin
// =============================================================================

TEST(LambdaTransition, MatchesTruncatedSeries) {
    Rng rng(13);
    for (double lambda : {0.1, 0.25, 0.5, 0.9}) {
        const auto c = oracle::random_chain(20, rng);
        const MatrixXd closed = lambda_transition<double>(c.transition, lambda);
        const MatrixXd series = oracle::series_p_lambda(c.transition, lambda, 200);
        EXPECT_LE(inf_norm(closed - series), 1e-10) << "lambda " << lambda;
        EXPECT_LE((closed.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-10);
    }
}

TEST(LambdaTransition, ZeroLambdaIsP) {
    const auto c = generate_mrp(8, 4);
    EXPECT_LE(inf_norm(lambda_transition<double>(c.transition, 0.0) - c.transition), 1e-15);
    EXPECT_LE(inf_norm(lambda_transition<double>(c.transition, 1e-9) - c.transition), 1e-8);
}

TEST(Margin, ThresholdPlugIn) {
    EXPECT_DOUBLE_EQ(calpha_threshold(1.0, 0.0), 1.0);
    // Delta + sqrt(1/(Delta^2 (1-lambda)^4) - 1/(1-lambda)^2)
    const double d = 0.1, l = 0.25, q = 0.75;
    EXPECT_NEAR(calpha_threshold(d, l), d + std::sqrt(1 / (d * d * q * q * q * q) - 1 / (q * q)), 1e-12);
}

TEST(Margin, PositiveOnRandomChains) {
    Rng rng(21);
    std::uniform_int_distribution<int> size(4, 20);
    for (int k = 0; k < 20; ++k) {
        const auto n = size(rng);
        const auto c = oracle::random_chain(n, rng);
        const VectorXd pi = stationary_distribution(c);
        const VectorXd v = differential_value(c, pi, average_reward(pi, c.reward));
        const MatrixXd phi = oracle::bernoulli_features(v, std::min<Eigen::Index>(n, 5), rng);
        const MatrixXd proj = projector_onto_O<double>(solve_weights<double>(phi, VectorXd::Ones(n)));
        for (double lambda : {0.1, 0.25, 0.5, 0.9}) {
            const auto m = stability_margin<double>(c, pi, phi, proj, lambda);
            EXPECT_GT(m.delta, 0.0) << "chain " << k << " lambda " << lambda;
            EXPECT_LE((m.p_lambda.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-10);
        }
    }
}

TEST(Margin, EigenSolveAgreesWithDirectSearch) {
    Rng rng(8);
    const auto c = oracle::random_chain(12, rng);
    const VectorXd pi = stationary_distribution(c);
    const VectorXd v = differential_value(c, pi, average_reward(pi, c.reward));
    const MatrixXd phi = oracle::bernoulli_features(v, 6, rng);
    const MatrixXd proj = projector_onto_O<double>(solve_weights<double>(phi, VectorXd::Ones(12)));
    const auto m = stability_margin<double>(c, pi, phi, proj, 0.25);

    const MatrixXd p_lambda = oracle::series_p_lambda(c.transition, 0.25, 200);
    const MatrixXd q = phi.transpose() * pi.asDiagonal() * (MatrixXd::Identity(12, 12) - p_lambda) * phi;
    const MatrixXd sym = (q + q.transpose()) / 2;
    const auto search = oracle::brute_force_margin(sym, proj, 100000, rng);
    EXPECT_GE(search.random_min, m.delta - 1e-6);
    EXPECT_NEAR(search.refined, m.delta, 1e-6);
}

TEST(Margin, NonPositiveSurfaces) {
    // the only direction in O has constant feature image, which I - P maps to 0
    ChainModel<double> c;
    c.transition = MatrixXd::Constant(2, 2, 0.5);
    c.reward = VectorXd::Zero(2);
    MatrixXd phi(2, 2);
    phi << 1, 0, 1, 0;
    VectorXd e(2);
    e << 0.0, 1.0;
    try {
        stability_margin<double>(c, VectorXd::Constant(2, 0.5), phi, projector_onto_O<double>(e), 0.0);
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.code(), Errc::NonPositiveMargin);
    }
}

// =============================================================================
// Ergodicity
// =============================================================================

TEST(Ergodic, PeriodicPermutation) {
    MatrixXd p(2, 2);
    p << 0, 1, 1, 0;
    const auto r = verify_ergodic(p);
    EXPECT_FALSE(r.ergodic);
    EXPECT_TRUE(r.irreducible);
    EXPECT_FALSE(r.aperiodic);
    EXPECT_FALSE(r.diagnostic.empty());
}

TEST(Ergodic, IdentityIsReducible) {
    const auto r = verify_ergodic(MatrixXd::Identity(2, 2));
    EXPECT_FALSE(r.ergodic);
    EXPECT_FALSE(r.irreducible);
}

TEST(Ergodic, PositiveMatrix) {
    Rng rng(1);
    EXPECT_TRUE(verify_ergodic(oracle::random_chain(9, rng).transition).ergodic);
}

// =============================================================================
// Full oracle
// =============================================================================

TEST(Oracle, InvariantsOnGeneratedMrp) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto c = generate_mrp(40, seed);
        Rng rng(seed);
        const VectorXd pi0 = stationary_distribution(c);
        const VectorXd v0 = differential_value(c, pi0, average_reward(pi0, c.reward));
        const MatrixXd phi = oracle::bernoulli_features(v0, 8, rng);
        const auto o = compute_oracle<double>(c, phi, 0.25);
        EXPECT_GT(o.pi.minCoeff(), 0.0);
        EXPECT_NEAR(o.pi.sum(), 1.0, 1e-10);
        EXPECT_LE((o.pi.transpose() * c.transition - o.pi.transpose()).cwiseAbs().maxCoeff(), 1e-10);
        const VectorXd res = (MatrixXd::Identity(40, 40) - c.transition) * o.v - (c.reward.array() - o.omega).matrix();
        EXPECT_LE(res.cwiseAbs().maxCoeff(), 1e-8);
        EXPECT_LE(std::abs(o.pi.dot(o.v)), 1e-8);
        EXPECT_LE(inf_norm(o.projector * o.projector - o.projector), 1e-10);
        EXPECT_LE((o.projector * o.theta_e).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LE(o.value_residual, 1e-8);
        EXPECT_LE(o.constant_residual, 1e-8);
        EXPECT_GT(o.delta, 0.0);
    }
}

TEST(Oracle, RejectsInvalidModel) {
    ChainModel<double> c;
    c.transition = MatrixXd::Constant(2, 2, 0.6);
    c.reward = VectorXd::Zero(2);
    EXPECT_THROW(compute_oracle<double>(c, MatrixXd::Identity(2, 2), 0.25), Error);
    c.transition = MatrixXd::Constant(2, 2, 0.5);
    c.reward(0) = 1.5;
    EXPECT_THROW(c.validate(), Error);
}
