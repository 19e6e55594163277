#include "tdlab/features.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <random>
#include <string>

#include "tdlab/random.hpp"

namespace tdlab {

Eigen::Index column_rank(const MatrixXd& m, double tol) {
    Eigen::ColPivHouseholderQR<MatrixXd> qr(m);
    qr.setThreshold(tol);
    return qr.rank();
}

FeatureMatrix normalize_rows_globally(MatrixXd raw) {
    const double scale = raw.rowwise().norm().maxCoeff();
    if (!(scale > 0.0))
        throw Error(Errc::RankDeficient, "feature matrix is zero");
    raw /= scale;
    return FeatureMatrix{std::move(raw), scale};
}

FeatureMatrix build_random_features(Eigen::Index n_states, Eigen::Index d, const VectorXd& v, std::uint64_t seed) {
    if (d < 3)
        throw Error(Errc::DimensionMismatch, "random features need d >= 3");
    if (v.size() != n_states)
        throw Error(Errc::DimensionMismatch, "v length does not match state count");
    Rng rng = make_rng(seed);
    std::bernoulli_distribution coin(0.5);
    MatrixXd raw(n_states, d);
    for (int attempt = 0; attempt < 100; ++attempt) {
        for (Eigen::Index j = 0; j < d - 2; ++j)
            for (Eigen::Index i = 0; i < n_states; ++i)
                raw(i, j) = coin(rng) ? 1.0 : 0.0;
        raw.col(d - 2).setOnes();
        raw.col(d - 1) = v;
        if (column_rank(raw) == d)
            return normalize_rows_globally(std::move(raw));
    }
    throw Error(Errc::RankFailure, "no full-rank feature matrix after 100 draws");
}

MatrixXd boyan_interpolation_block() {
    MatrixXd block(13, 4);
    for (int s = 0; s < 13; ++s) {
        const double pos = s / 4.0;
        for (int j = 0; j < 4; ++j)
            block(s, j) = std::max(0.0, 1.0 - std::abs(pos - j));
    }
    return block;
}

namespace {

MatrixXd append_if_independent(const MatrixXd& base, const VectorXd& column) {
    MatrixXd extended(base.rows(), base.cols() + 1);
    extended << base, column;
    return column_rank(extended) > column_rank(base) ? extended : base;
}

} // namespace

FeatureMatrix build_boyan_features(const VectorXd& v) {
    if (v.size() != 13)
        throw Error(Errc::DimensionMismatch, "Boyan features need a length-13 value vector");
    MatrixXd raw = boyan_interpolation_block();
    raw = append_if_independent(raw, VectorXd::Ones(13));
    raw = append_if_independent(raw, v);
    return normalize_rows_globally(std::move(raw));
}

FourierFeatureMap::FourierFeatureMap(MatrixXd frequencies, VectorXd offsets, VectorXd input_lo, VectorXd input_hi)
    : frequencies_(std::move(frequencies)), offsets_(std::move(offsets)), lo_(std::move(input_lo)),
      hi_(std::move(input_hi)), amplitude_(std::sqrt(2.0 / static_cast<double>(frequencies_.rows()))) {
    if (offsets_.size() != frequencies_.rows() || lo_.size() != frequencies_.cols() || hi_.size() != frequencies_.cols())
        throw Error(Errc::DimensionMismatch, "Fourier map parts disagree in size");
    if (((hi_ - lo_).array() <= 0.0).any())
        throw Error(Errc::InvalidConfig, "Fourier map input bounds must satisfy lo < hi");
}

VectorXd FourierFeatureMap::operator()(const VectorXd& x) const {
    if (x.size() != input_dim())
        throw Error(Errc::DimensionMismatch, "Fourier map input has wrong dimension");
    const VectorXd unit = (x - lo_).cwiseQuotient(hi_ - lo_);
    return amplitude_ * (frequencies_ * unit + offsets_).array().cos().matrix();
}

FourierFeatureMap build_fourier_map(Eigen::Index input_dim, Eigen::Index n_features, double gamma, std::uint64_t seed,
                                    VectorXd input_lo, VectorXd input_hi) {
    if (n_features < 1 || input_dim < 1 || !(gamma > 0.0))
        throw Error(Errc::InvalidConfig, "Fourier map needs n_features >= 1, input_dim >= 1, gamma > 0");
    Rng rng = make_rng(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 * gamma));
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    MatrixXd w(n_features, input_dim);
    for (Eigen::Index i = 0; i < n_features; ++i)
        for (Eigen::Index j = 0; j < input_dim; ++j)
            w(i, j) = normal(rng);
    VectorXd b(n_features);
    for (Eigen::Index i = 0; i < n_features; ++i)
        b(i) = phase(rng);
    if (input_lo.size() == 0)
        input_lo = VectorXd::Zero(input_dim);
    if (input_hi.size() == 0)
        input_hi = VectorXd::Ones(input_dim);
    return FourierFeatureMap(std::move(w), std::move(b), std::move(input_lo), std::move(input_hi));
}

VectorXd joint_state_action_features(const VectorXd& state_features, Eigen::Index action_index, Eigen::Index n_actions) {
    if (action_index < 0 || action_index >= n_actions)
        throw Error(Errc::IndexOutOfRange, "action " + std::to_string(action_index) + " not in [0, " +
                                               std::to_string(n_actions) + ")");
    const auto d = state_features.size();
    VectorXd out = VectorXd::Zero(d * n_actions);
    out.segment(action_index * d, d) = state_features;
    return out;
}

void write_features_csv(std::ostream& os, const FeatureMatrix& features) {
    const auto& m = features.matrix;
    os << "state";
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        os << ",phi" << j;
    os << '\n' << std::setprecision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        os << i;
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            os << ',' << m(i, j);
        os << '\n';
    }
}

} // namespace tdlab
