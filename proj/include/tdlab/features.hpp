#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include <Eigen/Dense>

#include "tdlab/markov.hpp"

namespace tdlab {

/// Row i is phi(i)^T. The whole matrix was divided by `scale`, so every row
/// has norm <= 1 while the column space is unchanged.
struct FeatureMatrix {
    MatrixXd matrix;
    double scale = 1.0;

    Eigen::Index n_states() const { return matrix.rows(); }
    Eigen::Index dim() const { return matrix.cols(); }
};

/// Numerical column rank with a relative threshold.
Eigen::Index column_rank(const MatrixXd& m, double tol = 1e-10);

/// Divides `raw` by its largest row norm.
FeatureMatrix normalize_rows_globally(MatrixXd raw);

/// [Bernoulli(0.5) block | e | v], resampled until full column rank (at
/// most 100 attempts, else RankFailure), then globally normalized.
FeatureMatrix build_random_features(Eigen::Index n_states, Eigen::Index d, const VectorXd& v, std::uint64_t seed);

/// The 13 x 4 interpolation table walking from (1,0,0,0) to (0,0,0,1) in
/// steps of 1/4.
MatrixXd boyan_interpolation_block();

/// Interpolation block with e and v appended, each only when it is not
/// already in the span of the preceding columns, then globally normalized.
FeatureMatrix build_boyan_features(const VectorXd& v);

/// Random Fourier features approximating exp(-gamma |x - y|^2) on inputs
/// rescaled into [0,1] per dimension.
class FourierFeatureMap {
  public:
    FourierFeatureMap(MatrixXd frequencies, VectorXd offsets, VectorXd input_lo, VectorXd input_hi);

    VectorXd operator()(const VectorXd& x) const;

    Eigen::Index n_features() const { return frequencies_.rows(); }
    Eigen::Index input_dim() const { return frequencies_.cols(); }
    double amplitude() const { return amplitude_; }
    const MatrixXd& frequencies() const { return frequencies_; }
    const VectorXd& offsets() const { return offsets_; }

  private:
    MatrixXd frequencies_;
    VectorXd offsets_;
    VectorXd lo_;
    VectorXd hi_;
    double amplitude_;
};

/// Frequencies ~ N(0, 2 gamma), offsets ~ U[0, 2 pi). Bounds default to [0,1].
FourierFeatureMap build_fourier_map(Eigen::Index input_dim, Eigen::Index n_features, double gamma, std::uint64_t seed,
                                    VectorXd input_lo = {}, VectorXd input_hi = {});

/// phi(s) (x) e_a: zero except block `action_index`.
VectorXd joint_state_action_features(const VectorXd& state_features, Eigen::Index action_index, Eigen::Index n_actions);

/// Writes the matrix as CSV with a phi0..phi{d-1} header.
void write_features_csv(std::ostream& os, const FeatureMatrix& features);

} // namespace tdlab
