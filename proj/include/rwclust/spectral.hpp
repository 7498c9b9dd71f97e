#pragma once

#include <cstddef>
#include <utility>

#include <Eigen/Dense>

#include "rwclust/arw_model.hpp"
#include "rwclust/numerics.hpp"

namespace rwclust {

/// Q(j) = (||x_j||^2 - n) / sqrt(2n).
Eigen::VectorXd chi2_scores(const Eigen::MatrixXd& X);

struct ScreenResult {
  Eigen::VectorXd scores;
  IndexSet selected;  // ascending
  double q = 0.0;
  double threshold = 0.0;  // sqrt(2 q log p)
};

/// Keeps j with Q(j) >= sqrt(2 q log p). Equality is kept.
ScreenResult select_features(const Eigen::VectorXd& scores, std::size_t p, double q);

/// Copies the listed columns of X into a new matrix.
Eigen::MatrixXd select_columns(const Eigen::MatrixXd& X, const IndexSet& columns);

struct PowerOptions {
  double tol = 1e-8;
  int max_iter = 2000;
  int max_squarings = 40;
};

struct SingularPair {
  Eigen::VectorXd vector;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Top left singular vector of M via the n x n Gram matrix G = M M'.
///
/// G is first squared repeatedly (rescaled each time) until the dominant
/// column of G^(2^k) stops turning; that column seeds plain power iteration,
/// which stops once successive iterates differ by less than tol in angle.
/// The first nonzero coordinate of the result is made positive.
/// Throws std::invalid_argument for an empty or all-zero M.
SingularPair leading_left_singular(const Eigen::MatrixXd& M, const PowerOptions& options = {});

/// Same, starting from a precomputed Gram matrix.
SingularPair leading_eigvec_gram(const Eigen::MatrixXd& G, const PowerOptions& options = {});

enum class Regime { fat, skinny };

struct SpectralPrediction {
  Probability pi0{0.0};
  Probability pi1{0.0};
  Probability pi1_normal_approx{0.0};
  double cut = 0.0;  // chi-square cut n + 2 sqrt(q n log p)
  double expected_signals = 0.0;
  double m_q = 0.0;
  double q_tilde = 0.0;
  Regime regime = Regime::fat;
  std::pair<double, double> eigen_range{0.0, 0.0};
};

struct PredictOptions {
  double C = 3.0;
  // Treat the data as pure noise: no signal columns, q_tilde = 1 - theta.
  bool null_model = false;
};

/// Closed-form post-selection quantities for screening at level q.
/// For a plain (alpha) calibration, r is taken as tau^4 p^theta / (4 log p),
/// the value that makes tau* equal tau.
SpectralPrediction predict_selection(const ArwParams& params, double q, const PredictOptions& options = {});

/// Effective r of a calibration (see predict_selection).
double effective_r(const ArwParams& params);

double q_star(double theta, double beta, double r);
double q_tilde(double theta, double beta, double r);

}  // namespace rwclust
