#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rwclust/arw_model.hpp"

namespace rwclust {

/// (1/n) min(#{est != truth}, #{est != -truth}).
double hamming_clustering(const Labels& est, const Labels& truth);

/// |est symmetric-difference truth| / expected_signals. Both sets ascending.
double hamming_recovery(const IndexSet& est, const IndexSet& truth, double expected_signals);

/// Same loss divided by the realized |truth| instead (1 when truth is empty
/// and est is not, 0 when both are empty).
double hamming_recovery_realized(const IndexSet& est, const IndexSet& truth);

/// #{j : sgn(est_signs_j) != sgn(true_mu_j)} / expected_signals.
double hamming_recovery_signed(std::span<const int> est_signs, const Eigen::VectorXd& true_mu, double expected_signals);

/// |<x/|x|, y/|y|>|. Throws on a zero vector.
double cos_angle(const Eigen::VectorXd& x, const Eigen::VectorXd& y);
double cos_angle(const Eigen::VectorXd& x, const Labels& labels);

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval for k successes out of n (95% by default).
Interval wilson_interval(std::size_t k, std::size_t n, double z = 1.959963984540054);

struct TestError {
  double type1 = 0.0;
  double type2 = 0.0;
  double sum = 0.0;
  Interval type1_ci;
  Interval type2_ci;
};

/// Null rejection rate, alternative acceptance rate, and their sum.
TestError empirical_test_error(const std::vector<bool>& null_rejects, const std::vector<bool>& alt_rejects);

struct LossReport {
  double clustering_hamming = 0.0;
  double recovery_hamming = 0.0;
  double cosine = 0.0;
  TestError test_error;
};

}  // namespace rwclust
