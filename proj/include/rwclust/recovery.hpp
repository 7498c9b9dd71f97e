#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rwclust/clusterers.hpp"

namespace rwclust {

enum class RecoveryMethod { sa_star, if_star, sa_N, if_q, signed_if };

std::string to_string(RecoveryMethod m);
RecoveryMethod recovery_method_from_string(const std::string& name);

struct RecoveryResult {
  IndexSet support;  // ascending
  RecoveryMethod method = RecoveryMethod::sa_star;
  std::optional<std::vector<int>> signs;  // length p, nonzero exactly on support
  std::optional<ClusterResult> clustering;
};

/// y = n^-1/2 X' l, support = { j : |y_j| >= sqrt(2 log p) }.
IndexSet threshold_projection(const Eigen::MatrixXd& X, const Labels& labels);

RecoveryResult recover_sa_star(const Eigen::MatrixXd& X);
RecoveryResult recover_if_star(const Eigen::MatrixXd& X, const PowerOptions& power = {});

struct SolverChoice {
  bool exact = true;  // exhaustive search; otherwise local search
  std::uint64_t budget = kDefaultEnumerationBudget;
  GreedyOptions greedy;
};

/// The maximizing set of N^-1/2 ||sum_{j in S} x_j||_1 over |S| = N.
RecoveryResult recover_sa_N(const Eigen::MatrixXd& X, std::size_t N, const SolverChoice& solver = {});

RecoveryResult recover_if_q(const Eigen::MatrixXd& X, double q);

/// y = n^-1/2 X' l with classical-PCA labels; sign(y_j) where |y_j| > 2 sqrt(log p).
RecoveryResult recover_signed_pca(const Eigen::MatrixXd& X, const PowerOptions& power = {});

/// Order of the two sub-problems in a combined run.
enum class Pipeline { cluster_then_recover, recover_then_cluster };

struct PipelineResult {
  ClusterResult clustering;
  RecoveryResult recovery;
};

/// cluster_then_recover: classical PCA labels, then the projection threshold.
/// recover_then_cluster: chi-square screen at level q, then labels from the
/// leading singular vector of the recovered columns.
PipelineResult run_pipeline(const Eigen::MatrixXd& X, Pipeline order, double q, const PowerOptions& power = {});

}  // namespace rwclust
