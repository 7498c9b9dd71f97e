#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "rwclust/arw_model.hpp"
#include "rwclust/spectral.hpp"

namespace rwclust {

enum class Method { simple_agg, sparse_agg, classical_pca, if_pca, signed_sparse_agg };

std::string to_string(Method m);
Method method_from_string(const std::string& name);

/// The enumeration a solver would need exceeds its budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ClusterResult {
  Labels labels;
  Method method = Method::simple_agg;
  std::optional<IndexSet> selected;
  std::optional<SingularPair> singular;
  bool fallback_used = false;
  // Aggregation methods: ||sum_{j in S} s_j x_j||_1 of the chosen set.
  double objective = std::numeric_limits<double>::quiet_NaN();
  // signed_sparse_agg: sign of each selected column, aligned with `selected`.
  std::optional<std::vector<int>> signs;
};

/// sgn with sgn(0) = +1.
Labels sign_labels(const Eigen::VectorXd& v);

/// C(p, N), saturating at the max of uint64.
std::uint64_t binomial(std::size_t p, std::size_t N);

constexpr std::uint64_t kDefaultEnumerationBudget = 2'000'000;

ClusterResult simple_aggregation(const Eigen::MatrixXd& X);

/// Exhaustive search over |S| = N. Among equal objectives the
/// lexicographically smallest S wins. Throws BudgetExceeded when
/// C(p, N) > budget.
ClusterResult sparse_aggregation_exact(const Eigen::MatrixXd& X, std::size_t N,
                                       std::uint64_t budget = kDefaultEnumerationBudget);

struct GreedyOptions {
  int restarts = 8;
  std::uint64_t seed = 0;
};

/// Forward selection then best-improvement 1-swap search. Restart 0 starts
/// from the empty set; later restarts seed the set with one random column.
/// The best objective wins, ties going to the lower restart index.
ClusterResult sparse_aggregation_greedy(const Eigen::MatrixXd& X, std::size_t N, const GreedyOptions& options = {});

ClusterResult classical_pca(const Eigen::MatrixXd& X, const PowerOptions& power = {});

/// Screens at level q, then clusters by the leading left singular vector of
/// the kept columns. An empty screen falls back to classical_pca.
ClusterResult if_pca(const Eigen::MatrixXd& X, double q, const PowerOptions& power = {});

struct SignedOptions {
  std::uint64_t budget = kDefaultEnumerationBudget;
  bool allow_greedy = false;  // fall back to local search instead of throwing
  GreedyOptions greedy;
};

/// Maximizes ||X mu||_1 over mu in {-1,0,1}^p with N nonzeros.
ClusterResult signed_sparse_aggregation(const Eigen::MatrixXd& X, std::size_t N, const SignedOptions& options = {});

/// Optimal two-cluster split of points on a line. The upper cluster gets +1.
/// Ties go to the smaller split index; constant input gives all +1.
Labels kmeans_1d_two(std::span<const double> values);

}  // namespace rwclust
