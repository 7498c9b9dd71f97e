#include "rwclust/recovery.hpp"

#include <cmath>
#include <stdexcept>

namespace rwclust {

namespace {

Eigen::VectorXd projection(const Eigen::MatrixXd& X, const Labels& labels) {
  if (labels.size() != static_cast<std::size_t>(X.rows())) throw std::invalid_argument("label length must equal n");
  Eigen::VectorXd l(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) l(i) = labels[static_cast<std::size_t>(i)];
  return X.transpose() * l / std::sqrt(static_cast<double>(X.rows()));
}

}  // namespace

std::string to_string(RecoveryMethod m) {
  switch (m) {
    case RecoveryMethod::sa_star: return "sa_star";
    case RecoveryMethod::if_star: return "if_star";
    case RecoveryMethod::sa_N: return "sa_N";
    case RecoveryMethod::if_q: return "if_q";
    case RecoveryMethod::signed_if: return "signed_if";
  }
  return "unknown";
}

RecoveryMethod recovery_method_from_string(const std::string& name) {
  for (RecoveryMethod m : {RecoveryMethod::sa_star, RecoveryMethod::if_star, RecoveryMethod::sa_N,
                           RecoveryMethod::if_q, RecoveryMethod::signed_if}) {
    if (to_string(m) == name) return m;
  }
  throw std::invalid_argument("unknown recovery method: " + name);
}

IndexSet threshold_projection(const Eigen::MatrixXd& X, const Labels& labels) {
  const Eigen::VectorXd y = projection(X, labels);
  const double t = std::sqrt(2.0 * std::log(static_cast<double>(X.cols())));
  IndexSet out;
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    if (std::abs(y(j)) >= t) out.push_back(static_cast<std::size_t>(j));
  }
  return out;
}

RecoveryResult recover_sa_star(const Eigen::MatrixXd& X) {
  RecoveryResult out;
  out.method = RecoveryMethod::sa_star;
  out.clustering = simple_aggregation(X);
  out.support = threshold_projection(X, out.clustering->labels);
  return out;
}

RecoveryResult recover_if_star(const Eigen::MatrixXd& X, const PowerOptions& power) {
  RecoveryResult out;
  out.method = RecoveryMethod::if_star;
  out.clustering = classical_pca(X, power);
  out.support = threshold_projection(X, out.clustering->labels);
  return out;
}

RecoveryResult recover_sa_N(const Eigen::MatrixXd& X, std::size_t N, const SolverChoice& solver) {
  RecoveryResult out;
  out.method = RecoveryMethod::sa_N;
  out.clustering = solver.exact ? sparse_aggregation_exact(X, N, solver.budget)
                                : sparse_aggregation_greedy(X, N, solver.greedy);
  out.support = *out.clustering->selected;
  return out;
}

RecoveryResult recover_if_q(const Eigen::MatrixXd& X, double q) {
  RecoveryResult out;
  out.method = RecoveryMethod::if_q;
  out.support = select_features(chi2_scores(X), static_cast<std::size_t>(X.cols()), q).selected;
  return out;
}

RecoveryResult recover_signed_pca(const Eigen::MatrixXd& X, const PowerOptions& power) {
  RecoveryResult out;
  out.method = RecoveryMethod::signed_if;
  out.clustering = classical_pca(X, power);
  const Eigen::VectorXd y = projection(X, out.clustering->labels);
  const double t = 2.0 * std::sqrt(std::log(static_cast<double>(X.cols())));
  std::vector<int> signs(static_cast<std::size_t>(X.cols()), 0);
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    if (std::abs(y(j)) > t) {
      signs[static_cast<std::size_t>(j)] = y(j) > 0.0 ? 1 : -1;
      out.support.push_back(static_cast<std::size_t>(j));
    }
  }
  out.signs = std::move(signs);
  return out;
}

PipelineResult run_pipeline(const Eigen::MatrixXd& X, Pipeline order, double q, const PowerOptions& power) {
  if (order == Pipeline::cluster_then_recover) {
    PipelineResult out;
    out.recovery = recover_if_star(X, power);
    out.clustering = out.recovery.clustering.value();
    return out;
  }
  RecoveryResult rec = recover_if_q(X, q);
  ClusterResult clu;
  if (rec.support.empty()) {
    clu = classical_pca(X, power);
    clu.fallback_used = true;
  } else {
    clu.singular = leading_left_singular(select_columns(X, rec.support), power);
    clu.labels = sign_labels(clu.singular->vector);
  }
  clu.method = Method::if_pca;
  clu.selected = rec.support;
  return {std::move(clu), std::move(rec)};
}

}  // namespace rwclust
