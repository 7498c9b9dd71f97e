#include "rwclust/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <stdexcept>

namespace rwclust {

namespace {

std::size_t symmetric_difference_size(const IndexSet& a, const IndexSet& b) {
  if (!std::is_sorted(a.begin(), a.end()) || !std::is_sorted(b.begin(), b.end())) {
    throw std::invalid_argument("index sets must be sorted");
  }
  std::vector<std::size_t> diff;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(diff));
  return diff.size();
}

int sgn(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

double hamming_clustering(const Labels& est, const Labels& truth) {
  if (est.size() != truth.size()) throw std::invalid_argument("hamming_clustering: length mismatch");
  if (est.empty()) throw std::invalid_argument("hamming_clustering: empty labels");
  std::size_t mismatch = 0;
  for (std::size_t i = 0; i < est.size(); ++i) mismatch += est[i] != truth[i];
  const std::size_t flipped = est.size() - mismatch;
  return static_cast<double>(std::min(mismatch, flipped)) / static_cast<double>(est.size());
}

double hamming_recovery(const IndexSet& est, const IndexSet& truth, double expected_signals) {
  if (!(expected_signals > 0.0)) throw std::invalid_argument("hamming_recovery: expected signal count must be positive");
  return static_cast<double>(symmetric_difference_size(est, truth)) / expected_signals;
}

double hamming_recovery_realized(const IndexSet& est, const IndexSet& truth) {
  const std::size_t d = symmetric_difference_size(est, truth);
  if (truth.empty()) return d == 0 ? 0.0 : 1.0;
  return static_cast<double>(d) / static_cast<double>(truth.size());
}

double hamming_recovery_signed(std::span<const int> est_signs, const Eigen::VectorXd& true_mu, double expected_signals) {
  if (est_signs.size() != static_cast<std::size_t>(true_mu.size())) {
    throw std::invalid_argument("hamming_recovery_signed: length mismatch");
  }
  if (!(expected_signals > 0.0)) throw std::invalid_argument("hamming_recovery_signed: expected signal count must be positive");
  std::size_t wrong = 0;
  for (std::size_t j = 0; j < est_signs.size(); ++j) {
    wrong += sgn(static_cast<double>(est_signs[j])) != sgn(true_mu(static_cast<Eigen::Index>(j)));
  }
  return static_cast<double>(wrong) / expected_signals;
}

double cos_angle(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size()) throw std::invalid_argument("cos_angle: length mismatch");
  const double nx = x.norm();
  const double ny = y.norm();
  if (!(nx > 0.0) || !(ny > 0.0)) throw std::invalid_argument("cos_angle: zero vector");
  return std::min(1.0, std::abs(x.dot(y)) / (nx * ny));
}

double cos_angle(const Eigen::VectorXd& x, const Labels& labels) {
  Eigen::VectorXd l(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) l(static_cast<Eigen::Index>(i)) = labels[i];
  return cos_angle(x, l);
}

Interval wilson_interval(std::size_t k, std::size_t n, double z) {
  if (n == 0) throw std::invalid_argument("wilson_interval: n must be positive");
  const double nn = static_cast<double>(n);
  const double phat = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (phat + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

TestError empirical_test_error(const std::vector<bool>& null_rejects, const std::vector<bool>& alt_rejects) {
  if (null_rejects.empty() || alt_rejects.empty()) throw std::invalid_argument("empirical_test_error: empty batch");
  const auto k1 = static_cast<std::size_t>(std::count(null_rejects.begin(), null_rejects.end(), true));
  const auto k2 = static_cast<std::size_t>(std::count(alt_rejects.begin(), alt_rejects.end(), false));
  TestError e;
  e.type1 = static_cast<double>(k1) / static_cast<double>(null_rejects.size());
  e.type2 = static_cast<double>(k2) / static_cast<double>(alt_rejects.size());
  e.sum = e.type1 + e.type2;
  e.type1_ci = wilson_interval(k1, null_rejects.size());
  e.type2_ci = wilson_interval(k2, alt_rejects.size());
  return e;
}

}  // namespace rwclust
