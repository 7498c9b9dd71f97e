#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace rwclust {

using Labels = std::vector<int>;
using IndexSet = std::vector<std::size_t>;

struct PlainStrength {
  double alpha;  // tau = p^-alpha
};

struct LogAdjustedStrength {
  double r;  // tau = p^(-theta/4) (4 r log p)^(1/4)
};

using Strength = std::variant<PlainStrength, LogAdjustedStrength>;

struct ArwParams {
  std::size_t p = 0;
  double theta = 0.0;
  double beta = 0.0;
  Strength strength = PlainStrength{0.0};
  double sign_mix_a = 0.0;  // fraction of signals equal to -tau
};

struct Calibration {
  std::size_t n = 0;
  double epsilon = 0.0;
  double tau = 0.0;

  double expected_signals(std::size_t p) const { return epsilon * static_cast<double>(p); }
};

/// Throws std::invalid_argument describing the first violated constraint.
void validate(const ArwParams& params);

/// n = round(p^theta) (ties up), epsilon = p^-beta, tau from the strength variant.
Calibration calibrate(const ArwParams& params);

/// tau* = p^(-theta/4) (4 r log p)^(1/4).
double tau_star(std::size_t p, double theta, double r);

Labels gen_labels(std::size_t n, std::uint64_t seed);

struct MuDraw {
  Eigen::VectorXd mu;
  IndexSet support;
};

/// mu(j) is 0 w.p. 1-eps, -tau w.p. a*eps, +tau otherwise. Each coordinate
/// is a pure function of (seed, j).
MuDraw gen_mu(std::size_t p, double epsilon, double tau, double sign_mix_a, std::uint64_t seed);

struct ConditionBounds {
  double norm_a = 1.0;
  double norm_a_inv = 1.0;
  double norm_b = 1.0;
  double norm_b_inv = 1.0;

  double max_bound() const;
};

/// Noise model. For colored noise the data are l mu' + A Z B; either factor may
/// be omitted (identity). B can be given densely or as a diagonal.
struct NoiseSpec {
  enum class Kind { white, colored };
  Kind kind = Kind::white;
  std::optional<Eigen::MatrixXd> A;
  std::optional<Eigen::MatrixXd> B;
  std::optional<Eigen::VectorXd> B_diag;

  static NoiseSpec white() { return {}; }
};

/// Spectral norms of A, A^-1, B, B^-1. Recorded, not enforced.
ConditionBounds condition_bounds(const NoiseSpec& noise);

/// Diagonal B with entries drawn log-uniformly in [1/L, L], L = max(2, log p).
NoiseSpec make_diagonal_coloring(std::size_t p, std::uint64_t seed);

struct Dataset {
  Eigen::MatrixXd X;
  std::optional<Labels> labels;
  std::optional<Eigen::VectorXd> mu;
  std::optional<IndexSet> support;
  std::uint64_t seed = 0;
  std::optional<ArwParams> params;

  std::size_t n() const { return static_cast<std::size_t>(X.rows()); }
  std::size_t p() const { return static_cast<std::size_t>(X.cols()); }
};

struct GenOptions {
  // Draw labels and noise as usual but set mu = 0. Same seed gives the same Z.
  bool null_signal = false;
};

Dataset gen_dataset(const ArwParams& params, const NoiseSpec& noise, std::uint64_t seed, GenOptions options = {});

/// Pure noise matrix Z (n x p) as drawn by gen_dataset for this seed.
Eigen::MatrixXd gen_noise(std::size_t n, std::size_t p, std::uint64_t seed);

std::string to_string(const Strength& strength);

}  // namespace rwclust
