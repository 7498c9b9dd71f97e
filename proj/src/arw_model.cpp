#include "rwclust/arw_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "rwclust/random.hpp"

namespace rwclust {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool in_open_unit(double v) { return v > 0.0 && v < 1.0; }

double spectral_norm(const Eigen::MatrixXd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues()(0);
}

double inverse_spectral_norm(const Eigen::MatrixXd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const double smallest = svd.singularValues()(svd.singularValues().size() - 1);
  if (smallest <= 0.0) throw std::invalid_argument("coloring matrix is singular");
  return 1.0 / smallest;
}

}  // namespace

void validate(const ArwParams& params) {
  if (params.p < 2) throw std::invalid_argument("p must be at least 2");
  if (!in_open_unit(params.theta)) throw std::invalid_argument("theta must lie in (0,1)");
  if (!in_open_unit(params.beta)) throw std::invalid_argument("beta must lie in (0,1)");
  if (!(params.sign_mix_a >= 0.0 && params.sign_mix_a <= 0.5)) {
    throw std::invalid_argument("sign mix a must lie in [0, 1/2]");
  }
  std::visit(overloaded{
                 [](PlainStrength s) {
                   if (!(s.alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
                 },
                 [](LogAdjustedStrength s) {
                   if (!in_open_unit(s.r)) throw std::invalid_argument("r must lie in (0,1)");
                 },
             },
             params.strength);
}

double tau_star(std::size_t p, double theta, double r) {
  const double lp = std::log(static_cast<double>(p));
  return std::pow(static_cast<double>(p), -theta / 4.0) * std::pow(4.0 * r * lp, 0.25);
}

Calibration calibrate(const ArwParams& params) {
  validate(params);
  const double p = static_cast<double>(params.p);
  Calibration c;
  c.n = static_cast<std::size_t>(std::floor(std::pow(p, params.theta) + 0.5));
  if (c.n < 2) throw std::invalid_argument("calibrated n = round(p^theta) is below 2");
  c.epsilon = std::pow(p, -params.beta);
  if (c.epsilon * p < 1e-9) throw std::invalid_argument("expected signal count p*epsilon is negligible");
  c.tau = std::visit(overloaded{
                         [&](PlainStrength s) { return std::pow(p, -s.alpha); },
                         [&](LogAdjustedStrength s) { return tau_star(params.p, params.theta, s.r); },
                     },
                     params.strength);
  return c;
}

Labels gen_labels(std::size_t n, std::uint64_t seed) {
  Rng rng(derive_seed(seed, StreamTag::labels));
  Labels labels(n);
  for (auto& l : labels) l = (rng() >> 63) ? 1 : -1;
  return labels;
}

MuDraw gen_mu(std::size_t p, double epsilon, double tau, double sign_mix_a, std::uint64_t seed) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw std::invalid_argument("gen_mu: epsilon must lie in (0,1]");
  if (!(tau > 0.0)) throw std::invalid_argument("gen_mu: tau must be positive");
  if (!(sign_mix_a >= 0.0 && sign_mix_a <= 0.5)) throw std::invalid_argument("gen_mu: a must lie in [0, 1/2]");
  const std::uint64_t base = derive_seed(seed, StreamTag::mu);
  const double negative_cut = sign_mix_a * epsilon;
  MuDraw draw{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p)), {}};
  for (std::size_t j = 0; j < p; ++j) {
    const double u = bits_to_unit(mix64(base + j));
    if (u >= epsilon) continue;
    draw.mu(static_cast<Eigen::Index>(j)) = u < negative_cut ? -tau : tau;
    draw.support.push_back(j);
  }
  return draw;
}

double ConditionBounds::max_bound() const { return std::max({norm_a, norm_a_inv, norm_b, norm_b_inv}); }

ConditionBounds condition_bounds(const NoiseSpec& noise) {
  ConditionBounds b;
  if (noise.kind == NoiseSpec::Kind::white) return b;
  if (noise.A) {
    b.norm_a = spectral_norm(*noise.A);
    b.norm_a_inv = inverse_spectral_norm(*noise.A);
  }
  if (noise.B) {
    b.norm_b = spectral_norm(*noise.B);
    b.norm_b_inv = inverse_spectral_norm(*noise.B);
  } else if (noise.B_diag) {
    const Eigen::VectorXd mags = noise.B_diag->cwiseAbs();
    if (mags.minCoeff() <= 0.0) throw std::invalid_argument("diagonal coloring has a zero entry");
    b.norm_b = mags.maxCoeff();
    b.norm_b_inv = 1.0 / mags.minCoeff();
  }
  return b;
}

NoiseSpec make_diagonal_coloring(std::size_t p, std::uint64_t seed) {
  const double L = std::max(2.0, std::log(static_cast<double>(p)));
  const double logL = std::log(L);
  const std::uint64_t base = derive_seed(seed, StreamTag::coloring);
  Eigen::VectorXd d(static_cast<Eigen::Index>(p));
  for (std::size_t j = 0; j < p; ++j) {
    const double u = bits_to_unit(mix64(base + j));
    d(static_cast<Eigen::Index>(j)) = std::exp((2.0 * u - 1.0) * logL);
  }
  NoiseSpec spec;
  spec.kind = NoiseSpec::Kind::colored;
  spec.B_diag = std::move(d);
  return spec;
}

Eigen::MatrixXd gen_noise(std::size_t n, std::size_t p, std::uint64_t seed) {
  Eigen::MatrixXd Z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (std::size_t j = 0; j < p; ++j) {
    Rng rng(derive_seed(seed, StreamTag::noise, j));
    double* col = Z.col(static_cast<Eigen::Index>(j)).data();
    for (std::size_t i = 0; i < n; ++i) col[i] = rng.normal();
  }
  return Z;
}

Dataset gen_dataset(const ArwParams& params, const NoiseSpec& noise, std::uint64_t seed, GenOptions options) {
  const Calibration cal = calibrate(params);
  const auto n = static_cast<Eigen::Index>(cal.n);
  const auto p = static_cast<Eigen::Index>(params.p);

  Dataset ds;
  ds.seed = seed;
  ds.params = params;
  ds.labels = gen_labels(cal.n, seed);
  if (options.null_signal) {
    ds.mu = Eigen::VectorXd::Zero(p);
    ds.support = IndexSet{};
  } else {
    MuDraw draw = gen_mu(params.p, cal.epsilon, cal.tau, params.sign_mix_a, seed);
    ds.mu = std::move(draw.mu);
    ds.support = std::move(draw.support);
  }

  Eigen::MatrixXd Z = gen_noise(cal.n, params.p, seed);
  if (noise.kind == NoiseSpec::Kind::colored) {
    if (noise.A) {
      if (noise.A->rows() != n || noise.A->cols() != n) throw std::invalid_argument("A must be n x n");
      Z = (*noise.A) * Z;
    }
    if (noise.B) {
      if (noise.B->rows() != p || noise.B->cols() != p) throw std::invalid_argument("B must be p x p");
      if (noise.B_diag) throw std::invalid_argument("give B densely or as a diagonal, not both");
      Z = Z * (*noise.B);
    } else if (noise.B_diag) {
      if (noise.B_diag->size() != p) throw std::invalid_argument("diagonal B must have length p");
      Z = Z * noise.B_diag->asDiagonal();
    }
  }

  Eigen::VectorXd l(n);
  for (Eigen::Index i = 0; i < n; ++i) l(i) = (*ds.labels)[static_cast<std::size_t>(i)];
  ds.X = std::move(Z);
  for (std::size_t j : *ds.support) {
    const auto jj = static_cast<Eigen::Index>(j);
    ds.X.col(jj) += (*ds.mu)(jj) * l;
  }
  return ds;
}

std::string to_string(const Strength& strength) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](PlainStrength s) { os << "alpha=" << s.alpha; },
                 [&](LogAdjustedStrength s) { os << "r=" << s.r; },
             },
             strength);
  return os.str();
}

}  // namespace rwclust
