#include "rwclust/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace rwclust {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kGammaTol = 1e-14;
constexpr int kGammaMaxIter = 1'000'000;

// log of x^a e^{-x} / Gamma(a), the common prefactor of P and Q.
double gamma_log_prefactor(double a, double x) {
  return -x + a * std::log(x) - std::lgamma(a);
}

double gamma_p_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int i = 0; i < kGammaMaxIter; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kGammaTol) break;
  }
  return sum * std::exp(gamma_log_prefactor(a, x));
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
double gamma_q_continued_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / kGammaTol;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kGammaMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kGammaTol) break;
  }
  return std::exp(gamma_log_prefactor(a, x)) * h;
}

void check_gamma_args(double a, double x) {
  if (!(a > 0.0)) throw std::invalid_argument("incomplete gamma: shape must be positive");
  if (!(x >= 0.0)) throw std::invalid_argument("incomplete gamma: argument must be nonnegative");
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

void check_chisq_args(double x, std::size_t dof) {
  if (dof < 1) throw std::invalid_argument("chisq: dof must be at least 1");
  if (!(x >= 0.0)) throw std::invalid_argument("chisq: x must be nonnegative, got " + std::to_string(x));
}

// 2 * [phi(h) - h * Phi(-h)] = folded_mean(h) - h, computed without the h^2 cancellation.
double folded_excess(double h) {
  const double d = 2.0 * (std_normal_pdf(h) - h * 0.5 * std::erfc(h / kSqrt2));
  return std::max(d, 0.0);
}

void check_fold_arg(double h) {
  if (!(h >= 0.0)) throw std::invalid_argument("folded normal: h must be nonnegative");
}

}  // namespace

Probability::Probability(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::invalid_argument("probability out of [0,1]: " + std::to_string(value));
  }
}

Probability std_normal_sf(double x) { return Probability(clamp01(0.5 * std::erfc(x / kSqrt2))); }

double std_normal_pdf(double x) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double regularized_gamma_p(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return clamp01(gamma_p_series(a, x));
  return clamp01(1.0 - gamma_q_continued_fraction(a, x));
}

double regularized_gamma_q(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return clamp01(1.0 - gamma_p_series(a, x));
  return clamp01(gamma_q_continued_fraction(a, x));
}

Probability chisq_sf(double x, std::size_t dof) {
  check_chisq_args(x, dof);
  return Probability(regularized_gamma_q(0.5 * static_cast<double>(dof), 0.5 * x));
}

Probability chisq_cdf(double x, std::size_t dof) {
  check_chisq_args(x, dof);
  return Probability(regularized_gamma_p(0.5 * static_cast<double>(dof), 0.5 * x));
}

Probability noncentral_chisq_sf(double x, std::size_t dof, double noncentrality) {
  check_chisq_args(x, dof);
  if (!(noncentrality >= 0.0)) throw std::invalid_argument("noncentral chisq: noncentrality must be >= 0");
  if (noncentrality == 0.0) return chisq_sf(x, dof);

  const double mean = 0.5 * noncentrality;
  const double half_dof = 0.5 * static_cast<double>(dof);
  const double half_x = 0.5 * x;
  auto log_weight = [&](double k) { return -mean + k * std::log(mean) - std::lgamma(k + 1.0); };
  auto term = [&](double k) {
    return std::exp(log_weight(k)) * regularized_gamma_q(half_dof + k, half_x);
  };

  constexpr double kWeightTol = 1e-15;
  const double mode = std::floor(mean);
  double sum = term(mode);
  for (double k = mode + 1.0;; k += 1.0) {
    sum += term(k);
    if (std::exp(log_weight(k)) < kWeightTol) break;
  }
  for (double k = mode - 1.0; k >= 0.0; k -= 1.0) {
    sum += term(k);
    if (std::exp(log_weight(k)) < kWeightTol) break;
  }
  return Probability(clamp01(sum));
}

double folded_mean(double h) {
  check_fold_arg(h);
  return h + folded_excess(h);
}

double folded_var(double h) {
  check_fold_arg(h);
  const double d = folded_excess(h);
  // 1 + h^2 - (h + d)^2
  return std::clamp(1.0 - d * (2.0 * h + d), 0.0, 1.0);
}

std::size_t bh_threshold(std::span<const double> pvalues, double fdr_level) {
  if (pvalues.empty()) throw std::invalid_argument("bh_threshold: empty p-value list");
  if (!(fdr_level > 0.0 && fdr_level < 1.0)) throw std::invalid_argument("bh_threshold: level must be in (0,1)");
  for (double v : pvalues) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("bh_threshold: p-value outside [0,1]");
  }
  std::vector<double> sorted(pvalues.begin(), pvalues.end());
  std::stable_sort(sorted.begin(), sorted.end());
  const double m = static_cast<double>(sorted.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] <= static_cast<double>(i + 1) * fdr_level / m) k = i + 1;
  }
  return k;
}

}  // namespace rwclust
