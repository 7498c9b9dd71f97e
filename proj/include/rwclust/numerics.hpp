#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>

namespace rwclust {

/// A real number in [0, 1]. Construction outside the interval throws.
class Probability {
 public:
  explicit Probability(double value);

  double value() const noexcept { return value_; }
  operator double() const noexcept { return value_; }

 private:
  double value_;
};

/// P(Z > x) for Z ~ N(0, 1).
Probability std_normal_sf(double x);

/// Standard normal density.
double std_normal_pdf(double x) noexcept;

/// Regularized lower and upper incomplete gamma functions P(a, x), Q(a, x).
/// Series expansion below x = a + 1, Lentz continued fraction above.
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

/// P(chi2_dof > x). Throws std::invalid_argument for x < 0 or dof < 1.
Probability chisq_sf(double x, std::size_t dof);

/// P(chi2_dof <= x).
Probability chisq_cdf(double x, std::size_t dof);

/// P(chi2_dof(noncentrality) > x), summing Poisson-weighted central tails
/// outward from the Poisson mode until the remaining weight is below 1e-15.
Probability noncentral_chisq_sf(double x, std::size_t dof, double noncentrality);

/// E|Z + h| for Z ~ N(0, 1); h >= 0.
double folded_mean(double h);

/// Var|Z + h| = 1 + h^2 - folded_mean(h)^2; h >= 0.
double folded_var(double h);

/// Benjamini-Hochberg step-up: the largest k with p_(k) <= k * level / m,
/// or 0 when no sorted p-value passes. Ties keep input order.
std::size_t bh_threshold(std::span<const double> pvalues, double fdr_level);

}  // namespace rwclust
