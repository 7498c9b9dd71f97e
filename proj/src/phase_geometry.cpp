#include "rwclust/phase_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rwclust {

namespace {

// Formula identifiers. eval_formula() maps each to its value.
constexpr const char* kHalfMinusBeta = "(1-2beta)/2";
constexpr const char* kHalfTheta = "theta/2";
constexpr const char* kOneMinusBetaHalf = "(1-beta)/2";
constexpr const char* kShiftedQuarter = "(1+theta-2beta)/4";
constexpr const char* kQuarterTheta = "theta/4";
constexpr const char* kSigQuarter = "(1+theta-beta)/4";
constexpr const char* kHypOne = "(2+theta-4beta)/4";

void check_unit(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) throw std::invalid_argument(std::string(name) + " must lie in (0,1)");
}

// Active formula at beta, straight from the piecewise definitions. Intervals
// are half-open [lo, hi).
std::string active_formula(Problem problem, BoundKind kind, Variant variant, double t, double b) {
  const bool sign_mix = variant == Variant::signed_mix;
  switch (problem) {
    case Problem::clustering:
      if (kind == BoundKind::statistical) {
        if (b < (1.0 - t) / 2.0) return sign_mix ? kShiftedQuarter : kHalfMinusBeta;
        if (b < 1.0 - t) return kHalfTheta;
        return kOneMinusBetaHalf;
      }
      if (!sign_mix && b < (1.0 - t) / 2.0) return kHalfMinusBeta;
      if (b < 0.5) return kShiftedQuarter;
      if (b < 1.0 - t / 2.0) return kQuarterTheta;
      return kOneMinusBetaHalf;

    case Problem::signal_recovery:
      if (kind == BoundKind::statistical) return b < 1.0 - t ? kHalfTheta : kSigQuarter;
      if (b < (1.0 - t) / 2.0) return kHalfTheta;
      if (b < 0.5) return kShiftedQuarter;
      return kQuarterTheta;

    case Problem::hypothesis_testing:
      if (sign_mix) {
        if (kind == BoundKind::statistical) {
          if (b < (1.0 - t) / 2.0) return kShiftedQuarter;
          if (b < 1.0 - t) return kHalfTheta;
          return kSigQuarter;
        }
        return b < 0.5 ? kShiftedQuarter : kQuarterTheta;
      }
      {
        const double h1 = eval_formula(kHypOne, t, b);
        if (kind == BoundKind::ctub) return h1 > t / 4.0 ? kHypOne : kQuarterTheta;
        const double a = t / 2.0;
        const double c = eval_formula(kSigQuarter, t, b);
        const char* h2_formula = a <= c ? kHalfTheta : kSigQuarter;
        return h1 > std::min(a, c) ? kHypOne : h2_formula;
      }
  }
  throw std::logic_error("unhandled problem");
}

std::vector<double> candidate_breaks(double t) {
  std::vector<double> pts{0.0, 1.0, (1.0 - t) / 2.0, 0.5, 1.0 - t, 1.0 - t / 2.0, (2.0 - t) / 4.0, 1.0 / 3.0};
  pts.erase(std::remove_if(pts.begin(), pts.end(), [](double v) { return v < 0.0 || v > 1.0; }), pts.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end(), [](double a, double b) { return std::abs(a - b) < 1e-15; }),
            pts.end());
  return pts;
}

}  // namespace

std::string to_string(Problem v) {
  switch (v) {
    case Problem::clustering: return "clustering";
    case Problem::signal_recovery: return "signal_recovery";
    case Problem::hypothesis_testing: return "hypothesis_testing";
  }
  return "unknown";
}

std::string to_string(BoundKind v) { return v == BoundKind::statistical ? "statistical" : "ctub"; }
std::string to_string(Variant v) { return v == Variant::one_sided ? "one_sided" : "signed"; }

std::string to_string(Region v) {
  switch (v) {
    case Region::possible: return "possible";
    case Region::impossible: return "impossible";
    case Region::on_boundary: return "on_boundary";
  }
  return "unknown";
}

Problem problem_from_string(const std::string& s) {
  for (Problem v : {Problem::clustering, Problem::signal_recovery, Problem::hypothesis_testing}) {
    if (to_string(v) == s) return v;
  }
  throw std::invalid_argument("unknown problem: " + s);
}

BoundKind bound_kind_from_string(const std::string& s) {
  for (BoundKind v : {BoundKind::statistical, BoundKind::ctub}) {
    if (to_string(v) == s) return v;
  }
  throw std::invalid_argument("unknown bound kind: " + s);
}

Variant variant_from_string(const std::string& s) {
  for (Variant v : {Variant::one_sided, Variant::signed_mix}) {
    if (to_string(v) == s) return v;
  }
  throw std::invalid_argument("unknown variant: " + s);
}

double eval_formula(const std::string& f, double t, double b) {
  if (f == kHalfMinusBeta) return (1.0 - 2.0 * b) / 2.0;
  if (f == kHalfTheta) return t / 2.0;
  if (f == kOneMinusBetaHalf) return (1.0 - b) / 2.0;
  if (f == kShiftedQuarter) return (1.0 + t - 2.0 * b) / 4.0;
  if (f == kQuarterTheta) return t / 4.0;
  if (f == kSigQuarter) return (1.0 + t - b) / 4.0;
  if (f == kHypOne) return (2.0 + t - 4.0 * b) / 4.0;
  throw std::invalid_argument("unknown boundary formula: " + f);
}

std::vector<BoundaryPiece> boundary_pieces(Problem problem, BoundKind kind, Variant variant, double theta) {
  check_unit(theta, "theta");
  const std::vector<double> pts = candidate_breaks(theta);
  std::vector<BoundaryPiece> pieces;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const double mid = 0.5 * (pts[k] + pts[k + 1]);
    std::string f = active_formula(problem, kind, variant, theta, mid);
    if (!pieces.empty() && pieces.back().formula == f) {
      pieces.back().hi = pts[k + 1];
    } else {
      pieces.push_back({pts[k], pts[k + 1], std::move(f)});
    }
  }
  return pieces;
}

Region PhaseAnswer::region_of(double alpha) const {
  if (std::abs(alpha - alpha_boundary) <= kRegionTolerance) return Region::on_boundary;
  return alpha < alpha_boundary ? Region::possible : Region::impossible;
}

PhaseAnswer boundary(const PhaseQuery& q) {
  check_unit(q.theta, "theta");
  check_unit(q.beta, "beta");
  PhaseAnswer ans;
  const std::string f = active_formula(q.problem, q.bound_kind, q.variant, q.theta, q.beta);
  ans.alpha_boundary = eval_formula(f, q.theta, q.beta);
  ans.segment = f;
  const auto pieces = boundary_pieces(q.problem, q.bound_kind, q.variant, q.theta);
  for (std::size_t k = 1; k < pieces.size(); ++k) {
    if (std::abs(q.beta - pieces[k].lo) <= kRegionTolerance) ans.segment = kBreakpointSegment;
  }
  return ans;
}

double rho_star(double beta) {
  if (!(beta > 0.5 && beta < 1.0)) throw std::invalid_argument("rho_star: beta must lie in (1/2, 1)");
  if (beta < 0.75) return beta - 0.5;
  const double s = 1.0 - std::sqrt(1.0 - beta);
  return s * s;
}

double rho_star_theta(double theta, double beta) {
  check_unit(theta, "theta");
  if (!(beta > 0.5 && beta < 1.0 - theta / 2.0)) {
    throw std::invalid_argument("rho_star_theta: beta must lie in (1/2, 1 - theta/2)");
  }
  return (1.0 - theta) * rho_star(0.5 + (beta - 0.5) / (1.0 - theta));
}

Region classify(Problem problem, BoundKind kind, Variant variant, double theta, double beta, double alpha) {
  return boundary({problem, kind, variant, theta, beta}).region_of(alpha);
}

}  // namespace rwclust
