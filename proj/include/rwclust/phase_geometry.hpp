#pragma once

#include <string>
#include <vector>

namespace rwclust {

enum class Problem { clustering, signal_recovery, hypothesis_testing };
enum class BoundKind { statistical, ctub };
enum class Variant { one_sided, signed_mix };
enum class Region { possible, impossible, on_boundary };

std::string to_string(Problem v);
std::string to_string(BoundKind v);
std::string to_string(Variant v);
std::string to_string(Region v);
Problem problem_from_string(const std::string& s);
BoundKind bound_kind_from_string(const std::string& s);
Variant variant_from_string(const std::string& s);

struct PhaseQuery {
  Problem problem = Problem::clustering;
  BoundKind bound_kind = BoundKind::statistical;
  Variant variant = Variant::one_sided;
  double theta = 0.5;
  double beta = 0.5;
};

inline constexpr const char* kBreakpointSegment = "breakpoint";
inline constexpr double kRegionTolerance = 1e-12;

struct PhaseAnswer {
  double alpha_boundary = 0.0;
  // Formula of the active branch in terms of theta and beta, or
  // kBreakpointSegment when beta sits on a junction.
  std::string segment;

  Region region_of(double alpha) const;
};

/// One linear piece of a boundary, active on [lo, hi).
struct BoundaryPiece {
  double lo;
  double hi;
  std::string formula;
};

/// The pieces of the boundary curve for fixed theta, in increasing beta.
/// Adjacent pieces with the same formula are merged.
std::vector<BoundaryPiece> boundary_pieces(Problem problem, BoundKind kind, Variant variant, double theta);

PhaseAnswer boundary(const PhaseQuery& query);

/// Evaluates a piece formula at (theta, beta).
double eval_formula(const std::string& formula, double theta, double beta);

/// beta - 1/2 below 3/4, (1 - sqrt(1 - beta))^2 above. Domain (1/2, 1).
double rho_star(double beta);

/// (1 - theta) rho*(1/2 + (beta - 1/2) / (1 - theta)). Domain 1/2 < beta < 1 - theta/2.
double rho_star_theta(double theta, double beta);

Region classify(Problem problem, BoundKind kind, Variant variant, double theta, double beta, double alpha);

}  // namespace rwclust
