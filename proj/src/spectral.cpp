#include "rwclust/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace rwclust {

namespace {

// sin of the angle between unit vectors, robust near 0.
double unit_angle_sin(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double c = std::min(1.0, std::abs(a.dot(b)));
  const double d = std::min((a - b).norm(), (a + b).norm());
  // For tiny angles d is accurate; 1 - c^2 cancels there.
  return d < 1e-4 ? d : std::sqrt(std::max(0.0, 1.0 - c * c));
}

void fix_sign(Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) != 0.0) {
      if (v(i) < 0.0) v = -v;
      return;
    }
  }
}

Eigen::Index largest_column(const Eigen::MatrixXd& G) {
  Eigen::Index best = 0;
  G.colwise().squaredNorm().maxCoeff(&best);
  return best;
}

}  // namespace

Eigen::VectorXd chi2_scores(const Eigen::MatrixXd& X) {
  const double n = static_cast<double>(X.rows());
  if (X.rows() < 1) throw std::invalid_argument("chi2_scores: need at least one row");
  return ((X.colwise().squaredNorm().array() - n) / std::sqrt(2.0 * n)).transpose();
}

ScreenResult select_features(const Eigen::VectorXd& scores, std::size_t p, double q) {
  if (!(q > 0.0)) throw std::invalid_argument("select_features: q must be positive");
  if (p < 2) throw std::invalid_argument("select_features: p must be at least 2");
  ScreenResult r;
  r.scores = scores;
  r.q = q;
  r.threshold = std::sqrt(2.0 * q * std::log(static_cast<double>(p)));
  for (Eigen::Index j = 0; j < scores.size(); ++j) {
    if (scores(j) >= r.threshold) r.selected.push_back(static_cast<std::size_t>(j));
  }
  return r;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& X, const IndexSet& columns) {
  Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) {
    out.col(static_cast<Eigen::Index>(k)) = X.col(static_cast<Eigen::Index>(columns[k]));
  }
  return out;
}

SingularPair leading_eigvec_gram(const Eigen::MatrixXd& G, const PowerOptions& options) {
  if (G.rows() == 0 || G.rows() != G.cols()) throw std::invalid_argument("leading_eigvec_gram: need a square nonempty matrix");
  if (!(options.tol > 0.0)) throw std::invalid_argument("leading_eigvec_gram: tol must be positive");
  const double scale = G.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) throw std::invalid_argument("leading_eigvec_gram: matrix is zero");

  // Warm start: dominant column of G^(2^k).
  Eigen::MatrixXd P = G / scale;
  Eigen::VectorXd v = P.col(largest_column(P)).normalized();
  for (int k = 0; k < options.max_squarings; ++k) {
    P = P * P;
    const double m = P.cwiseAbs().maxCoeff();
    if (!(m > 0.0) || !std::isfinite(m)) break;
    P /= m;
    Eigen::VectorXd next = P.col(largest_column(P)).normalized();
    const double change = unit_angle_sin(v, next);
    v = std::move(next);
    if (change < options.tol) break;
  }

  SingularPair out;
  for (int it = 1; it <= options.max_iter; ++it) {
    Eigen::VectorXd w = G * v;
    const double norm = w.norm();
    out.iterations = it;
    if (!(norm > 0.0)) break;  // v in the null space; keep the iterate
    w /= norm;
    const double change = unit_angle_sin(v, w);
    v = std::move(w);
    if (change < options.tol) {
      out.converged = true;
      break;
    }
  }
  fix_sign(v);
  out.value = std::sqrt(std::max(0.0, v.dot(G * v)));
  out.vector = std::move(v);
  return out;
}

SingularPair leading_left_singular(const Eigen::MatrixXd& M, const PowerOptions& options) {
  if (M.size() == 0) throw std::invalid_argument("leading_left_singular: empty matrix");
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(M.rows(), M.rows());
  G.selfadjointView<Eigen::Lower>().rankUpdate(M);
  G.triangularView<Eigen::StrictlyUpper>() = G.transpose();
  return leading_eigvec_gram(G, options);
}

double effective_r(const ArwParams& params) {
  if (const auto* s = std::get_if<LogAdjustedStrength>(&params.strength)) return s->r;
  const Calibration cal = calibrate(params);
  const double p = static_cast<double>(params.p);
  return std::pow(cal.tau, 4.0) * std::pow(p, params.theta) / (4.0 * std::log(p));
}

double q_star(double theta, double beta, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("q_star: r must be positive");
  const double g = beta - theta / 2.0;
  if (r < g / 3.0) return 4.0 * r;
  return (g + r) * (g + r) / (4.0 * r);
}

double q_tilde(double theta, double beta, double r) {
  if (beta < 1.0 - theta) {
    const double t = std::sqrt(1.0 - beta - theta) + std::sqrt(r);
    return std::max(1.0 - theta, t * t);
  }
  return 1.0 - theta;
}

SpectralPrediction predict_selection(const ArwParams& params, double q, const PredictOptions& options) {
  if (!(q > 0.0)) throw std::invalid_argument("predict_selection: q must be positive");
  const Calibration cal = calibrate(params);
  const double p = static_cast<double>(params.p);
  const double n = static_cast<double>(cal.n);
  const double lp = std::log(p);

  SpectralPrediction out;
  out.cut = n + 2.0 * std::sqrt(q * n * lp);
  out.pi0 = chisq_sf(out.cut, cal.n);
  const double lambda = n * cal.tau * cal.tau;
  out.pi1 = noncentral_chisq_sf(out.cut, cal.n, lambda);
  out.pi1_normal_approx = std_normal_sf(std::sqrt(2.0 * q * lp) - lambda / std::sqrt(2.0 * n));

  const double r = effective_r(params);
  out.expected_signals = options.null_model ? 0.0 : cal.expected_signals(params.p);
  out.m_q = (p - out.expected_signals) * out.pi0 + out.expected_signals * out.pi1;
  out.q_tilde = options.null_model ? 1.0 - params.theta : q_tilde(params.theta, params.beta, r);
  out.regime = q < out.q_tilde ? Regime::fat : Regime::skinny;

  const double half = options.C * std::sqrt(n * out.m_q * lp);
  const double center = out.regime == Regime::fat ? out.m_q : n;
  out.eigen_range = {center - half, center + half};
  return out;
}

}  // namespace rwclust
