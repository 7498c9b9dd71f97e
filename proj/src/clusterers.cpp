#include "rwclust/clusterers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rwclust/random.hpp"

namespace rwclust {

namespace {

struct SubsetSolution {
  IndexSet columns;
  std::vector<int> signs;
  double objective = -1.0;
};

void check_N(const Eigen::MatrixXd& X, std::size_t N) {
  if (N < 1 || N > static_cast<std::size_t>(X.cols())) {
    throw std::invalid_argument("sparse aggregation: need 1 <= N <= p");
  }
}

// Lexicographic DFS over N-subsets (and sign patterns when `signed_search`).
// The first sign of each subset is fixed to +1: flipping every sign leaves
// ||X mu||_1 unchanged.
class ExactSearch {
 public:
  ExactSearch(const Eigen::MatrixXd& X, std::size_t N, bool signed_search)
      : X_(X), N_(N), signed_(signed_search), sum_(Eigen::VectorXd::Zero(X.rows())) {}

  SubsetSolution run() {
    cols_.reserve(N_);
    signs_.reserve(N_);
    visit(0);
    return best_;
  }

 private:
  void visit(std::size_t start) {
    if (cols_.size() == N_) {
      const double obj = sum_.lpNorm<1>();
      if (obj > best_.objective) best_ = {cols_, signs_, obj};
      return;
    }
    const std::size_t p = static_cast<std::size_t>(X_.cols());
    for (std::size_t j = start; j + (N_ - cols_.size()) <= p; ++j) {
      const bool only_plus = !signed_ || cols_.empty();
      for (int s : {1, -1}) {
        if (s == -1 && only_plus) break;
        cols_.push_back(j);
        signs_.push_back(s);
        sum_ += s * X_.col(static_cast<Eigen::Index>(j));
        visit(j + 1);
        sum_ -= s * X_.col(static_cast<Eigen::Index>(j));
        cols_.pop_back();
        signs_.pop_back();
      }
    }
  }

  const Eigen::MatrixXd& X_;
  std::size_t N_;
  bool signed_;
  Eigen::VectorXd sum_;
  IndexSet cols_;
  std::vector<int> signs_;
  SubsetSolution best_;
};

class LocalSearch {
 public:
  LocalSearch(const Eigen::MatrixXd& X, std::size_t N, bool signed_search)
      : X_(X), N_(N), signed_(signed_search), p_(static_cast<std::size_t>(X.cols())) {}

  SubsetSolution run(std::optional<std::size_t> first) {
    in_set_.assign(p_, false);
    sign_of_.assign(p_, 0);
    sum_ = Eigen::VectorXd::Zero(X_.rows());
    if (first) add(*first, 1);
    while (count_ < N_) forward_step();
    while (swap_step()) {
    }
    SubsetSolution sol;
    for (std::size_t j = 0; j < p_; ++j) {
      if (in_set_[j]) {
        sol.columns.push_back(j);
        sol.signs.push_back(sign_of_[j]);
      }
    }
    sol.objective = sum_.lpNorm<1>();
    return sol;
  }

 private:
  auto col(std::size_t j) const { return X_.col(static_cast<Eigen::Index>(j)); }

  void add(std::size_t j, int s) {
    in_set_[j] = true;
    sign_of_[j] = s;
    sum_ += s * col(j);
    ++count_;
  }

  void remove(std::size_t j) {
    sum_ -= sign_of_[j] * col(j);
    in_set_[j] = false;
    sign_of_[j] = 0;
    --count_;
  }

  void forward_step() {
    double best = -1.0;
    std::size_t best_j = 0;
    int best_s = 1;
    for (std::size_t j = 0; j < p_; ++j) {
      if (in_set_[j]) continue;
      for (int s : {1, -1}) {
        if (s == -1 && !signed_) break;
        const double obj = (sum_ + s * col(j)).lpNorm<1>();
        if (obj > best) {
          best = obj;
          best_j = j;
          best_s = s;
        }
      }
    }
    add(best_j, best_s);
  }

  // One best-improvement move; false at a local optimum.
  bool swap_step() {
    const double current = sum_.lpNorm<1>();
    const double slack = 1e-12 * std::max(1.0, current);
    double best = current + slack;
    std::size_t best_out = p_, best_in = p_;
    int best_s = 1;
    Eigen::VectorXd base(sum_.size());
    for (std::size_t i = 0; i < p_; ++i) {
      if (!in_set_[i]) continue;
      base = sum_ - sign_of_[i] * col(i);
      if (signed_) {
        const double flipped = (base - sign_of_[i] * col(i)).lpNorm<1>();
        if (flipped > best) {
          best = flipped;
          best_out = i;
          best_in = i;
          best_s = -sign_of_[i];
        }
      }
      for (std::size_t j = 0; j < p_; ++j) {
        if (in_set_[j]) continue;
        for (int s : {1, -1}) {
          if (s == -1 && !signed_) break;
          const double obj = (base + s * col(j)).lpNorm<1>();
          if (obj > best) {
            best = obj;
            best_out = i;
            best_in = j;
            best_s = s;
          }
        }
      }
    }
    if (best_out == p_) return false;
    remove(best_out);
    add(best_in, best_s);
    return true;
  }

  const Eigen::MatrixXd& X_;
  std::size_t N_;
  bool signed_;
  std::size_t p_;
  std::vector<bool> in_set_;
  std::vector<int> sign_of_;
  std::size_t count_ = 0;
  Eigen::VectorXd sum_;
};

SubsetSolution greedy_solve(const Eigen::MatrixXd& X, std::size_t N, bool signed_search, const GreedyOptions& options) {
  const std::size_t p = static_cast<std::size_t>(X.cols());
  SubsetSolution best;
  const int restarts = std::max(1, options.restarts);
  for (int r = 0; r < restarts; ++r) {
    std::optional<std::size_t> first;
    if (r > 0) {
      Rng rng(derive_seed(options.seed, StreamTag::greedy_restart, static_cast<std::uint64_t>(r)));
      first = static_cast<std::size_t>(rng() % p);
    }
    SubsetSolution sol = LocalSearch(X, N, signed_search).run(first);
    if (sol.objective > best.objective) best = std::move(sol);
  }
  return best;
}

ClusterResult from_solution(const Eigen::MatrixXd& X, SubsetSolution sol, Method method, bool keep_signs) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(X.rows());
  for (std::size_t k = 0; k < sol.columns.size(); ++k) {
    sum += sol.signs[k] * X.col(static_cast<Eigen::Index>(sol.columns[k]));
  }
  ClusterResult out;
  out.labels = sign_labels(sum);
  out.method = method;
  out.objective = sol.objective;
  out.selected = std::move(sol.columns);
  if (keep_signs) out.signs = std::move(sol.signs);
  return out;
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::simple_agg: return "simple_agg";
    case Method::sparse_agg: return "sparse_agg";
    case Method::classical_pca: return "classical_pca";
    case Method::if_pca: return "if_pca";
    case Method::signed_sparse_agg: return "signed_sparse_agg";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  for (Method m : {Method::simple_agg, Method::sparse_agg, Method::classical_pca, Method::if_pca,
                   Method::signed_sparse_agg}) {
    if (to_string(m) == name) return m;
  }
  throw std::invalid_argument("unknown clustering method: " + name);
}

Labels sign_labels(const Eigen::VectorXd& v) {
  Labels out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = v(i) < 0.0 ? -1 : 1;
  return out;
}

std::uint64_t binomial(std::size_t p, std::size_t N) {
  if (N > p) return 0;
  N = std::min(N, p - N);
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t c = 1;
  for (std::size_t k = 1; k <= N; ++k) {
    // c * (p - N + k) / k stays integral at every step.
    const std::uint64_t num = p - N + k;
    const std::uint64_t g = std::gcd(c, static_cast<std::uint64_t>(k));
    const std::uint64_t c_red = c / g;
    const std::uint64_t k_red = k / g;
    const std::uint64_t num_red = num / k_red;  // k_red divides num after reducing c
    if (c_red > kMax / num_red) return kMax;
    c = c_red * num_red;
  }
  return c;
}

ClusterResult simple_aggregation(const Eigen::MatrixXd& X) {
  ClusterResult out;
  out.method = Method::simple_agg;
  const Eigen::VectorXd sums = X.rowwise().sum();
  out.labels = sign_labels(sums);
  out.objective = sums.lpNorm<1>();
  return out;
}

ClusterResult sparse_aggregation_exact(const Eigen::MatrixXd& X, std::size_t N, std::uint64_t budget) {
  check_N(X, N);
  const std::uint64_t count = binomial(static_cast<std::size_t>(X.cols()), N);
  if (count > budget) {
    throw BudgetExceeded("exact sparse aggregation needs C(p,N) = " + std::to_string(count) +
                         " subsets, over the budget of " + std::to_string(budget) + "; use the greedy solver");
  }
  return from_solution(X, ExactSearch(X, N, false).run(), Method::sparse_agg, false);
}

ClusterResult sparse_aggregation_greedy(const Eigen::MatrixXd& X, std::size_t N, const GreedyOptions& options) {
  check_N(X, N);
  return from_solution(X, greedy_solve(X, N, false, options), Method::sparse_agg, false);
}

ClusterResult classical_pca(const Eigen::MatrixXd& X, const PowerOptions& power) {
  ClusterResult out;
  out.method = Method::classical_pca;
  out.singular = leading_left_singular(X, power);
  out.labels = sign_labels(out.singular->vector);
  return out;
}

ClusterResult if_pca(const Eigen::MatrixXd& X, double q, const PowerOptions& power) {
  const ScreenResult screen = select_features(chi2_scores(X), static_cast<std::size_t>(X.cols()), q);
  ClusterResult out;
  if (screen.selected.empty()) {
    out = classical_pca(X, power);
    out.fallback_used = true;
  } else {
    out.singular = leading_left_singular(select_columns(X, screen.selected), power);
    out.labels = sign_labels(out.singular->vector);
  }
  out.method = Method::if_pca;
  out.selected = screen.selected;
  return out;
}

ClusterResult signed_sparse_aggregation(const Eigen::MatrixXd& X, std::size_t N, const SignedOptions& options) {
  check_N(X, N);
  const std::uint64_t subsets = binomial(static_cast<std::size_t>(X.cols()), N);
  const double patterns = static_cast<double>(subsets) * std::ldexp(1.0, static_cast<int>(std::min<std::size_t>(N, 1100)));
  if (patterns <= static_cast<double>(options.budget)) {
    return from_solution(X, ExactSearch(X, N, true).run(), Method::signed_sparse_agg, true);
  }
  if (!options.allow_greedy) {
    throw BudgetExceeded("exact signed sparse aggregation needs 2^N C(p,N) patterns, over the budget of " +
                         std::to_string(options.budget) + "; enable the greedy solver");
  }
  return from_solution(X, greedy_solve(X, N, true, options.greedy), Method::signed_sparse_agg, true);
}

Labels kmeans_1d_two(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) throw std::invalid_argument("kmeans_1d_two: need at least two values");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::vector<double> prefix(n + 1, 0.0), prefix_sq(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double v = values[order[k]];
    prefix[k + 1] = prefix[k] + v;
    prefix_sq[k + 1] = prefix_sq[k] + v * v;
  }
  auto sse = [&](std::size_t lo, std::size_t hi) {
    const double m = static_cast<double>(hi - lo);
    const double s = prefix[hi] - prefix[lo];
    return std::max(0.0, prefix_sq[hi] - prefix_sq[lo] - s * s / m);
  };

  std::size_t best_k = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < n; ++k) {
    if (values[order[k - 1]] == values[order[k]]) continue;
    const double cost = sse(0, k) + sse(k, n);
    if (cost < best) {
      best = cost;
      best_k = k;
    }
  }
  Labels labels(n, 1);
  for (std::size_t k = 0; k < best_k; ++k) labels[order[k]] = -1;
  return labels;
}

}  // namespace rwclust
