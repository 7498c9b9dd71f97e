#include "rwclust/applied_ifpca.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <numeric>
#include <set>

#include "rwclust/clusterers.hpp"
#include "rwclust/dataset_io.hpp"
#include "rwclust/numerics.hpp"
#include "rwclust/random.hpp"
#include "rwclust/spectral.hpp"

namespace rwclust {

namespace {

double median_of(std::vector<double> v) {
  const std::size_t h = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h), v.end());
  const double upper = v[h];
  if (v.size() % 2) return upper;
  return 0.5 * (*std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h)) + upper);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

IfpcaRow cluster_columns(const Eigen::MatrixXd& X, const IndexSet& cols, const Labels& truth) {
  IfpcaRow row;
  row.selected = cols.size();
  SingularPair sp;
  if (cols.empty()) {
    sp = leading_left_singular(X);
    row.fallback = true;
  } else {
    sp = leading_left_singular(select_columns(X, cols));
  }
  row.leading = sp.vector;
  row.labels = kmeans_1d_two(std::span<const double>(sp.vector.data(), static_cast<std::size_t>(sp.vector.size())));
  row.errors = clustering_errors(row.labels, truth);
  return row;
}

IndexSet above(const Eigen::VectorXd& scores, double t) {
  IndexSet out;
  for (Eigen::Index j = 0; j < scores.size(); ++j) {
    if (scores(j) >= t) out.push_back(static_cast<std::size_t>(j));
  }
  return out;
}

// Indices of the k largest scores; equal scores keep column order.
IndexSet top_k(const Eigen::VectorXd& scores, std::size_t k) {
  std::vector<std::size_t> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores(static_cast<Eigen::Index>(a)) > scores(static_cast<Eigen::Index>(b));
  });
  order.resize(std::min(k, order.size()));
  std::sort(order.begin(), order.end());
  return order;
}

double screen_threshold(double q, std::size_t p) { return std::sqrt(2.0 * q * std::log(static_cast<double>(p))); }

}  // namespace

void validate(const LabeledMatrix& data) {
  if (data.class_labels.size() != static_cast<std::size_t>(data.X.rows())) {
    throw std::invalid_argument("label count does not match the number of samples");
  }
  const std::set<std::string> distinct(data.class_labels.begin(), data.class_labels.end());
  if (distinct.size() != 2) {
    throw std::invalid_argument("expected exactly two class labels, found " + std::to_string(distinct.size()));
  }
  if (!data.feature_names.empty() && data.feature_names.size() != static_cast<std::size_t>(data.X.cols())) {
    throw std::invalid_argument("feature name count does not match the number of columns");
  }
}

Labels encode_classes(const std::vector<std::string>& class_labels) {
  const std::set<std::string> distinct(class_labels.begin(), class_labels.end());
  if (distinct.size() != 2) throw std::invalid_argument("expected exactly two class labels");
  const std::string& low = *distinct.begin();
  Labels out;
  out.reserve(class_labels.size());
  for (const auto& c : class_labels) out.push_back(c == low ? -1 : 1);
  return out;
}

LabeledMatrix load_labeled_matrix(const std::filesystem::path& data_csv,
                                  const std::optional<std::filesystem::path>& label_file,
                                  const std::optional<std::string>& label_column) {
  if (label_file.has_value() == label_column.has_value()) {
    throw std::invalid_argument("give exactly one of a label file or a label column");
  }
  std::ifstream in(data_csv);
  if (!in) throw ParseError("cannot open " + data_csv.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(data_csv.string() + ": empty file");
  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = trim(h);

  std::optional<std::size_t> label_idx;
  if (label_column) {
    const auto it = std::find(header.begin(), header.end(), *label_column);
    if (it == header.end()) throw ParseError(data_csv.string() + ": no column named '" + *label_column + "'");
    label_idx = static_cast<std::size_t>(it - header.begin());
  }

  LabeledMatrix out;
  for (std::size_t f = 0; f < header.size(); ++f) {
    if (!label_idx || f != *label_idx) out.feature_names.push_back(header[f]);
  }
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw ParseError(data_csv.string() + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(out.feature_names.size());
    for (std::size_t f = 0; f < fields.size(); ++f) {
      if (label_idx && f == *label_idx) {
        out.class_labels.push_back(trim(fields[f]));
        continue;
      }
      row.push_back(parse_double_field(fields[f], data_csv.string() + ":" + std::to_string(lineno) + " field " +
                                                      std::to_string(f + 1) + " (" + header[f] + ")"));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(data_csv.string() + ": no samples");

  out.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(out.feature_names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      out.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }

  if (label_file) {
    std::ifstream lin(*label_file);
    if (!lin) throw ParseError("cannot open " + label_file->string());
    std::vector<std::string> labels;
    while (std::getline(lin, line)) {
      const std::string t = trim(split_csv_line(line).front());
      if (!t.empty()) labels.push_back(t);
    }
    if (labels.size() == rows.size() + 1) labels.erase(labels.begin());
    if (labels.size() != rows.size()) {
      throw ParseError(label_file->string() + ": " + std::to_string(labels.size()) + " labels for " +
                       std::to_string(rows.size()) + " samples");
    }
    out.class_labels = std::move(labels);
  }
  validate(out);
  return out;
}

Normalized mad_normalize(const Eigen::MatrixXd& X) {
  Normalized out;
  std::vector<Eigen::VectorXd> cols;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const Eigen::VectorXd x = X.col(j);
    std::vector<double> v(x.data(), x.data() + x.size());
    const double med = median_of(v);
    for (auto& e : v) e = std::abs(e - med);
    const double mad = median_of(std::move(v));
    if (!(mad > 0.0)) {
      out.warnings.push_back("column " + std::to_string(j) + " has zero MAD and was dropped");
      continue;
    }
    cols.push_back(0.6745 * (x.array() - x.mean()) / mad);
    out.kept.push_back(static_cast<std::size_t>(j));
  }
  out.X.resize(X.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.X.col(static_cast<Eigen::Index>(k)) = cols[k];
  return out;
}

Eigen::VectorXd two_sided_scores(const Eigen::MatrixXd& X, bool literal_scaling) {
  const double n = static_cast<double>(X.rows());
  const double scale = literal_scaling ? 2.0 * n : std::sqrt(2.0 * n);
  return ((X.colwise().squaredNorm().array() - n).abs() / scale).transpose();
}

std::size_t clustering_errors(const Labels& est, const Labels& truth) {
  if (est.size() != truth.size()) throw std::invalid_argument("clustering_errors: length mismatch");
  std::size_t mismatch = 0;
  for (std::size_t i = 0; i < est.size(); ++i) mismatch += est[i] != truth[i];
  return std::min(mismatch, est.size() - mismatch);
}

IfpcaReport ifpca_pipeline(const LabeledMatrix& data, const QMode& mode, const PipelineOptions& options) {
  validate(data);
  const Labels truth = encode_classes(data.class_labels);
  Normalized norm = mad_normalize(data.X);
  if (norm.X.cols() < 2) throw std::invalid_argument("fewer than two usable features after normalization");
  IfpcaReport report;
  report.n = static_cast<std::size_t>(norm.X.rows());
  report.p = static_cast<std::size_t>(norm.X.cols());
  report.warnings = norm.warnings;
  const Eigen::VectorXd scores = two_sided_scores(norm.X, options.literal_scaling);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  auto fixed_row = [&](double q) {
    const double t = screen_threshold(q, report.p);
    IfpcaRow row = cluster_columns(norm.X, above(scores, t), truth);
    row.mode = "fixed";
    row.q = q;
    row.threshold = t;
    return row;
  };

  if (const auto* m = std::get_if<FixedQ>(&mode)) {
    if (!(m->q > 0.0)) throw std::invalid_argument("q must be positive");
    report.rows.push_back(fixed_row(m->q));
  } else if (const auto* m = std::get_if<QSweep>(&mode)) {
    if (!(m->step > 0.0) || !(m->lo > 0.0) || m->hi < m->lo) throw std::invalid_argument("invalid q sweep range");
    std::vector<double> qs;
    for (std::size_t k = 0;; ++k) {
      const double q = m->lo + static_cast<double>(k) * m->step;
      if (q > m->hi + 1e-12 * m->step) break;
      qs.push_back(q);
    }
    std::vector<std::future<IfpcaRow>> jobs;
    for (double q : qs) jobs.push_back(std::async(std::launch::async, fixed_row, q));
    for (auto& j : jobs) {
      report.rows.push_back(j.get());
      report.rows.back().mode = "sweep";
    }
  } else if (const auto* m = std::get_if<FdrLevel>(&mode)) {
    // Two-sided null P-values from chi2_n, computed analytically.
    const double n = static_cast<double>(report.n);
    const double scale = options.literal_scaling ? 2.0 * n : std::sqrt(2.0 * n);
    std::vector<double> pv(report.p);
    for (std::size_t j = 0; j < report.p; ++j) {
      const double dev = scores(static_cast<Eigen::Index>(j)) * scale;
      const double lower = n - dev;
      pv[j] = std::min(1.0, chisq_sf(n + dev, report.n) + (lower > 0.0 ? chisq_cdf(lower, report.n).value() : 0.0));
    }
    const std::size_t k = bh_threshold(pv, m->level);
    std::vector<std::size_t> order(report.p);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pv[a] < pv[b]; });
    IndexSet cols(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(cols.begin(), cols.end());
    IfpcaRow row = cluster_columns(norm.X, cols, truth);
    row.mode = "fdr";
    row.q = nan;
    row.threshold = k ? scores(static_cast<Eigen::Index>(order[k - 1])) : nan;
    report.rows.push_back(std::move(row));
  } else if (const auto* m = std::get_if<TopK>(&mode)) {
    if (m->k == 0) throw std::invalid_argument("top-k needs k >= 1");
    const IndexSet cols = top_k(scores, m->k);
    IfpcaRow row = cluster_columns(norm.X, cols, truth);
    row.mode = "top_k";
    row.q = nan;
    double t = std::numeric_limits<double>::infinity();
    for (std::size_t j : cols) t = std::min(t, scores(static_cast<Eigen::Index>(j)));
    row.threshold = t;
    report.rows.push_back(std::move(row));
  } else {
    IndexSet all(report.p);
    std::iota(all.begin(), all.end(), 0);
    IfpcaRow row = cluster_columns(norm.X, all, truth);
    row.mode = "all";
    row.q = nan;
    row.threshold = nan;
    report.rows.push_back(std::move(row));
  }
  return report;
}

BaselineResult baseline_kmeans(const Eigen::MatrixXd& X, const Labels& truth, int restarts, std::uint64_t seed) {
  const Eigen::Index n = X.rows();
  if (n < 2) throw std::invalid_argument("baseline_kmeans: need at least two samples");
  if (restarts < 1) throw std::invalid_argument("baseline_kmeans: restarts must be positive");
  BaselineResult out;
  double best_obj = std::numeric_limits<double>::infinity();
  double total_errors = 0.0;
  for (int r = 0; r < restarts; ++r) {
    Rng rng(derive_seed(seed, StreamTag::kmeans, static_cast<std::uint64_t>(r)));
    const auto a = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n));
    auto b = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n - 1));
    if (b >= a) ++b;
    Eigen::MatrixXd centers(2, X.cols());
    centers.row(0) = X.row(a);
    centers.row(1) = X.row(b);
    std::vector<int> assign(static_cast<std::size_t>(n), -1);
    double obj = 0.0;
    for (int it = 0; it < 300; ++it) {
      bool changed = false;
      obj = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double d0 = (X.row(i) - centers.row(0)).squaredNorm();
        const double d1 = (X.row(i) - centers.row(1)).squaredNorm();
        const int c = d1 < d0 ? 1 : 0;
        obj += std::min(d0, d1);
        if (assign[static_cast<std::size_t>(i)] != c) {
          assign[static_cast<std::size_t>(i)] = c;
          changed = true;
        }
      }
      if (!changed) break;
      for (int c = 0; c < 2; ++c) {
        Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(X.cols());
        Eigen::Index count = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
          if (assign[static_cast<std::size_t>(i)] == c) {
            sum += X.row(i);
            ++count;
          }
        }
        if (count) {
          centers.row(c) = sum / static_cast<double>(count);
        } else {
          // Empty cluster: move it to the point farthest from the other center.
          Eigen::Index far = 0;
          (X.rowwise() - centers.row(1 - c)).rowwise().squaredNorm().maxCoeff(&far);
          centers.row(c) = X.row(far);
        }
      }
    }
    Labels est(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < est.size(); ++i) est[i] = assign[i] == 1 ? 1 : -1;
    const std::size_t errs = clustering_errors(est, truth);
    total_errors += static_cast<double>(errs);
    if (obj < best_obj) {
      best_obj = obj;
      out.best_objective_errors = errs;
    }
  }
  out.mean_errors = total_errors / restarts;
  return out;
}

nlohmann::json to_json(const IfpcaReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  auto finite_or_null = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  for (const auto& r : report.rows) {
    rows.push_back({{"mode", r.mode},
                    {"q", finite_or_null(r.q)},
                    {"threshold", finite_or_null(r.threshold)},
                    {"selected", r.selected},
                    {"errors", r.errors},
                    {"fallback", r.fallback},
                    {"labels", r.labels}});
  }
  return {{"n", report.n}, {"p", report.p}, {"warnings", report.warnings}, {"rows", std::move(rows)}};
}

}  // namespace rwclust
