#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "rwclust/arw_model.hpp"

namespace rwclust {

struct LabeledMatrix {
  Eigen::MatrixXd X;  // rows = samples
  std::vector<std::string> class_labels;
  std::vector<std::string> feature_names;
};

/// Exactly two distinct labels; throws std::invalid_argument otherwise.
void validate(const LabeledMatrix& data);

/// Maps the two class names to -1 / +1 (lexicographically smaller name -> -1).
Labels encode_classes(const std::vector<std::string>& class_labels);

/// Reads a CSV whose header holds feature names and whose rows are samples.
/// Labels come either from `label_column` inside the data file or from a
/// separate file with one label per line (an extra first line is a header).
LabeledMatrix load_labeled_matrix(const std::filesystem::path& data_csv,
                                  const std::optional<std::filesystem::path>& label_file,
                                  const std::optional<std::string>& label_column);

struct Normalized {
  Eigen::MatrixXd X;
  IndexSet kept;  // original column of each output column
  std::vector<std::string> warnings;
};

/// x*(i) = 0.6745 (x(i) - mean) / MAD per column, MAD about the median.
/// Columns with zero MAD are dropped with a warning.
Normalized mad_normalize(const Eigen::MatrixXd& X);

struct FixedQ {
  double q;
};
struct FdrLevel {
  double level;
};
struct QSweep {
  double lo;
  double hi;
  double step;
};
struct TopK {
  std::size_t k;
};
struct AllFeatures {};

using QMode = std::variant<FixedQ, FdrLevel, QSweep, TopK, AllFeatures>;

struct PipelineOptions {
  // Screen on (2n)^-1 |.| rather than (2n)^-1/2 |.|.
  bool literal_scaling = false;
};

struct IfpcaRow {
  std::string mode;
  double q = 0.0;  // NaN outside the q-threshold modes
  double threshold = 0.0;
  std::size_t selected = 0;
  std::size_t errors = 0;
  bool fallback = false;
  Eigen::VectorXd leading;
  Labels labels;
};

struct IfpcaReport {
  std::size_t n = 0;
  std::size_t p = 0;  // after normalization
  std::vector<std::string> warnings;
  std::vector<IfpcaRow> rows;
};

/// Two-sided screening statistic |Q(j)| (or its literal variant).
Eigen::VectorXd two_sided_scores(const Eigen::MatrixXd& X, bool literal_scaling = false);

/// Permutation-minimized mismatch count.
std::size_t clustering_errors(const Labels& est, const Labels& truth);

/// MAD-normalizes, screens, and clusters the leading left singular vector
/// of the kept columns with 1-D 2-means.
IfpcaReport ifpca_pipeline(const LabeledMatrix& data, const QMode& mode, const PipelineOptions& options = {});

struct BaselineResult {
  double mean_errors = 0.0;
  std::size_t best_objective_errors = 0;
};

/// Lloyd's 2-means on the rows, `restarts` random initializations.
BaselineResult baseline_kmeans(const Eigen::MatrixXd& X, const Labels& truth, int restarts, std::uint64_t seed);

nlohmann::json to_json(const IfpcaReport& report);

}  // namespace rwclust
