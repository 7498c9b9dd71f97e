#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rwclust/arw_model.hpp"
#include "rwclust/global_tests.hpp"
#include "rwclust/metrics.hpp"
#include "rwclust/phase_geometry.hpp"

namespace rwclust {

// Method identifiers accepted by run_trial:
//   clustering  simple_agg sparse_agg classical_pca if_pca signed_sparse_agg
//   recovery    sa_star if_star sa_N if_q signed_if
//   tests       agg_chi2 sparse_agg_l1 higher_criticism
//   pipelines   cluster_then_recover recover_then_cluster
enum class MethodFamily { clustering, recovery, test, pipeline };

MethodFamily method_family(const std::string& id);

struct MethodSpec {
  std::string id;
  std::optional<double> q;             // default: q* for an r calibration, else 3
  std::optional<std::size_t> N;        // default: ceil(p epsilon)
  std::string solver = "auto";         // exact | greedy | auto (exact when within budget)
  std::uint64_t budget = 2'000'000;
  int restarts = 8;
};

/// White noise, or a diagonal right factor drawn by make_diagonal_coloring.
struct NoiseConfig {
  enum class Kind { white, diagonal };
  Kind kind = Kind::white;
  std::uint64_t coloring_seed = 0;

  NoiseSpec materialize(std::size_t p) const;
};

struct TrialSpec {
  ArwParams params;
  NoiseConfig noise;
  std::vector<MethodSpec> methods;
  std::uint64_t seed = 0;
  bool null_signal = false;  // mu = 0 (labels still drawn)
};

struct MethodOutcome {
  std::string id;
  std::optional<std::string> error;
  std::optional<double> clustering_hamming;
  std::optional<double> recovery_hamming;
  std::optional<double> recovery_hamming_realized;
  std::optional<double> signed_hamming;
  std::optional<double> cosine;
  std::optional<std::size_t> selected_count;
  bool fallback_used = false;
  // Tests run on the data (alt) and on the paired pure-noise data (null).
  std::optional<TestOutcome> test_alt;
  std::optional<TestOutcome> test_null;
};

struct TrialRecord {
  std::string spec_hash;
  TrialSpec spec;
  std::size_t n = 0;
  std::size_t realized_signals = 0;
  std::vector<MethodOutcome> outcomes;
  double wall_seconds = 0.0;

  bool has_errors() const;
};

/// Generates one dataset and evaluates every requested method. Method
/// failures are recorded in the outcome and do not stop the others.
TrialRecord run_trial(const TrialSpec& spec);

std::string spec_hash(const TrialSpec& spec);

nlohmann::json to_json(const MethodSpec& m);
MethodSpec method_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrialSpec& spec);
TrialSpec trial_spec_from_json(const nlohmann::json& j);
/// Record without wall time; wall time lives under "metadata" when persisted.
nlohmann::json to_json(const TrialRecord& rec);
TrialRecord trial_record_from_json(const nlohmann::json& j);

void persist_record(const TrialRecord& rec, const std::filesystem::path& path);
TrialRecord load_record(const std::filesystem::path& path);

/// Parses a JSON file; syntax errors report the file, line and column.
nlohmann::json read_json_file(const std::filesystem::path& path);

enum class StrengthAxis { alpha, r, alpha_relative };

struct SweepSpec {
  std::size_t p = 5000;
  double theta = 0.5;
  double sign_mix_a = 0.0;
  std::vector<double> betas;
  StrengthAxis axis = StrengthAxis::alpha;
  // alpha values, r values, or multipliers of the reference boundary.
  std::vector<double> strengths;
  Problem relative_problem = Problem::clustering;
  BoundKind relative_kind = BoundKind::statistical;
  std::size_t reps = 20;
  std::vector<MethodSpec> methods;
  std::optional<std::string> designated;
  NoiseConfig noise;
  std::uint64_t seed = 1;
  std::size_t max_trials = 200'000;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  Interval ci;  // normal interval on the mean
};

struct MethodCellSummary {
  std::string id;
  std::size_t errors = 0;
  std::optional<Summary> clustering_hamming;
  std::optional<Summary> recovery_hamming;
  std::optional<Summary> signed_hamming;
  std::optional<Summary> cosine;
  std::optional<Summary> selected_count;
  std::size_t fallbacks = 0;
  std::optional<TestError> test_error;
};

struct CellResult {
  std::size_t index = 0;
  double beta = 0.0;
  double strength = 0.0;  // the grid value
  double alpha = 0.0;     // -log(tau)/log(p)
  ArwParams params;
  std::vector<std::pair<std::string, std::string>> regions;  // "problem/kind" -> region
  std::vector<MethodCellSummary> methods;
  std::size_t failed_trials = 0;
  double wall_seconds = 0.0;
};

struct SweepResult {
  SweepSpec spec;
  std::vector<CellResult> cells;
  std::string timestamp;
  double wall_seconds = 0.0;
  unsigned threads_used = 1;

  bool has_failures() const;
  const MethodCellSummary* find(std::size_t cell, const std::string& id) const;
};

/// Cell parameters for (beta, strength) under the sweep's axis.
ArwParams cell_params(const SweepSpec& sweep, double beta, double strength);

/// Seed of one trial. Depends only on the master seed, the cell coordinates
/// and the repetition, so growing a grid leaves existing trials unchanged.
std::uint64_t trial_seed(std::uint64_t master, double beta, double strength, std::size_t rep);

/// Runs every (cell, rep) trial on a thread pool and aggregates in cell order.
/// Throws std::invalid_argument when the sweep is malformed or over max_trials.
SweepResult run_sweep(const SweepSpec& sweep);

nlohmann::json to_json(const SweepSpec& s);
SweepSpec sweep_spec_from_json(const nlohmann::json& j);

/// {metadata, spec, cells}. deterministic_dump() drops metadata.
nlohmann::json to_json(const SweepResult& r);
std::string deterministic_dump(const SweepResult& r);

/// One summary row per cell.
void write_sweep_csv(const SweepResult& r, const std::filesystem::path& path);
void persist_sweep(const SweepResult& r, const std::filesystem::path& path);

}  // namespace rwclust
