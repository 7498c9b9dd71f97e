#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rwclust/arw_model.hpp"

namespace rwclust {

/// Malformed input file. what() carries the file, line and field.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

nlohmann::json to_json(const ArwParams& params);
ArwParams params_from_json(const nlohmann::json& j);

/// Matrix CSV: one row per sample, no header.
void write_matrix_csv(const Eigen::MatrixXd& X, const std::filesystem::path& path);
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

/// Writes <stem>.csv (the matrix) and <stem>.json ({seed, params, labels, support}).
void save_dataset(const Dataset& ds, const std::filesystem::path& stem);
Dataset load_dataset(const std::filesystem::path& stem);

/// Splits one CSV line on commas; double quotes protect embedded commas.
std::vector<std::string> split_csv_line(const std::string& line);

/// Parses a double, throwing ParseError naming the location on failure.
double parse_double_field(const std::string& text, const std::string& where);

}  // namespace rwclust
