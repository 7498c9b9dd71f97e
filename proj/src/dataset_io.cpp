#include "rwclust/dataset_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace rwclust {

namespace {

std::filesystem::path with_ext(const std::filesystem::path& stem, const char* ext) {
  std::filesystem::path p = stem;
  p += ext;
  return p;
}

std::string location(const std::filesystem::path& path, std::size_t line, std::size_t field) {
  std::ostringstream os;
  os << path.string() << ":" << line << " field " << field;
  return os.str();
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf.data(), ptr);
}

double parse_double_field(const std::string& text, const std::string& where) {
  std::size_t b = text.find_first_not_of(" \t\r");
  std::size_t e = text.find_last_not_of(" \t\r");
  if (b == std::string::npos) throw ParseError(where + ": empty numeric field");
  const char* first = text.data() + b;
  const char* last = text.data() + e + 1;
  if (*first == '+') ++first;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    throw ParseError(where + ": not a number: '" + text.substr(b, e - b + 1) + "'");
  }
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

nlohmann::json to_json(const ArwParams& params) {
  nlohmann::json j{{"p", params.p}, {"theta", params.theta}, {"beta", params.beta}, {"a", params.sign_mix_a}};
  if (const auto* s = std::get_if<PlainStrength>(&params.strength)) {
    j["alpha"] = s->alpha;
  } else {
    j["r"] = std::get<LogAdjustedStrength>(params.strength).r;
  }
  return j;
}

ArwParams params_from_json(const nlohmann::json& j) {
  ArwParams params;
  try {
    params.p = j.at("p").get<std::size_t>();
    params.theta = j.at("theta").get<double>();
    params.beta = j.at("beta").get<double>();
    params.sign_mix_a = j.value("a", 0.0);
    const bool has_alpha = j.contains("alpha");
    const bool has_r = j.contains("r");
    if (has_alpha == has_r) throw ParseError("params: exactly one of 'alpha' or 'r' is required");
    if (has_alpha) {
      params.strength = PlainStrength{j.at("alpha").get<double>()};
    } else {
      params.strength = LogAdjustedStrength{j.at("r").get<double>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("params: ") + e.what());
  }
  return params;
}

void write_matrix_csv(const Eigen::MatrixXd& X, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      if (j) out << ',';
      out << format_double(X(i, j));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_csv_line(line);
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t f = 0; f < fields.size(); ++f) {
      row.push_back(parse_double_field(fields[f], location(path, lineno, f + 1)));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(location(path, lineno, row.size()) + ": expected " + std::to_string(rows.front().size()) +
                       " fields");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path.string() + ": no data rows");
  Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return X;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& stem) {
  write_matrix_csv(ds.X, with_ext(stem, ".csv"));
  nlohmann::json side{{"seed", ds.seed}, {"n", ds.n()}, {"p", ds.p()}};
  if (ds.params) side["params"] = to_json(*ds.params);
  if (ds.labels) side["labels"] = *ds.labels;
  if (ds.support) side["support"] = *ds.support;
  if (ds.mu) {
    // Only the nonzero entries; the rest are zero by the support invariant.
    nlohmann::json values = nlohmann::json::array();
    for (std::size_t j : ds.support.value_or(IndexSet{})) values.push_back((*ds.mu)(static_cast<Eigen::Index>(j)));
    side["mu_values"] = std::move(values);
  }
  std::ofstream out(with_ext(stem, ".json"));
  if (!out) throw std::runtime_error("cannot write sidecar for " + stem.string());
  out << side.dump(2) << '\n';
}

Dataset load_dataset(const std::filesystem::path& stem) {
  Dataset ds;
  ds.X = read_matrix_csv(with_ext(stem, ".csv"));
  const auto side_path = with_ext(stem, ".json");
  std::ifstream in(side_path);
  if (!in) throw ParseError("cannot open " + side_path.string());
  nlohmann::json side;
  try {
    side = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(side_path.string() + ": " + e.what());
  }
  try {
    ds.seed = side.at("seed").get<std::uint64_t>();
    if (side.contains("params")) ds.params = params_from_json(side["params"]);
    if (side.contains("labels")) {
      Labels labels = side["labels"].get<Labels>();
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 1 && labels[i] != -1) {
          throw ParseError(side_path.string() + ": labels[" + std::to_string(i) + "] is not +-1");
        }
      }
      if (labels.size() != ds.n()) throw ParseError(side_path.string() + ": label count does not match matrix rows");
      ds.labels = std::move(labels);
    }
    if (side.contains("support")) {
      IndexSet support = side["support"].get<IndexSet>();
      for (std::size_t j : support) {
        if (j >= ds.p()) throw ParseError(side_path.string() + ": support index out of range");
      }
      if (side.contains("mu_values")) {
        const auto values = side["mu_values"].get<std::vector<double>>();
        if (values.size() != support.size()) throw ParseError(side_path.string() + ": mu_values length mismatch");
        Eigen::VectorXd mu = Eigen::VectorXd::Zero(ds.X.cols());
        for (std::size_t k = 0; k < support.size(); ++k) mu(static_cast<Eigen::Index>(support[k])) = values[k];
        ds.mu = std::move(mu);
      }
      ds.support = std::move(support);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(side_path.string() + ": " + e.what());
  }
  return ds;
}

}  // namespace rwclust
