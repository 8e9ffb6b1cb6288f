#include "dpalign/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "dpalign/warp.hpp"

namespace dpalign {

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_number(const std::string& text, double& value) {
  if (text.empty()) return false;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  return ec == std::errc() && ptr == end && std::isfinite(value);
}

}  // namespace

void Dataset::validate() const {
  const Eigen::Index n = y.cols();
  if (y.rows() < 1 || n < 2) throw std::invalid_argument("dataset: need J >= 1 and N >= 2");
  if (x.size() != n) throw std::invalid_argument("dataset: grid length differs from sequences");
  if (x[0] != -1.0 || x[n - 1] != 1.0) {
    throw std::invalid_argument("dataset: grid must start at -1 and end at 1");
  }
  const double step = 2.0 / static_cast<double>(n - 1);
  for (Eigen::Index i = 1; i < n; ++i) {
    if (!(x[i] > x[i - 1]) || std::abs((x[i] - x[i - 1]) - step) > 1e-9) {
      throw std::invalid_argument("dataset: grid must be strictly increasing and evenly spaced");
    }
  }
  if (!y.allFinite()) throw std::invalid_argument("dataset: observations must be finite");
  if (groups && static_cast<Eigen::Index>(groups->size()) != y.rows()) {
    throw std::invalid_argument("dataset: one group label per sequence required");
  }
}

Eigen::VectorXd even_grid(Eigen::Index n) {
  if (n < 2) throw std::invalid_argument("even_grid: need at least two points");
  Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(n, -1.0, 1.0);
  x[0] = -1.0;
  x[n - 1] = 1.0;
  return x;
}

void SyntheticConfig::validate() const {
  if (num_sequences < 2) throw std::invalid_argument("synthetic: need at least two sequences");
  if (length < 4) throw std::invalid_argument("synthetic: sequence length must be >= 4");
  if (!(warp_severity >= 0.0) || !std::isfinite(warp_severity)) {
    throw std::invalid_argument("synthetic: warp severity must be non-negative");
  }
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw std::invalid_argument("synthetic: noise std must be non-negative");
  }
  if (generators.empty()) throw std::invalid_argument("synthetic: need at least one generator");
  for (const auto& g : generators) (void)base_function(g, 0.0);
}

double base_function(const std::string& name, double x) {
  if (name == "sinc") {
    if (x == 0.0) return 1.0;
    const double px = std::numbers::pi * x;
    return std::sin(px) / px;
  }
  if (name == "cubic") return x * x * x;
  throw std::invalid_argument("unknown base function '" + name + "'");
}

Dataset generate_synthetic(const SyntheticConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const int j_count = cfg.num_sequences;
  const int n = cfg.length;
  const auto g_count = static_cast<int>(cfg.generators.size());

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> standard(0.0, 1.0);

  Dataset data;
  data.x = even_grid(n);
  data.y.resize(j_count, n);
  data.groups = std::vector<int>(static_cast<std::size_t>(j_count));
  data.name = "synthetic";
  for (int j = 0; j < j_count; ++j) {
    const int group = j * g_count / j_count;
    (*data.groups)[static_cast<std::size_t>(j)] = group;
    Eigen::VectorXd u(n);
    for (int k = 0; k < n; ++k) u[k] = cfg.warp_severity * standard(rng);
    const Eigen::VectorXd warped = warp_from_aux(u);
    for (int k = 0; k < n; ++k) {
      data.y(j, k) = base_function(cfg.generators[static_cast<std::size_t>(group)], warped[k]) +
                     cfg.noise_std * standard(rng);
    }
  }
  return data;
}

ParseError::ParseError(std::size_t row, std::size_t column, const std::string& message)
    : std::runtime_error("parse error at row " + std::to_string(row) +
                         (column > 0 ? ", column " + std::to_string(column) : std::string()) +
                         ": " + message),
      row_(row),
      column_(column) {}

Dataset parse_csv(std::istream& in, const std::string& name) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto cells = split_row(line);
    for (auto& c : cells) c = trim(c);
    rows.push_back(std::move(cells));
    line_numbers.push_back(line_no);
  }
  if (rows.empty()) throw ParseError(1, 0, "file contains no data rows");

  // A header is any first row with a non-numeric cell.
  bool has_header = false;
  for (const auto& cell : rows.front()) {
    double v = 0.0;
    if (!parse_number(cell, v)) has_header = true;
  }
  bool has_groups = false;
  std::size_t first = 0;
  if (has_header) {
    std::string last = rows.front().back();
    std::transform(last.begin(), last.end(), last.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    has_groups = last == "group";
    first = 1;
  }
  if (rows.size() <= first) throw ParseError(line_numbers.back(), 0, "file contains no data rows");

  const std::size_t width = rows[first].size();
  if (has_header && rows.front().size() != width) {
    throw ParseError(line_numbers[first], 0,
                     "row has " + std::to_string(width) + " cells but the header has " +
                         std::to_string(rows.front().size()));
  }
  const std::size_t n = has_groups ? width - 1 : width;
  if (n < 2) throw ParseError(line_numbers[first], 0, "sequences need at least two samples");

  Dataset data;
  data.name = name;
  data.y.resize(static_cast<Eigen::Index>(rows.size() - first), static_cast<Eigen::Index>(n));
  std::vector<int> groups;
  for (std::size_t r = first; r < rows.size(); ++r) {
    const auto& cells = rows[r];
    if (cells.size() != width) {
      throw ParseError(line_numbers[r], 0,
                       "expected " + std::to_string(width) + " cells, found " +
                           std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < n; ++c) {
      double v = 0.0;
      if (!parse_number(cells[c], v)) {
        throw ParseError(line_numbers[r], c + 1, "non-numeric cell '" + cells[c] + "'");
      }
      data.y(static_cast<Eigen::Index>(r - first), static_cast<Eigen::Index>(c)) = v;
    }
    if (has_groups) {
      int label = 0;
      const std::string& cell = cells[n];
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), label);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || label < 0) {
        throw ParseError(line_numbers[r], n + 1, "group label must be a non-negative integer");
      }
      groups.push_back(label);
    }
  }
  data.x = even_grid(static_cast<Eigen::Index>(n));
  if (has_groups) data.groups = std::move(groups);
  data.validate();
  return data;
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  return parse_csv(in, path.stem().string());
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

void write_csv(const Dataset& data, std::ostream& out) {
  const Eigen::Index n = data.length();
  for (Eigen::Index k = 0; k < n; ++k) out << (k ? "," : "") << "t" << k;
  if (data.groups) out << ",group";
  out << '\n';
  for (Eigen::Index j = 0; j < data.num_sequences(); ++j) {
    for (Eigen::Index k = 0; k < n; ++k) out << (k ? "," : "") << format_double(data.y(j, k));
    if (data.groups) out << ',' << (*data.groups)[static_cast<std::size_t>(j)];
    out << '\n';
  }
}

}  // namespace dpalign
