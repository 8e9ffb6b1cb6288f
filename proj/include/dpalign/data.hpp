#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dpalign {

/// J sequences of length N observed on a shared, evenly spaced grid on [-1, 1].
struct Dataset {
  Eigen::VectorXd x;
  Eigen::MatrixXd y;  // J x N
  std::optional<std::vector<int>> groups;
  std::string name;

  Eigen::Index num_sequences() const { return y.rows(); }
  Eigen::Index length() const { return y.cols(); }
  /// Throws std::invalid_argument if the invariants do not hold.
  void validate() const;
};

/// N evenly spaced points from -1 to 1 inclusive.
Eigen::VectorXd even_grid(Eigen::Index n);

struct SyntheticConfig {
  int num_sequences = 10;
  int length = 50;
  double warp_severity = 0.0;
  double noise_std = 0.05;
  std::vector<std::string> generators{"sinc", "cubic"};

  void validate() const;
};

/// Named base functions: "sinc" (sin(pi x) / (pi x)) and "cubic" (x^3).
double base_function(const std::string& name, double x);

/// Sequence j belongs to group j * G / J (contiguous, equal split). Its warp is
/// warp_from_aux(u) with u_n ~ N(0, severity^2); observations are the group's base
/// function at the warped inputs plus N(0, noise_std^2) noise.
Dataset generate_synthetic(const SyntheticConfig& cfg, std::uint64_t seed);

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t row, std::size_t column, const std::string& message);
  std::size_t row() const { return row_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

/// CSV ingestion: one sequence per row, optional single header row, '.' decimal
/// separator, LF or CRLF. A final column whose header is "group" holds integer
/// labels. Rows and columns in ParseError are 1-based file positions.
Dataset parse_csv(std::istream& in, const std::string& name = "csv");
Dataset load_csv(const std::filesystem::path& path);

/// Writes the dataset in the format parse_csv reads. Values use the shortest
/// decimal form that round-trips to the same double.
void write_csv(const Dataset& data, std::ostream& out);

/// Shortest round-trip decimal representation of `value`.
std::string format_double(double value);

}  // namespace dpalign
