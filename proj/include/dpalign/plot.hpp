#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dpalign {

struct PlotSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool dashed = false;
};

/// Static SVG line chart with axes scaled to the data.
void write_svg_plot(const std::filesystem::path& path, const std::string& title,
                    const std::vector<PlotSeries>& series);

/// Color for a cluster index, cycling through a fixed palette.
std::string cluster_color(int label);

/// One curve per row of `rows` over `x`; rows are colored by `labels` when given.
void plot_sequences(const std::filesystem::path& path, const std::string& title,
                    const Eigen::VectorXd& x, const Eigen::MatrixXd& rows,
                    const std::vector<int>& labels = {});

/// Warp evaluations against the grid, overlaid with the dashed identity line.
void plot_warps(const std::filesystem::path& path, const Eigen::VectorXd& x,
                const Eigen::MatrixXd& warps, const std::vector<int>& labels = {});

}  // namespace dpalign
