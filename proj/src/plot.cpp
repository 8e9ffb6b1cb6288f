#include "dpalign/plot.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dpalign {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kMargin = 48.0;

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string cluster_color(int label) {
  static constexpr std::array<const char*, 8> kPalette = {
      "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  const auto idx = static_cast<std::size_t>(label < 0 ? 0 : label) % kPalette.size();
  return kPalette[idx];
}

void write_svg_plot(const std::filesystem::path& path, const std::string& title,
                    const std::vector<PlotSeries>& series) {
  double x_lo = std::numeric_limits<double>::infinity();
  double x_hi = -x_lo;
  double y_lo = x_lo;
  double y_hi = -x_lo;
  for (const auto& s : series) {
    for (double v : s.x) { x_lo = std::min(x_lo, v); x_hi = std::max(x_hi, v); }
    for (double v : s.y) { y_lo = std::min(y_lo, v); y_hi = std::max(y_hi, v); }
  }
  if (!(x_hi > x_lo)) { x_lo -= 1.0; x_hi += 1.0; }
  if (!(y_hi > y_lo)) { y_lo -= 1.0; y_hi += 1.0; }
  const double pad = 0.05 * (y_hi - y_lo);
  y_lo -= pad;
  y_hi += pad;

  auto px = [&](double v) { return kMargin + (v - x_lo) / (x_hi - x_lo) * (kWidth - 2 * kMargin); };
  auto py = [&](double v) {
    return kHeight - kMargin - (v - y_lo) / (y_hi - y_lo) * (kHeight - 2 * kMargin);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\""
      << " font-size=\"14\">" << escape(title) << "</text>\n";
  svg << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kWidth - 2 * kMargin
      << "\" height=\"" << kHeight - 2 * kMargin << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x_lo + (x_hi - x_lo) * i / 4.0;
    const double yv = y_lo + (y_hi - y_lo) * i / 4.0;
    svg << "<text x=\"" << px(xv) << "\" y=\"" << kHeight - kMargin + 16
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << xv
        << "</text>\n";
    svg << "<text x=\"" << kMargin - 6 << "\" y=\"" << py(yv) + 3
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << yv
        << "</text>\n";
  }
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("plot series: x and y differ in length");
    svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"";
    if (s.dashed) svg << " stroke-dasharray=\"5,4\"";
    svg << " points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) svg << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    svg << "\"/>\n";
  }
  svg << "</svg>\n";

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << svg.str();
}

void plot_sequences(const std::filesystem::path& path, const std::string& title,
                    const Eigen::VectorXd& x, const Eigen::MatrixXd& rows,
                    const std::vector<int>& labels) {
  std::vector<PlotSeries> series;
  const std::vector<double> xs(x.data(), x.data() + x.size());
  for (Eigen::Index j = 0; j < rows.rows(); ++j) {
    PlotSeries s;
    s.x = xs;
    for (Eigen::Index k = 0; k < rows.cols(); ++k) s.y.push_back(rows(j, k));
    s.color = labels.empty() ? "#555555" : cluster_color(labels[static_cast<std::size_t>(j)]);
    series.push_back(std::move(s));
  }
  write_svg_plot(path, title, series);
}

void plot_warps(const std::filesystem::path& path, const Eigen::VectorXd& x,
                const Eigen::MatrixXd& warps, const std::vector<int>& labels) {
  std::vector<PlotSeries> series;
  const std::vector<double> xs(x.data(), x.data() + x.size());
  for (Eigen::Index j = 0; j < warps.rows(); ++j) {
    PlotSeries s;
    s.x = xs;
    for (Eigen::Index k = 0; k < warps.cols(); ++k) s.y.push_back(warps(j, k));
    s.color = labels.empty() ? "#555555" : cluster_color(labels[static_cast<std::size_t>(j)]);
    series.push_back(std::move(s));
  }
  series.push_back(PlotSeries{xs, xs, "#000000", true});
  write_svg_plot(path, "warps", series);
}

}  // namespace dpalign
