#include "dpalign/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace dpalign {

double alignment_error(const Eigen::Ref<const Eigen::MatrixXd>& rows, const std::vector<int>& groups,
                       AlignmentMode mode) {
  if (groups.empty()) throw MissingGroups();
  if (static_cast<Eigen::Index>(groups.size()) != rows.rows()) {
    throw std::invalid_argument("alignment_error: one label per row required");
  }
  std::map<int, std::vector<Eigen::Index>> members;
  for (std::size_t j = 0; j < groups.size(); ++j) {
    members[groups[j]].push_back(static_cast<Eigen::Index>(j));
  }
  double total = 0.0;
  for (const auto& [label, idx] : members) {
    if (idx.size() < 2) continue;
    std::vector<double> dist;
    dist.reserve(idx.size() * (idx.size() - 1) / 2);
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (std::size_t b = a + 1; b < idx.size(); ++b) {
        dist.push_back((rows.row(idx[a]) - rows.row(idx[b])).norm());
      }
    }
    if (mode == AlignmentMode::kMean) {
      double sum = 0.0;
      for (double d : dist) sum += d;
      total += sum / static_cast<double>(dist.size());
    } else {
      std::sort(dist.begin(), dist.end());
      const std::size_t mid = dist.size() / 2;
      total += dist.size() % 2 == 1 ? dist[mid] : 0.5 * (dist[mid - 1] + dist[mid]);
    }
  }
  return total;
}

double data_fit_metric(const NoiseModel& noise) { return std::sqrt(1.0 / noise.beta()); }

double warp_complexity_metric(const std::vector<WarpState>& warps) {
  double total = 0.0;
  for (const auto& w : warps) total += aux_total_variation(w.u);
  return total;
}

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  std::map<int, int> forward;
  std::map<int, int> backward;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto f = forward.emplace(a[i], b[i]).first;
    const auto g = backward.emplace(b[i], a[i]).first;
    if (f->second != b[i] || g->second != a[i]) return false;
  }
  return true;
}

}  // namespace dpalign
