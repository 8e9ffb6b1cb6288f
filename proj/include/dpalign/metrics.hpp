#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "dpalign/gp_sequence_model.hpp"
#include "dpalign/warp.hpp"

namespace dpalign {

class MissingGroups : public std::runtime_error {
 public:
  MissingGroups() : std::runtime_error("alignment error needs group labels") {}
};

enum class AlignmentMode { kMean, kMedian };

/// Which labels the alignment errors in a MetricsReport were grouped by.
enum class GroupSource { kGroundTruth, kEstimated };

struct MetricsReport {
  double mean_alignment_error = 0.0;
  double median_alignment_error = 0.0;
  double data_fit = 0.0;
  double warp_complexity = 0.0;
  GroupSource groups = GroupSource::kGroundTruth;
};

/// Sum over groups of the mean (or median) Euclidean distance between all
/// unordered pairs of member rows. Singleton groups contribute zero.
/// Throws MissingGroups when `groups` is empty.
double alignment_error(const Eigen::Ref<const Eigen::MatrixXd>& rows, const std::vector<int>& groups,
                       AlignmentMode mode);

/// Standard deviation of the estimated observation noise, sqrt(1 / beta).
double data_fit_metric(const NoiseModel& noise);

/// Total variation of the warp auxiliaries, summed over sequences.
double warp_complexity_metric(const std::vector<WarpState>& warps);

/// True when both labelings induce the same partition (equal up to relabeling).
bool same_partition(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace dpalign
