#pragma once

#include <map>
#include <string>
#include <vector>

#include "vgr/view_graph.hpp"

namespace vgr {

inline const std::vector<double> kAngularThresholdsDeg = {3, 5, 10, 30, 45};
inline const std::vector<double> kMeterThresholds = {0.05, 0.1, 0.25, 0.5,
                                                     0.75};

struct ErrorSummary {
  double median = 0.0;
  std::map<double, double> below_thresholds;  // threshold -> percentage
  std::vector<double> per_item_errors;
};

// Lower-median convention for even counts; percentage of items strictly
// below each threshold.
ErrorSummary summarize_errors(const std::vector<double>& errors,
                              const std::vector<double>& thresholds);

// Per-edge rotation and translation-direction angles (degrees) against
// the ground-truth relative poses of the same edges.
std::pair<ErrorSummary, ErrorSummary> relative_pose_errors(
    const std::vector<RelativePose>& estimated,
    const std::vector<RelativePose>& ground_truth);

// Closed-form similarity (rigid fallback below 3 poses or for collinear
// centers) aligning estimated camera centers onto the ground-truth ones.
std::vector<AbsolutePose> align_poses(const std::vector<AbsolutePose>& estimated,
                                      const std::vector<AbsolutePose>& gt);

// Per-camera rotation angle (degrees) and center distance (meters).
std::pair<ErrorSummary, ErrorSummary> absolute_pose_errors(
    const std::vector<AbsolutePose>& aligned,
    const std::vector<AbsolutePose>& gt);

struct LabeledSummary {
  std::string label;
  std::string metric;  // rot_deg, tdir_deg, t_m
  ErrorSummary summary;
  std::vector<double> thresholds;
};

// Text table plus bit-stable CSV (`label,metric,t1..t5,median`).
std::string report_table_text(const std::vector<LabeledSummary>& rows);
std::string report_table_csv(const std::vector<LabeledSummary>& rows);

// Sorted per-graph errors with a rolling mean over a window of 50, as CSV
// (index,error,rolling_mean).
std::string error_distribution_csv(std::vector<double> errors,
                                   int window = 50);

}  // namespace vgr
