#pragma once

#include <cstdint>
#include <vector>

#include "vgr/view_graph.hpp"

namespace vgr {

// 2D points in normalized camera coordinates (pixels pre-multiplied by
// the inverse calibration).
struct Correspondence {
  Eigen::Vector2d x_src = Eigen::Vector2d::Zero();
  Eigen::Vector2d x_dst = Eigen::Vector2d::Zero();
};

struct RansacConfig {
  int max_iterations = 256;
  double inlier_threshold = 1e-3;  // Sampson residual, normalized units
  int min_inliers = 8;
  std::uint64_t rng_seed = 0;
};

// Hartley normalization: centroid at origin, RMS distance sqrt(2).
// Returns the transformed points and the similarity used.
std::pair<std::vector<Eigen::Vector2d>, Eigen::Matrix3d> normalize_points(
    const std::vector<Eigen::Vector2d>& points);

// Normalized 8-point essential matrix; singular values projected to
// (s, s, 0) and ||E||_F = sqrt(2).
Eigen::Matrix3d eight_point_essential(
    const std::vector<Correspondence>& correspondences);

// Picks the (R, t) candidate with the most points at positive depth in
// both views.
RelativePose decompose_essential(
    const Eigen::Matrix3d& essential,
    const std::vector<Correspondence>& correspondences);

// First-order geometric (Sampson) residual of the epipolar constraint.
double sampson_residual(const Eigen::Matrix3d& essential,
                        const Correspondence& c);

struct RansacResult {
  RelativePose pose;
  std::vector<bool> inliers;
};

RansacResult estimate_relative_pose(
    const std::vector<Correspondence>& correspondences,
    const RansacConfig& config);

// Normalized-coordinate correspondences for one edge, built from the
// centers of the shared-track bounding boxes.
std::vector<Correspondence> edge_correspondences(const ViewGraph& graph,
                                                 const RelativePoseEdge& edge);

}  // namespace vgr
