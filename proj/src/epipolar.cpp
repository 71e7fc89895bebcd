#include "vgr/epipolar.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace vgr {

namespace {

Eigen::Vector3d homog(const Eigen::Vector2d& p) { return {p.x(), p.y(), 1.0}; }

// DLT triangulation with P1 = [I|0], P2 = [R|t]; returns depths in both
// views.
std::pair<double, double> triangulate_depths(const Eigen::Matrix3d& r,
                                             const Eigen::Vector3d& t,
                                             const Correspondence& c) {
  Eigen::Matrix<double, 3, 4> p1 = Eigen::Matrix<double, 3, 4>::Zero();
  p1.topLeftCorner<3, 3>().setIdentity();
  Eigen::Matrix<double, 3, 4> p2;
  p2.topLeftCorner<3, 3>() = r;
  p2.topRightCorner<3, 1>() = t;

  Eigen::Matrix4d a;
  a.row(0) = c.x_src.x() * p1.row(2) - p1.row(0);
  a.row(1) = c.x_src.y() * p1.row(2) - p1.row(1);
  a.row(2) = c.x_dst.x() * p2.row(2) - p2.row(0);
  a.row(3) = c.x_dst.y() * p2.row(2) - p2.row(1);
  Eigen::JacobiSVD<Eigen::Matrix4d> svd(a, Eigen::ComputeFullV);
  Eigen::Vector4d xh = svd.matrixV().col(3);
  if (std::abs(xh(3)) < 1e-12) return {0.0, 0.0};
  const Eigen::Vector3d x = xh.head<3>() / xh(3);
  return {x.z(), (r * x + t).z()};
}

}  // namespace

std::pair<std::vector<Eigen::Vector2d>, Eigen::Matrix3d> normalize_points(
    const std::vector<Eigen::Vector2d>& points) {
  if (points.size() < 2) {
    throw Error(ErrorCode::InsufficientData, "need at least 2 points");
  }
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());
  double rms = 0.0;
  for (const auto& p : points) rms += (p - centroid).squaredNorm();
  rms = std::sqrt(rms / static_cast<double>(points.size()));
  if (rms < 1e-12) {
    throw Error(ErrorCode::DegenerateConfiguration, "all points identical");
  }
  const double scale = std::sqrt(2.0) / rms;
  Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
  t(0, 0) = t(1, 1) = scale;
  t(0, 2) = -scale * centroid.x();
  t(1, 2) = -scale * centroid.y();
  std::vector<Eigen::Vector2d> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(scale * (p - centroid));
  return {std::move(out), t};
}

Eigen::Matrix3d eight_point_essential(
    const std::vector<Correspondence>& correspondences) {
  const size_t n = correspondences.size();
  if (n < 8) {
    throw Error(ErrorCode::InsufficientData, "need at least 8 correspondences");
  }
  std::vector<Eigen::Vector2d> src, dst;
  src.reserve(n);
  dst.reserve(n);
  for (const auto& c : correspondences) {
    src.push_back(c.x_src);
    dst.push_back(c.x_dst);
  }
  auto [src_n, t_src] = normalize_points(src);
  auto [dst_n, t_dst] = normalize_points(dst);

  Eigen::MatrixXd a(n, 9);
  for (size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d xs = homog(src_n[i]);
    const Eigen::Vector3d xd = homog(dst_n[i]);
    // x_dst^T E x_src = 0, E row-major in the unknown vector.
    a.row(i) << xd.x() * xs.x(), xd.x() * xs.y(), xd.x(),
        xd.y() * xs.x(), xd.y() * xs.y(), xd.y(),
        xs.x(), xs.y(), 1.0;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(7) < 1e-10 * sv(0)) {
    throw Error(ErrorCode::DegenerateConfiguration,
                "rank-deficient design matrix");
  }
  Eigen::Matrix<double, 9, 1> e = svd.matrixV().col(8);
  Eigen::Matrix3d f;
  f << e(0), e(1), e(2), e(3), e(4), e(5), e(6), e(7), e(8);

  Eigen::Matrix3d essential = t_dst.transpose() * f * t_src;

  Eigen::JacobiSVD<Eigen::Matrix3d> esvd(
      essential, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double s =
      0.5 * (esvd.singularValues()(0) + esvd.singularValues()(1));
  Eigen::Vector3d d(s, s, 0.0);
  essential = esvd.matrixU() * d.asDiagonal() * esvd.matrixV().transpose();
  const double norm = essential.norm();
  if (norm < 1e-12) {
    throw Error(ErrorCode::DegenerateConfiguration, "null essential matrix");
  }
  return essential * (std::sqrt(2.0) / norm);
}

RelativePose decompose_essential(
    const Eigen::Matrix3d& essential,
    const std::vector<Correspondence>& correspondences) {
  if (correspondences.empty()) {
    throw Error(ErrorCode::InvalidInput, "cheirality test needs points");
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      essential, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  Eigen::Matrix3d v = svd.matrixV();
  if (u.determinant() < 0.0) u.col(2) *= -1.0;
  if (v.determinant() < 0.0) v.col(2) *= -1.0;
  Eigen::Matrix3d w;
  w << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  const Eigen::Matrix3d r1 = u * w * v.transpose();
  const Eigen::Matrix3d r2 = u * w.transpose() * v.transpose();
  const Eigen::Vector3d t = u.col(2);

  struct Candidate {
    Eigen::Matrix3d r;
    Eigen::Vector3d t;
    int positive = 0;
  };
  std::array<Candidate, 4> candidates = {
      Candidate{r1, t}, Candidate{r1, -t}, Candidate{r2, t},
      Candidate{r2, -t}};
  for (auto& cand : candidates) {
    for (const auto& c : correspondences) {
      auto [d1, d2] = triangulate_depths(cand.r, cand.t, c);
      if (d1 > 0.0 && d2 > 0.0) ++cand.positive;
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) {
                     return a.positive > b.positive;
                   });
  if (candidates[0].positive == candidates[1].positive) {
    throw Error(ErrorCode::AmbiguousDecomposition,
                "tie between decomposition candidates");
  }
  return RelativePose{UnitQuaternion::from_matrix(candidates[0].r),
                      candidates[0].t.normalized()};
}

double sampson_residual(const Eigen::Matrix3d& essential,
                        const Correspondence& c) {
  const Eigen::Vector3d xs = homog(c.x_src);
  const Eigen::Vector3d xd = homog(c.x_dst);
  const double num = xd.dot(essential * xs);
  const Eigen::Vector3d ex = essential * xs;
  const Eigen::Vector3d etx = essential.transpose() * xd;
  const double denom =
      ex.x() * ex.x() + ex.y() * ex.y() + etx.x() * etx.x() + etx.y() * etx.y();
  if (denom < 1e-15) return std::abs(num) > 1e-12 ? 1e9 : 0.0;
  return std::sqrt(num * num / denom);
}

RansacResult estimate_relative_pose(
    const std::vector<Correspondence>& correspondences,
    const RansacConfig& config) {
  const size_t n = correspondences.size();
  if (n < 8) {
    throw Error(ErrorCode::InsufficientData, "need at least 8 correspondences");
  }
  if (config.max_iterations < 1 || config.inlier_threshold <= 0.0) {
    throw Error(ErrorCode::InvalidInput, "invalid RANSAC config");
  }
  std::mt19937_64 rng(config.rng_seed);
  std::vector<size_t> indices(n);
  std::iota(indices.begin(), indices.end(), 0);

  std::vector<bool> best_inliers;
  int best_count = -1;
  Eigen::Matrix3d best_e = Eigen::Matrix3d::Zero();

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    // Partial Fisher-Yates for an 8-sample.
    for (size_t k = 0; k < 8; ++k) {
      std::uniform_int_distribution<size_t> pick(k, n - 1);
      std::swap(indices[k], indices[pick(rng)]);
    }
    std::vector<Correspondence> sample;
    sample.reserve(8);
    for (size_t k = 0; k < 8; ++k) sample.push_back(correspondences[indices[k]]);

    Eigen::Matrix3d e;
    try {
      e = eight_point_essential(sample);
    } catch (const Error&) {
      continue;  // degenerate sample
    }
    std::vector<bool> inliers(n, false);
    int count = 0;
    for (size_t i = 0; i < n; ++i) {
      if (sampson_residual(e, correspondences[i]) <= config.inlier_threshold) {
        inliers[i] = true;
        ++count;
      }
    }
    if (count > best_count) {
      best_count = count;
      best_inliers = inliers;
      best_e = e;
    }
  }

  if (best_count < std::max(config.min_inliers, 8)) {
    // Nothing usable even before refit; mirror the all-degenerate case.
    if (best_count < 0) {
      throw Error(ErrorCode::DegenerateConfiguration,
                  "all RANSAC samples degenerate");
    }
    throw Error(ErrorCode::NoModel, "consensus below min_inliers");
  }

  // Re-estimate on all inliers.
  std::vector<Correspondence> inlier_set;
  for (size_t i = 0; i < n; ++i) {
    if (best_inliers[i]) inlier_set.push_back(correspondences[i]);
  }
  Eigen::Matrix3d e = eight_point_essential(inlier_set);
  std::vector<bool> final_inliers(n, false);
  int final_count = 0;
  std::vector<Correspondence> final_set;
  for (size_t i = 0; i < n; ++i) {
    if (sampson_residual(e, correspondences[i]) <= config.inlier_threshold) {
      final_inliers[i] = true;
      final_set.push_back(correspondences[i]);
      ++final_count;
    }
  }
  if (final_count < config.min_inliers) {
    throw Error(ErrorCode::NoModel, "consensus below min_inliers");
  }
  RelativePose pose = decompose_essential(e, final_set);
  return RansacResult{pose, final_inliers};
}

std::vector<Correspondence> edge_correspondences(
    const ViewGraph& graph, const RelativePoseEdge& edge) {
  const CameraNode* src = graph.find_node(edge.src);
  const CameraNode* dst = graph.find_node(edge.dst);
  if (!src || !dst) {
    throw Error(ErrorCode::InvalidInput, "edge references unknown node");
  }
  auto to_normalized = [](const CameraNode& n, const BoundingBox& b) {
    const double u = b.center_x * n.image_width - 0.5 * n.image_width;
    const double v = b.center_y * n.image_height - 0.5 * n.image_height;
    Eigen::Vector2d x(u / n.focal_length, v / n.focal_length);
    if (n.radial_k1 != 0.0) {
      // Fixed-point undistortion of x_d = x_u * (1 + k1 r^2).
      Eigen::Vector2d xu = x;
      for (int i = 0; i < 5; ++i) {
        xu = x / (1.0 + n.radial_k1 * xu.squaredNorm());
      }
      x = xu;
    }
    return x;
  };
  std::vector<Correspondence> out;
  for (int tid : edge.shared_tracks) {
    const DetectionTrack* track = nullptr;
    for (const auto& t : graph.tracks) {
      if (t.track_id == tid) {
        track = &t;
        break;
      }
    }
    if (!track) continue;
    const auto si = track->observations.find(edge.src);
    const auto di = track->observations.find(edge.dst);
    if (si == track->observations.end() || di == track->observations.end()) {
      continue;
    }
    Correspondence c;
    c.x_src = to_normalized(*src, src->detections[si->second]);
    c.x_dst = to_normalized(*dst, dst->detections[di->second]);
    out.push_back(c);
  }
  return out;
}

}  // namespace vgr
