#include "vgr/metrics.hpp"

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace vgr {

ErrorSummary summarize_errors(const std::vector<double>& errors,
                              const std::vector<double>& thresholds) {
  if (errors.empty()) {
    throw Error(ErrorCode::InvalidInput, "empty error list");
  }
  ErrorSummary s;
  s.per_item_errors = errors;
  std::vector<double> sorted = errors;
  std::sort(sorted.begin(), sorted.end());
  s.median = sorted[(sorted.size() - 1) / 2];  // lower median
  for (double t : thresholds) {
    const auto below = std::count_if(sorted.begin(), sorted.end(),
                                     [t](double e) { return e < t; });
    s.below_thresholds[t] =
        100.0 * static_cast<double>(below) / static_cast<double>(sorted.size());
  }
  return s;
}

std::pair<ErrorSummary, ErrorSummary> relative_pose_errors(
    const std::vector<RelativePose>& estimated,
    const std::vector<RelativePose>& ground_truth) {
  if (estimated.size() != ground_truth.size() || estimated.empty()) {
    throw Error(ErrorCode::InvalidInput, "edge-set mismatch");
  }
  std::vector<double> rot, tdir;
  for (size_t i = 0; i < estimated.size(); ++i) {
    rot.push_back(
        rotation_angle_deg(estimated[i].rotation, ground_truth[i].rotation));
    tdir.push_back(vector_angle_deg(estimated[i].translation_dir,
                                    ground_truth[i].translation_dir));
  }
  return {summarize_errors(rot, kAngularThresholdsDeg),
          summarize_errors(tdir, kAngularThresholdsDeg)};
}

std::vector<AbsolutePose> align_poses(const std::vector<AbsolutePose>& estimated,
                                      const std::vector<AbsolutePose>& gt) {
  if (estimated.size() != gt.size() || estimated.size() < 2) {
    throw Error(ErrorCode::InvalidInput, "need at least 2 matched poses");
  }
  const int n = static_cast<int>(estimated.size());
  Eigen::Matrix3Xd c_gt(3, n), c_est(3, n);
  for (int i = 0; i < n; ++i) {
    c_gt.col(i) = gt[i].center();
    c_est.col(i) = estimated[i].center();
  }

  // Full similarity needs >= 3 poses with non-collinear centers.
  bool with_scale = n >= 3;
  if (with_scale) {
    Eigen::Matrix3Xd centered = c_gt.colwise() - c_gt.rowwise().mean();
    Eigen::JacobiSVD<Eigen::Matrix3Xd> svd(centered);
    if (svd.singularValues()(1) < 1e-9 * (svd.singularValues()(0) + 1e-300)) {
      with_scale = false;
    }
  }
  // T maps gt centers onto estimated centers: c_est ~ s*Q*c_gt + b.
  const Eigen::Matrix4d t = Eigen::umeyama(c_gt, c_est, with_scale);
  const Eigen::Matrix3d sq = t.topLeftCorner<3, 3>();
  const Eigen::Vector3d b = t.topRightCorner<3, 1>();
  const double s = std::cbrt(sq.determinant());
  const Eigen::Matrix3d q = sq / s;

  std::vector<AbsolutePose> aligned;
  aligned.reserve(estimated.size());
  for (const auto& p : estimated) {
    const Eigen::Matrix3d r_aligned = p.rotation.matrix() * q;
    const Eigen::Vector3d c_aligned =
        q.transpose() * (p.center() - b) / s;
    AbsolutePose out;
    out.rotation = UnitQuaternion::from_matrix(r_aligned);
    out.translation = -(r_aligned * c_aligned);
    aligned.push_back(out);
  }
  return aligned;
}

std::pair<ErrorSummary, ErrorSummary> absolute_pose_errors(
    const std::vector<AbsolutePose>& aligned,
    const std::vector<AbsolutePose>& gt) {
  if (aligned.size() != gt.size() || aligned.empty()) {
    throw Error(ErrorCode::InvalidInput, "length mismatch");
  }
  std::vector<double> rot, dist;
  for (size_t i = 0; i < aligned.size(); ++i) {
    rot.push_back(rotation_angle_deg(aligned[i].rotation, gt[i].rotation));
    dist.push_back((aligned[i].center() - gt[i].center()).norm());
  }
  return {summarize_errors(rot, kAngularThresholdsDeg),
          summarize_errors(dist, kMeterThresholds)};
}

namespace {

std::string fmt(double v, const char* spec) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::vector<double> sorted_thresholds(const LabeledSummary& row) {
  std::vector<double> t = row.thresholds;
  std::sort(t.begin(), t.end());
  return t;
}

}  // namespace

std::string report_table_csv(const std::vector<LabeledSummary>& rows) {
  std::ostringstream out;
  out << "label,metric,t1,t2,t3,t4,t5,median\n";
  for (const auto& row : rows) {
    out << row.label << ',' << row.metric;
    for (double t : sorted_thresholds(row)) {
      out << ',' << fmt(row.summary.below_thresholds.at(t), "%.2f");
    }
    out << ',' << fmt(row.summary.median, "%.4f") << '\n';
  }
  return out.str();
}

std::string report_table_text(const std::vector<LabeledSummary>& rows) {
  std::ostringstream out;
  for (const auto& row : rows) {
    out << fmt(0, "%.0s");  // keep formatting deterministic
    out << row.label << " [" << row.metric << "]  ";
    for (double t : sorted_thresholds(row)) {
      out << "<" << t << ": " << fmt(row.summary.below_thresholds.at(t), "%.2f")
          << "%  ";
    }
    out << "median: " << fmt(row.summary.median, "%.4f") << '\n';
  }
  return out.str();
}

std::string error_distribution_csv(std::vector<double> errors, int window) {
  std::sort(errors.begin(), errors.end());
  std::ostringstream out;
  out << "index,error,rolling_mean\n";
  double running = 0.0;
  std::vector<double> buffer;
  for (size_t i = 0; i < errors.size(); ++i) {
    buffer.push_back(errors[i]);
    running += errors[i];
    if (static_cast<int>(buffer.size()) > window) {
      running -= buffer[buffer.size() - window - 1];
    }
    const int count = std::min<int>(window, static_cast<int>(buffer.size()));
    out << i << ',' << fmt(errors[i], "%.6f") << ','
        << fmt(running / count, "%.6f") << '\n';
  }
  return out.str();
}

}  // namespace vgr
