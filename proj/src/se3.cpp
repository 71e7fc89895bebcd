#include "vgr/se3.hpp"

#include <cmath>

namespace vgr {

namespace {
constexpr double kRadToDeg = 180.0 / M_PI;

bool all_finite(const UnitQuaternion& q) {
  return std::isfinite(q.w) && std::isfinite(q.x) && std::isfinite(q.y) &&
         std::isfinite(q.z);
}
}  // namespace

UnitQuaternion UnitQuaternion::from_wxyz(double w, double x, double y,
                                         double z) {
  return UnitQuaternion{w, x, y, z}.normalized();
}

UnitQuaternion UnitQuaternion::from_matrix(const Eigen::Matrix3d& r) {
  Eigen::Quaterniond q(r);
  return UnitQuaternion{q.w(), q.x(), q.y(), q.z()}.normalized();
}

UnitQuaternion UnitQuaternion::from_axis_angle(const Eigen::Vector3d& axis,
                                               double angle_rad) {
  const Eigen::Vector3d a = axis.normalized();
  const double h = 0.5 * angle_rad;
  const double s = std::sin(h);
  return UnitQuaternion{std::cos(h), s * a.x(), s * a.y(), s * a.z()};
}

Eigen::Matrix3d UnitQuaternion::matrix() const {
  return Eigen::Quaterniond(w, x, y, z).toRotationMatrix();
}

double UnitQuaternion::norm() const {
  return std::sqrt(w * w + x * x + y * y + z * z);
}

UnitQuaternion UnitQuaternion::normalized() const {
  const double n = norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorCode::InvalidOutput, "cannot normalize quaternion");
  }
  return {w / n, x / n, y / n, z / n};
}

Eigen::Vector3d UnitQuaternion::rotate(const Eigen::Vector3d& v) const {
  return Eigen::Quaterniond(w, x, y, z) * v;
}

Eigen::Matrix4d AbsolutePose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation.matrix();
  m.topRightCorner<3, 1>() = translation;
  return m;
}

Eigen::Vector3d AbsolutePose::center() const {
  return -(rotation.matrix().transpose() * translation);
}

UnitQuaternion quat_compose(const UnitQuaternion& a, const UnitQuaternion& b) {
  if (!all_finite(a) || !all_finite(b)) {
    throw Error(ErrorCode::InvalidInput, "non-finite quaternion");
  }
  const Eigen::Quaterniond qa(a.w, a.x, a.y, a.z);
  const Eigen::Quaterniond qb(b.w, b.x, b.y, b.z);
  const Eigen::Quaterniond qc = qa * qb;
  return UnitQuaternion{qc.w(), qc.x(), qc.y(), qc.z()}.normalized();
}

double rotation_angle_deg(const UnitQuaternion& a, const UnitQuaternion& b) {
  double d = a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
  d = std::min(1.0, std::abs(d));
  return 2.0 * std::acos(d) * kRadToDeg;
}

double vector_angle_deg(const Eigen::Vector3d& u, const Eigen::Vector3d& v) {
  const double nu = u.norm();
  const double nv = v.norm();
  if (!(nu > 0.0) || !(nv > 0.0)) {
    throw Error(ErrorCode::InvalidInput, "zero vector in angle computation");
  }
  const double c = std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
  return std::acos(c) * kRadToDeg;
}

RelativePose relative_pose(const AbsolutePose& pose_i,
                           const AbsolutePose& pose_j) {
  const UnitQuaternion rot =
      quat_compose(pose_j.rotation, pose_i.rotation.conjugate());
  const Eigen::Vector3d t =
      pose_j.translation - rot.rotate(pose_i.translation);
  const double n = t.norm();
  if (n < 1e-12) {
    throw Error(ErrorCode::DegenerateBaseline, "coincident camera centers");
  }
  return RelativePose{rot, t / n};
}

RelativePose invert_relative(const RelativePose& r) {
  const UnitQuaternion inv = r.rotation.conjugate();
  return RelativePose{inv, (-(inv.rotate(r.translation_dir))).normalized()};
}

UnitQuaternion project_to_so3(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues()(2) < 1e-12) {
    throw Error(ErrorCode::DegenerateMatrix, "rank-deficient matrix");
  }
  Eigen::Matrix3d u = svd.matrixU();
  Eigen::Matrix3d v = svd.matrixV();
  Eigen::Vector3d s = Eigen::Vector3d::Ones();
  if ((u * v.transpose()).determinant() < 0.0) s(2) = -1.0;
  const Eigen::Matrix3d r = u * s.asDiagonal() * v.transpose();
  return UnitQuaternion::from_matrix(r);
}

}  // namespace vgr
