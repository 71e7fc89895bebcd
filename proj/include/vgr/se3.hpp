#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "vgr/error.hpp"

namespace vgr {

// Hamilton convention, scalar-first storage. q and -q denote the same
// rotation; all angular metrics below are sign-invariant.
struct UnitQuaternion {
  double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

  static UnitQuaternion identity() { return {1.0, 0.0, 0.0, 0.0}; }
  static UnitQuaternion from_wxyz(double w, double x, double y, double z);
  static UnitQuaternion from_matrix(const Eigen::Matrix3d& r);
  static UnitQuaternion from_axis_angle(const Eigen::Vector3d& axis,
                                        double angle_rad);

  Eigen::Matrix3d matrix() const;
  Eigen::Vector4d coeffs_wxyz() const { return {w, x, y, z}; }
  UnitQuaternion conjugate() const { return {w, -x, -y, -z}; }
  double norm() const;
  UnitQuaternion normalized() const;
  Eigen::Vector3d rotate(const Eigen::Vector3d& v) const;
};

// Extrinsics M = [R | t], world frame -> camera frame.
struct AbsolutePose {
  UnitQuaternion rotation;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Matrix4d matrix() const;
  Eigen::Vector3d center() const;  // camera center in world coordinates
};

// Directed pairwise transform with unit-norm translation direction
// (scale is unobservable from epipolar geometry).
struct RelativePose {
  UnitQuaternion rotation;
  Eigen::Vector3d translation_dir = Eigen::Vector3d::UnitX();
};

// Hamilton product, renormalized; matches R(a) * R(b).
UnitQuaternion quat_compose(const UnitQuaternion& a, const UnitQuaternion& b);

// 2 * acos(|<a,b>|) * 180/pi, in [0, 180]; sign-invariant in both arguments.
double rotation_angle_deg(const UnitQuaternion& a, const UnitQuaternion& b);

double vector_angle_deg(const Eigen::Vector3d& u, const Eigen::Vector3d& v);

// R = R_j R_i^T, t_dir = normalize(t_j - R t_i), i.e. the rotation and
// translation blocks of M_j * M_i^{-1}.
RelativePose relative_pose(const AbsolutePose& pose_i,
                           const AbsolutePose& pose_j);

RelativePose invert_relative(const RelativePose& r);

// Nearest rotation in Frobenius norm; det = +1 enforced.
UnitQuaternion project_to_so3(const Eigen::Matrix3d& m);

}  // namespace vgr
