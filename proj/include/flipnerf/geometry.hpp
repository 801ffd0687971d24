// Copyright 2026 The flipnerf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

namespace flipnerf {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Six-vector (omega, v): axis-angle rotation part first, translation part second.
using Twist = Eigen::Matrix<double, 6, 1>;

/// Camera-to-world rigid transform. The rotation columns are the camera
/// x, y, z axes expressed in world coordinates; the camera looks along -z.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose from_matrix(const Mat4& m);
  Mat4 matrix() const;
  Pose inverse() const;
  Vec3 transform_point(const Vec3& p) const { return rotation * p + translation; }
  /// Unit viewing direction (-z axis) in world coordinates.
  Vec3 forward() const { return -rotation.col(2); }
};

Pose operator*(const Pose& a, const Pose& b);

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
};

/// Plane {p : normal . p = offset} with a unit normal.
struct Plane {
  Vec3 normal = Vec3::UnitY();
  double offset = 0.0;

  /// Builds from the general form a x + b y + c z + d = 0 (any nonzero scale).
  static Plane from_coefficients(double a, double b, double c, double d);
  static Plane through(const Vec3& point, const Vec3& normal);
  double signed_distance(const Vec3& p) const { return normal.dot(p) - offset; }
};

/// Least-squares sphere through the points. Coplanar or cocircular inputs
/// (singular-value ratio below 1e-6 after centering and scaling) fall back to
/// the best circle in the best-fit plane.
Sphere fit_sphere(std::span<const Vec3> points);

Vec3 reflect_across_plane(const Vec3& p, const Plane& plane);

/// Intersection of the ray {a p : a > 0} from the world origin with the
/// sphere surface, choosing the root closest to p.
Vec3 project_onto_sphere(const Vec3& p, const Sphere& sphere);

/// Camera basis [x y z] with z = (c - at)/|c - at| and x = up x z normalized.
Mat3 look_at_rotation(const Vec3& c, const Vec3& at, const Vec3& up);

/// Default mirror plane for a partial ring of cameras: passes through the
/// sphere center, contains the world up axis, and has the mean horizontal
/// viewing direction as its normal, so the observed arc maps onto the
/// unobserved one.
Plane default_symmetry_plane(std::span<const Pose> poses, const Sphere& sphere);

/// Sphere fit + plane reflection + sphere projection + look-at, one output
/// pose per input pose in input order.
std::vector<Pose> estimate_flipped_poses(std::span<const Pose> poses,
                                         std::optional<Plane> plane = std::nullopt);

Mat3 skew(const Vec3& w);
Mat3 so3_exp(const Vec3& omega);
Vec3 so3_log(const Mat3& r);
Pose se3_exp(const Twist& xi);

/// exp(xi) composed on the left of pose.
Pose se3_apply_twist(const Pose& pose, const Twist& xi);

/// Geodesic angle (radians) between two rotations.
double rotation_angle_between(const Mat3& a, const Mat3& b);

}  // namespace flipnerf
