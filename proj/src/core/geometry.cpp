// Copyright 2026 The flipnerf Authors
// SPDX-License-Identifier: Apache-2.0
#include "flipnerf/geometry.hpp"

#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "flipnerf/error.hpp"

namespace flipnerf {

namespace {

constexpr double kRankRatio = 1e-6;
constexpr double kLookAtEps = 1e-9;

struct CircleFit {
  Eigen::Vector2d center;
  double radius;
};

// Algebraic circle fit: rows [2u 2v 1] against u^2 + v^2.
CircleFit fit_circle_2d(const std::vector<Eigen::Vector2d>& pts) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd f(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& q = pts[static_cast<size_t>(i)];
    a.row(i) << 2.0 * q.x(), 2.0 * q.y(), 1.0;
    f(i) = q.squaredNorm();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (s(0) == 0.0 || s(2) / s(0) < kRankRatio) {
    throw Error(ErrorKind::DegenerateConfiguration, "points are collinear; no circle fits");
  }
  const Eigen::Vector3d c = svd.solve(f);
  const double r2 = c(2) + c.head<2>().squaredNorm();
  if (!(r2 > 0.0)) {
    throw Error(ErrorKind::DegenerateConfiguration, "circle fit produced a non-positive radius");
  }
  return {c.head<2>(), std::sqrt(r2)};
}

}  // namespace

Pose Pose::from_matrix(const Mat4& m) {
  Pose p;
  p.rotation = m.topLeftCorner<3, 3>();
  p.translation = m.topRightCorner<3, 1>();
  return p;
}

Mat4 Pose::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

Pose Pose::inverse() const {
  Pose p;
  p.rotation = rotation.transpose();
  p.translation = -(p.rotation * translation);
  return p;
}

Pose operator*(const Pose& a, const Pose& b) {
  Pose p;
  p.rotation = a.rotation * b.rotation;
  p.translation = a.rotation * b.translation + a.translation;
  return p;
}

Plane Plane::from_coefficients(double a, double b, double c, double d) {
  const Vec3 n(a, b, c);
  const double len = n.norm();
  if (!(len > 0.0) || !std::isfinite(len) || !std::isfinite(d)) {
    throw Error(ErrorKind::InvalidArgument, "plane normal must be finite and nonzero");
  }
  return Plane{n / len, -d / len};
}

Plane Plane::through(const Vec3& point, const Vec3& normal) {
  const double len = normal.norm();
  if (!(len > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "plane normal must be nonzero");
  }
  const Vec3 n = normal / len;
  return Plane{n, n.dot(point)};
}

Sphere fit_sphere(std::span<const Vec3> points) {
  if (points.size() < 4) {
    throw Error(ErrorKind::FewerThanFourPoints,
                "sphere fit needs at least 4 points, got " + std::to_string(points.size()));
  }
  const auto n = static_cast<Eigen::Index>(points.size());
  Vec3 centroid = Vec3::Zero();
  for (const auto& p : points) {
    if (!p.allFinite()) throw Error(ErrorKind::InvalidArgument, "non-finite point");
    centroid += p;
  }
  centroid /= static_cast<double>(n);

  double spread = 0.0;
  for (const auto& p : points) spread += (p - centroid).squaredNorm();
  spread = std::sqrt(spread / static_cast<double>(n));
  if (!(spread > 0.0)) {
    throw Error(ErrorKind::DegenerateConfiguration, "all points coincide");
  }

  // Centered and scaled copy: the rank test is then independent of where the
  // points sit and how large the ring is.
  Eigen::MatrixXd q(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    q.row(i) = ((points[static_cast<size_t>(i)] - centroid) / spread).transpose();
  }

  Eigen::MatrixXd a(n, 4);
  Eigen::VectorXd f(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a.row(i) << 2.0 * q(i, 0), 2.0 * q(i, 1), 2.0 * q(i, 2), 1.0;
    f(i) = q.row(i).squaredNorm();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (s(3) / s(0) >= kRankRatio) {
    const Eigen::Vector4d c = svd.solve(f);
    const double r2 = c(3) + c.head<3>().squaredNorm();
    if (r2 > 0.0) {
      return Sphere{centroid + spread * c.head<3>(), spread * std::sqrt(r2)};
    }
  }

  // Rank-deficient: best plane through the points, then the circle inside it.
  Eigen::JacobiSVD<Eigen::MatrixXd> plane_svd(q, Eigen::ComputeThinV);
  const auto& ps = plane_svd.singularValues();
  if (ps(1) / ps(0) < kRankRatio) {
    throw Error(ErrorKind::DegenerateConfiguration, "points are collinear");
  }
  const Vec3 e1 = plane_svd.matrixV().col(0);
  const Vec3 e2 = plane_svd.matrixV().col(1);
  std::vector<Eigen::Vector2d> flat(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3 p = q.row(i).transpose();
    flat[static_cast<size_t>(i)] = {p.dot(e1), p.dot(e2)};
  }
  const CircleFit circle = fit_circle_2d(flat);
  const Vec3 center_q = circle.center.x() * e1 + circle.center.y() * e2;
  return Sphere{centroid + spread * center_q, spread * circle.radius};
}

Vec3 reflect_across_plane(const Vec3& p, const Plane& plane) {
  return p - 2.0 * plane.signed_distance(p) * plane.normal;
}

Vec3 project_onto_sphere(const Vec3& p, const Sphere& sphere) {
  const double pp = p.squaredNorm();
  if (pp == 0.0) {
    throw Error(ErrorKind::OriginInput, "cannot project the world origin along a ray from itself");
  }
  // |a p - c|^2 = r^2  ->  pp a^2 - 2 (p.c) a + (c.c - r^2) = 0
  const double pc = p.dot(sphere.center);
  const double cc = sphere.center.squaredNorm() - sphere.radius * sphere.radius;
  const double disc = pc * pc - pp * cc;
  if (disc < 0.0) {
    throw Error(ErrorKind::NoIntersection, "ray from the origin misses the sphere");
  }
  const double root = std::sqrt(disc);
  // Stable pair of roots: q = pc + sign(pc) root; a1 = q / pp, a2 = cc / q.
  double a1 = 0.0;
  double a2 = 0.0;
  const double qv = pc + std::copysign(root, pc);
  if (qv != 0.0) {
    a1 = qv / pp;
    a2 = cc / qv;
  } else {
    a1 = a2 = 0.0;
  }
  double best = -1.0;
  for (const double a : {a1, a2}) {
    if (a > 0.0 && (best < 0.0 || std::abs(a - 1.0) < std::abs(best - 1.0))) best = a;
  }
  if (best < 0.0) {
    throw Error(ErrorKind::NoIntersection, "sphere lies behind the origin along this ray");
  }
  return best * p;
}

Mat3 look_at_rotation(const Vec3& c, const Vec3& at, const Vec3& up) {
  const Vec3 back = c - at;
  const double dist = back.norm();
  if (dist < kLookAtEps) {
    throw Error(ErrorKind::DegenerateLookAt, "camera position coincides with the target");
  }
  const Vec3 z = back / dist;
  const Vec3 x_raw = up.cross(z);
  const double xn = x_raw.norm();
  if (xn < kLookAtEps) {
    throw Error(ErrorKind::DegenerateLookAt, "viewing direction is parallel to the up vector");
  }
  const Vec3 x = x_raw / xn;
  const Vec3 y = z.cross(x);
  Mat3 r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  return r;
}

Plane default_symmetry_plane(std::span<const Pose> poses, const Sphere& sphere) {
  Vec3 mean = Vec3::Zero();
  for (const auto& p : poses) mean += p.forward();
  mean.z() = 0.0;
  if (mean.norm() < 1e-9) {
    throw Error(ErrorKind::DegenerateConfiguration,
                "cameras have no dominant horizontal viewing direction; pass a plane explicitly");
  }
  return Plane::through(sphere.center, mean);
}

std::vector<Pose> estimate_flipped_poses(std::span<const Pose> poses, std::optional<Plane> plane) {
  if (poses.size() < 4) {
    throw Error(ErrorKind::FewerThanFourPoints,
                "flipped-pose estimation needs at least 4 poses, got " +
                    std::to_string(poses.size()));
  }
  std::vector<Vec3> centers;
  centers.reserve(poses.size());
  for (const auto& p : poses) centers.push_back(p.translation);
  const Sphere sphere = fit_sphere(centers);
  const Plane mirror = plane ? *plane : default_symmetry_plane(poses, sphere);
  const Vec3 up = Vec3::UnitZ();

  std::vector<Pose> out;
  out.reserve(poses.size());
  for (size_t i = 0; i < poses.size(); ++i) {
    try {
      const Vec3 reflected = reflect_across_plane(centers[i], mirror);
      Pose flipped;
      flipped.translation = project_onto_sphere(reflected, sphere);
      flipped.rotation = look_at_rotation(flipped.translation, sphere.center, up);
      out.push_back(flipped);
    } catch (const Error& e) {
      throw Error(e.kind(), "pose " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

Mat3 skew(const Vec3& w) {
  Mat3 m;
  m << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return m;
}

Mat3 so3_exp(const Vec3& omega) {
  const double theta2 = omega.squaredNorm();
  const double theta = std::sqrt(theta2);
  double a = 0.0;
  double b = 0.0;
  if (theta < 1e-6) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  const Mat3 k = skew(omega);
  return Mat3::Identity() + a * k + b * k * k;
}

Vec3 so3_log(const Mat3& r) {
  const Vec3 vee(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double s = 0.5 * vee.norm();
  const double c = 0.5 * (r.trace() - 1.0);
  const double theta = std::atan2(s, c);
  if (theta < 1e-6) return 0.5 * vee;
  if (M_PI - theta < 1e-6) {
    // Axis from the symmetric part near a half turn.
    const Mat3 bb = 0.5 * (r + Mat3::Identity());
    Eigen::Index k = 0;
    bb.diagonal().maxCoeff(&k);
    Vec3 axis = bb.col(k) / std::sqrt(std::max(bb(k, k), 1e-300));
    if (axis.dot(vee) < 0.0) axis = -axis;
    return theta * axis.normalized();
  }
  return (theta / (2.0 * s)) * vee;
}

Pose se3_exp(const Twist& xi) {
  const Vec3 w = xi.head<3>();
  const Vec3 v = xi.tail<3>();
  const double theta2 = w.squaredNorm();
  const double theta = std::sqrt(theta2);
  double b = 0.0;
  double c = 0.0;
  if (theta < 1e-6) {
    b = 0.5 - theta2 / 24.0;
    c = 1.0 / 6.0 - theta2 / 120.0;
  } else {
    b = (1.0 - std::cos(theta)) / theta2;
    c = (theta - std::sin(theta)) / (theta2 * theta);
  }
  const Mat3 k = skew(w);
  const Mat3 vmat = Mat3::Identity() + b * k + c * k * k;
  Pose p;
  p.rotation = so3_exp(w);
  p.translation = vmat * v;
  return p;
}

Pose se3_apply_twist(const Pose& pose, const Twist& xi) {
  if (xi.isZero(0.0)) return pose;
  return se3_exp(xi) * pose;
}

double rotation_angle_between(const Mat3& a, const Mat3& b) {
  return so3_log(a.transpose() * b).norm();
}

}  // namespace flipnerf
