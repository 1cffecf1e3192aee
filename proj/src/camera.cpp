// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#include "facefit/camera.hpp"

#include "facefit/errors.hpp"

#include <cmath>
#include <string>

namespace facefit {

namespace {

Mat3 rot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 m;
  m << 1, 0, 0, 0, c, -s, 0, s, c;
  return m;
}
Mat3 rot_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 m;
  m << c, 0, s, 0, 1, 0, -s, 0, c;
  return m;
}
Mat3 rot_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 m;
  m << c, -s, 0, s, c, 0, 0, 0, 1;
  return m;
}
Mat3 d_rot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 m;
  m << 0, 0, 0, 0, -s, -c, 0, c, -s;
  return m;
}
Mat3 d_rot_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 m;
  m << -s, 0, c, 0, 0, 0, -c, 0, -s;
  return m;
}
Mat3 d_rot_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 m;
  m << -s, -c, 0, c, -s, 0, 0, 0, 0;
  return m;
}

void check_indices(std::span<const int> indices, Eigen::Index count) {
  for (int idx : indices) {
    if (idx < 0 || idx >= count) {
      throw InvalidArgument("landmark index " + std::to_string(idx) + " out of range (" +
                            std::to_string(count) + " vertices)");
    }
  }
}

}  // namespace

Mat3 rotation_matrix(double rx, double ry, double rz) {
  return rot_z(rz) * rot_y(ry) * rot_x(rx);
}

std::array<Mat3, 3> rotation_matrix_derivatives(double rx, double ry, double rz) {
  const Mat3 x = rot_x(rx), y = rot_y(ry), z = rot_z(rz);
  return {z * y * d_rot_x(rx), z * d_rot_y(ry) * x, d_rot_z(rz) * y * x};
}

Vec3 rotation_matrix_backward(double rx, double ry, double rz, const Mat3& d_rotation) {
  const auto d = rotation_matrix_derivatives(rx, ry, rz);
  return {d[0].cwiseProduct(d_rotation).sum(), d[1].cwiseProduct(d_rotation).sum(),
          d[2].cwiseProduct(d_rotation).sum()};
}

Mat3 Pose::rotation() const { return rotation_matrix(rx, ry, rz); }

void Pose::validate() const {
  if (!to_vector().allFinite()) throw InvalidArgument("pose values must be finite");
  if (!(f > 0.0)) throw InvalidArgument("pose scale f must be positive");
}

PoseVector Pose::to_vector() const {
  PoseVector v;
  v << f, rx, ry, rz, tx, ty, tz;
  return v;
}

Pose Pose::from_vector(const PoseVector& v) {
  return Pose{v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
}

Projection transform_project(const Pose& pose, const Points3& vertices) {
  const Mat3 sr = pose.f * pose.rotation();
  const Vec3 t = pose.translation();
  const Eigen::Index n = vertices.rows();
  Projection out;
  out.points.resize(n, 2);
  out.depth.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3 v = sr * vertices.row(i).transpose() + t;
    out.points(i, 0) = v.x();
    out.points(i, 1) = v.y();
    out.depth[i] = v.z();
  }
  return out;
}

ProjectionGradient transform_project_backward(const Pose& pose, const Points3& vertices,
                                              const Points2& d_points,
                                              const Eigen::VectorXd& d_depth) {
  const Eigen::Index n = vertices.rows();
  if (d_points.rows() != n || d_depth.size() != n) {
    throw DimensionError("transform_project_backward: cotangent size mismatch");
  }
  const Mat3 r = pose.rotation();
  ProjectionGradient g;
  g.vertices.resize(n, 3);
  Mat3 d_r = Mat3::Zero();
  double d_f = 0.0;
  Vec3 d_t = Vec3::Zero();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3 gv(d_points(i, 0), d_points(i, 1), d_depth[i]);
    const Vec3 v = vertices.row(i).transpose();
    d_t += gv;
    d_f += gv.dot(r * v);
    d_r += pose.f * gv * v.transpose();
    g.vertices.row(i) = (pose.f * r.transpose() * gv).transpose();
  }
  const Vec3 d_angles = rotation_matrix_backward(pose.rx, pose.ry, pose.rz, d_r);
  g.pose << d_f, d_angles, d_t;
  return g;
}

Points2 project_landmarks(const Pose& pose, const Points3& vertices,
                          std::span<const int> landmark_indices) {
  check_indices(landmark_indices, vertices.rows());
  Points3 gathered(static_cast<Eigen::Index>(landmark_indices.size()), 3);
  for (std::size_t i = 0; i < landmark_indices.size(); ++i) {
    gathered.row(static_cast<Eigen::Index>(i)) = vertices.row(landmark_indices[i]);
  }
  return transform_project(pose, gathered).points;
}

ProjectionGradient project_landmarks_backward(const Pose& pose, const Points3& vertices,
                                              std::span<const int> landmark_indices,
                                              const Points2& d_points) {
  check_indices(landmark_indices, vertices.rows());
  const auto n = static_cast<Eigen::Index>(landmark_indices.size());
  if (d_points.rows() != n) throw DimensionError("landmark cotangent count mismatch");
  Points3 gathered(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) gathered.row(i) = vertices.row(landmark_indices[i]);
  const ProjectionGradient local =
      transform_project_backward(pose, gathered, d_points, Eigen::VectorXd::Zero(n));
  ProjectionGradient g;
  g.pose = local.pose;
  g.vertices = Points3::Zero(vertices.rows(), 3);
  for (Eigen::Index i = 0; i < n; ++i) g.vertices.row(landmark_indices[i]) += local.vertices.row(i);
  return g;
}

Vec3 view_to_model(const Pose& pose, const Vec3& view_point) {
  return pose.rotation().transpose() * (view_point - pose.translation()) / pose.f;
}

Vec3 model_to_view(const Pose& pose, const Vec3& model_point) {
  return pose.f * (pose.rotation() * model_point) + pose.translation();
}

}  // namespace facefit
