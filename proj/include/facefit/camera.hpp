// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "facefit/types.hpp"

#include <Eigen/Core>

#include <array>
#include <span>

namespace facefit {

using PoseVector = Eigen::Matrix<double, 7, 1>;

/// Scaled orthographic camera: v' = f * R(rx, ry, rz) * v + t.
///
/// Projected coordinates are pixels with the origin at the image centre,
/// +x right and +y up. v'_z is the depth; smaller is nearer.
struct Pose {
  double f = 1.0;
  double rx = 0.0, ry = 0.0, rz = 0.0;
  double tx = 0.0, ty = 0.0, tz = 0.0;

  Mat3 rotation() const;
  Vec3 translation() const { return {tx, ty, tz}; }
  void validate() const;

  /// Order: f, rx, ry, rz, tx, ty, tz.
  PoseVector to_vector() const;
  static Pose from_vector(const PoseVector& v);
};

/// R = Rz(rz) * Ry(ry) * Rx(rx).
Mat3 rotation_matrix(double rx, double ry, double rz);

/// Partial derivatives dR/drx, dR/dry, dR/drz.
std::array<Mat3, 3> rotation_matrix_derivatives(double rx, double ry, double rz);

/// Angle cotangents given dL/dR.
Vec3 rotation_matrix_backward(double rx, double ry, double rz, const Mat3& d_rotation);

struct Projection {
  Points2 points;          // V x 2, camera pixel coordinates
  Eigen::VectorXd depth;   // V
};

Projection transform_project(const Pose& pose, const Points3& vertices);

struct ProjectionGradient {
  PoseVector pose = PoseVector::Zero();
  Points3 vertices;
};

ProjectionGradient transform_project_backward(const Pose& pose, const Points3& vertices,
                                              const Points2& d_points,
                                              const Eigen::VectorXd& d_depth);

/// Projected 2D positions of the given landmark vertices (N x 2).
Points2 project_landmarks(const Pose& pose, const Points3& vertices,
                          std::span<const int> landmark_indices);

/// Gradient wrt pose and the full vertex array (non-landmark rows are zero).
ProjectionGradient project_landmarks_backward(const Pose& pose, const Points3& vertices,
                                              std::span<const int> landmark_indices,
                                              const Points2& d_points);

/// Inverse of the view transform: v = R^T (v' - t) / f.
Vec3 view_to_model(const Pose& pose, const Vec3& view_point);
Vec3 model_to_view(const Pose& pose, const Vec3& model_point);

}  // namespace facefit
