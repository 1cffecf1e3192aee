// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "facefit/camera.hpp"
#include "facefit/facemodel.hpp"
#include "facefit/lighting.hpp"

#include <Eigen/Core>

namespace facefit {

/// Full latent code of one face: coefficients, pose and lighting.
///
/// Flattened order: x_id, x_exp, x_tex, pose (f, rx, ry, rz, tx, ty, tz),
/// 27 SH values channel-major.
struct SceneParams {
  ShapeCoeffs coeffs;
  Pose pose;
  ShLighting lighting;

  static SceneParams zeros(const FaceModel& model);
  int size() const;
  Eigen::VectorXd to_vector() const;
  /// Uses `layout` for the coefficient lengths.
  static SceneParams from_vector(const Eigen::VectorXd& v, const SceneParams& layout);
  void validate(const FaceModel& model) const;
};

/// Cotangent of SceneParams (same layout, no invariants).
struct SceneGradient {
  ShapeCoeffs coeffs;
  PoseVector pose = PoseVector::Zero();
  ShCoeffMatrix lighting = ShCoeffMatrix::Zero();

  static SceneGradient zeros(const FaceModel& model);
  Eigen::VectorXd to_vector() const;
  SceneGradient& operator+=(const SceneGradient& other);
};

/// SH values flattened channel-major (27 entries).
Eigen::VectorXd lighting_to_vector(const ShLighting& light);
ShLighting lighting_from_vector(const Eigen::VectorXd& v);

}  // namespace facefit
