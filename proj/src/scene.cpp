// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#include "facefit/scene.hpp"

#include "facefit/errors.hpp"

namespace facefit {

Eigen::VectorXd lighting_to_vector(const ShLighting& light) {
  Eigen::VectorXd v(3 * kShCoeffs);
  for (int c = 0; c < 3; ++c) v.segment<kShCoeffs>(c * kShCoeffs) = light.coeffs.col(c);
  return v;
}

ShLighting lighting_from_vector(const Eigen::VectorXd& v) {
  if (v.size() != 3 * kShCoeffs) {
    throw DimensionError("expected 27 SH values, got " + std::to_string(v.size()));
  }
  ShLighting l;
  for (int c = 0; c < 3; ++c) l.coeffs.col(c) = v.segment<kShCoeffs>(c * kShCoeffs);
  return l;
}

SceneParams SceneParams::zeros(const FaceModel& model) {
  return {ShapeCoeffs::zeros(model), Pose{}, ShLighting{}};
}

int SceneParams::size() const {
  return static_cast<int>(coeffs.id.size() + coeffs.exp.size() + coeffs.tex.size()) + 7 +
         3 * kShCoeffs;
}

Eigen::VectorXd SceneParams::to_vector() const {
  Eigen::VectorXd v(size());
  v << coeffs.id, coeffs.exp, coeffs.tex, pose.to_vector(), lighting_to_vector(lighting);
  return v;
}

SceneParams SceneParams::from_vector(const Eigen::VectorXd& v, const SceneParams& layout) {
  if (v.size() != layout.size()) throw DimensionError("parameter vector length mismatch");
  SceneParams p;
  Eigen::Index o = 0;
  p.coeffs.id = v.segment(o, layout.coeffs.id.size());
  o += layout.coeffs.id.size();
  p.coeffs.exp = v.segment(o, layout.coeffs.exp.size());
  o += layout.coeffs.exp.size();
  p.coeffs.tex = v.segment(o, layout.coeffs.tex.size());
  o += layout.coeffs.tex.size();
  p.pose = Pose::from_vector(v.segment<7>(o));
  o += 7;
  p.lighting = lighting_from_vector(v.segment(o, 3 * kShCoeffs));
  return p;
}

void SceneParams::validate(const FaceModel& model) const {
  if (coeffs.id.size() != model.num_id() || coeffs.exp.size() != model.num_exp() ||
      coeffs.tex.size() != model.num_tex()) {
    throw DimensionError("scene coefficient lengths do not match the model");
  }
  if (!coeffs.id.allFinite() || !coeffs.exp.allFinite() || !coeffs.tex.allFinite()) {
    throw InvalidArgument("scene coefficients must be finite");
  }
  pose.validate();
  lighting.validate();
}

SceneGradient SceneGradient::zeros(const FaceModel& model) {
  SceneGradient g;
  g.coeffs = ShapeCoeffs::zeros(model);
  return g;
}

Eigen::VectorXd SceneGradient::to_vector() const {
  ShLighting l;
  l.coeffs = lighting;
  Eigen::VectorXd v(coeffs.id.size() + coeffs.exp.size() + coeffs.tex.size() + 7 +
                    3 * kShCoeffs);
  v << coeffs.id, coeffs.exp, coeffs.tex, pose, lighting_to_vector(l);
  return v;
}

SceneGradient& SceneGradient::operator+=(const SceneGradient& other) {
  coeffs.id += other.coeffs.id;
  coeffs.exp += other.coeffs.exp;
  coeffs.tex += other.coeffs.tex;
  pose += other.pose;
  lighting += other.lighting;
  return *this;
}

}  // namespace facefit
