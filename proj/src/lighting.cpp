// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#include "facefit/lighting.hpp"

#include "facefit/errors.hpp"

#include <cmath>
#include <numbers>

namespace facefit {

namespace {

const double kInvSqrtPi = 1.0 / std::sqrt(std::numbers::pi);
const double kY00 = 0.5 * kInvSqrtPi;                   // 1/(2 sqrt(pi))
const double kY1 = 0.5 * std::sqrt(3.0) * kInvSqrtPi;   // sqrt(3)/(2 sqrt(pi))
const double kY2a = 0.5 * std::sqrt(15.0) * kInvSqrtPi; // sqrt(15)/(2 sqrt(pi))
const double kY20 = 0.25 * std::sqrt(5.0) * kInvSqrtPi; // sqrt(5)/(4 sqrt(pi))
const double kY22 = 0.25 * std::sqrt(15.0) * kInvSqrtPi;

}  // namespace

double sh_band0_constant() { return kY00; }

ShLighting ShLighting::ambient(double level) {
  ShLighting l;
  l.coeffs.row(0).setConstant(level / kY00);
  return l;
}

void ShLighting::validate() const {
  if (!coeffs.allFinite()) throw InvalidArgument("SH coefficients must be finite");
}

ShVector sh_basis_unchecked(const Vec3& n) {
  const double x = n.x(), y = n.y(), z = n.z();
  ShVector b;
  b << kY00, kY1 * y, kY1 * z, kY1 * x, kY2a * x * y, kY2a * y * z,
      kY20 * (3.0 * z * z - 1.0), kY2a * x * z, kY22 * (x * x - y * y);
  return b;
}

ShVector sh_basis(const Vec3& n) {
  if (!n.allFinite() || std::abs(n.norm() - 1.0) > 1e-6) {
    throw InvalidArgument("sh_basis requires a unit direction");
  }
  return sh_basis_unchecked(n);
}

Eigen::Matrix<double, kShCoeffs, 3> sh_basis_jacobian(const Vec3& n) {
  const double x = n.x(), y = n.y(), z = n.z();
  Eigen::Matrix<double, kShCoeffs, 3> j;
  j << 0, 0, 0,
       0, kY1, 0,
       0, 0, kY1,
       kY1, 0, 0,
       kY2a * y, kY2a * x, 0,
       0, kY2a * z, kY2a * y,
       0, 0, 6.0 * kY20 * z,
       kY2a * z, 0, kY2a * x,
       2.0 * kY22 * x, -2.0 * kY22 * y, 0;
  return j;
}

Vec3 shade(const Vec3& albedo, const Vec3& n, const ShLighting& light) {
  const ShVector b = sh_basis_unchecked(n);
  const Vec3 irradiance = light.coeffs.transpose() * b;
  return albedo.cwiseProduct(irradiance.cwiseMax(0.0));
}

ShadeGradient shade_backward(const Vec3& albedo, const Vec3& n, const ShLighting& light,
                             const Vec3& d_out) {
  const ShVector b = sh_basis_unchecked(n);
  const Vec3 irradiance = light.coeffs.transpose() * b;
  ShadeGradient g;
  Vec3 d_irr = Vec3::Zero();
  for (int c = 0; c < 3; ++c) {
    if (irradiance[c] > 0.0) {
      g.albedo[c] = d_out[c] * irradiance[c];
      d_irr[c] = d_out[c] * albedo[c];
    }
  }
  g.coeffs = b * d_irr.transpose();
  const ShVector d_b = light.coeffs * d_irr;
  g.normal = sh_basis_jacobian(n).transpose() * d_b;
  return g;
}

}  // namespace facefit
