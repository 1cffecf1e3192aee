// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "facefit/types.hpp"

#include <Eigen/Core>

namespace facefit {

inline constexpr int kShBands = 3;
inline constexpr int kShCoeffs = kShBands * kShBands;

using ShVector = Eigen::Matrix<double, kShCoeffs, 1>;
using ShCoeffMatrix = Eigen::Matrix<double, kShCoeffs, 3>;

/// Second-order real SH irradiance, one column of 9 coefficients per channel.
struct ShLighting {
  ShCoeffMatrix coeffs = ShCoeffMatrix::Zero();

  /// Band-0 only lighting under which albedo a renders as a * level.
  static ShLighting ambient(double level);
  void validate() const;
};

/// 1 / (2 sqrt(pi)): value of the constant basis function.
double sh_band0_constant();

/// Real SH basis at unit direction n, ordered (0,0),(1,-1),(1,0),(1,1),(2,-2),...,(2,2).
/// Throws InvalidArgument unless |n| = 1 within 1e-6.
ShVector sh_basis(const Vec3& n);

/// Same polynomial without the unit-length check.
ShVector sh_basis_unchecked(const Vec3& n);

/// d sh_basis / d n, treating the basis as a polynomial in (x, y, z). 9 x 3.
Eigen::Matrix<double, kShCoeffs, 3> sh_basis_jacobian(const Vec3& n);

/// Lambertian SH shading: albedo_c * max(0, sum_k coeffs(k, c) Y_k(n)).
Vec3 shade(const Vec3& albedo, const Vec3& n, const ShLighting& light);

struct ShadeGradient {
  Vec3 albedo = Vec3::Zero();
  Vec3 normal = Vec3::Zero();
  ShCoeffMatrix coeffs = ShCoeffMatrix::Zero();
};

ShadeGradient shade_backward(const Vec3& albedo, const Vec3& n, const ShLighting& light,
                             const Vec3& d_out);

}  // namespace facefit
