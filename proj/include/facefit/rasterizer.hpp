// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "facefit/types.hpp"

#include <Eigen/Core>

#include <vector>

namespace facefit {

enum class Culling { None, Back };

/// Per-pixel result of hard z-buffered rasterization.
///
/// Where mask is set, tri_id >= 0 and bary holds the three barycentric weights
/// of the pixel centre; elsewhere tri_id = -1 and color is the background.
struct RasterOutput {
  int width = 0;
  int height = 0;
  ImageBuffer color;
  std::vector<int> tri_id;
  std::vector<double> bary;    // 3 per pixel
  std::vector<double> depth;
  Mask mask;

  RasterOutput() = default;
  RasterOutput(int w, int h);
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  int covered_count() const;
};

struct Rasterized {
  RasterOutput raster;
  Attributes attributes;   // (H*W) x A, zero at background pixels
};

/// Rasterize triangles given in camera pixel coordinates (origin at image
/// centre, +y up). Pixel (row, col) samples its centre. The nearest
/// (smallest depth) covering triangle wins; equal depth goes to the lower
/// triangle index; pixels exactly on a shared edge follow a top-left rule.
/// With Culling::Back, triangles whose view-space normal points away from the
/// camera (+z) are skipped.
Rasterized rasterize(const Points2& points2d, const Eigen::VectorXd& depth,
                     const Attributes& attributes, const Triangles& triangles, int width,
                     int height, Culling culling);

/// Fingerprint of the tri_id image; used to detect coverage changes.
std::uint64_t coverage_signature(const RasterOutput& raster);

namespace raster {

/// Camera pixel coordinates -> continuous raster coordinates (col, row), with
/// pixel centres at half-integers.
Points2 camera_to_raster(const Points2& camera, int width, int height);

/// Coverage pass (OpenMP over row tiles). Fills tri_id, bary, depth, mask.
RasterOutput rasterize_coverage(const Points2& raster_xy, const Eigen::VectorXd& depth,
                                const Triangles& triangles, int width, int height,
                                Culling culling);

/// Keep the tri_id image of `frozen` and recompute barycentrics and depth for
/// moved vertices. Evaluating a loss with frozen coverage gives exactly the
/// function whose gradient the backward pass returns.
RasterOutput refresh_coverage(const RasterOutput& frozen, const Points2& raster_xy,
                              const Eigen::VectorXd& depth, const Triangles& triangles);

/// Barycentric interpolation of per-vertex attributes at covered pixels.
Attributes interpolate(const RasterOutput& raster, const Attributes& attributes,
                       const Triangles& triangles);

struct InterpolationGradient {
  Attributes d_attributes;   // V x A
  Points2 d_raster_xy;       // V x 2
};

/// Reverse mode of interpolate, including the barycentric dependence on vertex
/// positions at fixed coverage. Per-pixel terms are computed in parallel and
/// reduced in pixel order, so the result does not depend on the thread count.
InterpolationGradient interpolate_backward(const RasterOutput& raster,
                                           const Points2& raster_xy,
                                           const Attributes& attributes,
                                           const Triangles& triangles,
                                           const Attributes& d_pixel_attributes);

}  // namespace raster
}  // namespace facefit
