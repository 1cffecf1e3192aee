// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

// Serial reference kernels. They share the per-pixel arithmetic with the
// OpenMP kernels but use the textbook loop structure (triangle-major z-buffer,
// straight pixel loops) and exist so tests and benchmarks can compare against
// them.

#pragma once

#include "facefit/lighting.hpp"
#include "facefit/rasterizer.hpp"

namespace facefit::reference {

RasterOutput rasterize_coverage_serial(const Points2& raster_xy, const Eigen::VectorXd& depth,
                                       const Triangles& triangles, int width, int height,
                                       Culling culling);

/// Serial version of shade_pixels.
void shade_pixels_serial(RasterOutput& raster, const Attributes& pixel_attributes,
                         const ShLighting& lighting);

/// Serial version of photometric_loss (value only).
double photometric_loss_serial(const ImageBuffer& target, const ImageBuffer& rendered,
                               const Mask& mask);

}  // namespace facefit::reference
