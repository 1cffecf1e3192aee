// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#include "facefit/reference.hpp"

#include "facefit/errors.hpp"
#include "raster_detail.hpp"

#include <cmath>
#include <limits>

namespace facefit::reference {

RasterOutput rasterize_coverage_serial(const Points2& raster_xy, const Eigen::VectorXd& depth,
                                       const Triangles& triangles, int width, int height,
                                       Culling culling) {
  detail::check_raster_inputs(raster_xy, depth, triangles, width, height);
  RasterOutput out(width, height);
  std::vector<double> zbuf(out.pixel_count(), std::numeric_limits<double>::infinity());
  for (int t = 0; t < triangles.rows(); ++t) {
    const auto s = detail::setup_triangle(raster_xy, depth, triangles, t, width, height, culling);
    if (!s.active) continue;
    for (int r = s.row0; r <= s.row1; ++r) {
      for (int c = s.col0; c <= s.col1; ++c) {
        detail::PixelHit hit;
        if (!detail::evaluate_pixel(s, c + 0.5, r + 0.5, hit)) continue;
        const std::size_t p = static_cast<std::size_t>(r) * width + c;
        if (hit.depth < zbuf[p]) {
          zbuf[p] = hit.depth;
          detail::write_hit(out, p, t, hit);
        }
      }
    }
  }
  return out;
}

void shade_pixels_serial(RasterOutput& raster, const Attributes& pixel_attributes,
                         const ShLighting& lighting) {
  for (std::size_t p = 0; p < raster.pixel_count(); ++p) {
    for (int ch = 0; ch < 3; ++ch) raster.color.data[3 * p + ch] = 0.0;
    if (!raster.mask[p]) continue;
    const auto row = pixel_attributes.row(static_cast<Eigen::Index>(p));
    const Vec3 albedo(row[0], row[1], row[2]);
    Vec3 n(row[3], row[4], row[5]);
    const double len = n.norm();
    n = len > 0.0 ? Vec3(n / len) : Vec3(0.0, 0.0, -1.0);
    const Vec3 c = shade(albedo, n, lighting);
    for (int ch = 0; ch < 3; ++ch) raster.color.data[3 * p + ch] = c[ch];
  }
}

double photometric_loss_serial(const ImageBuffer& target, const ImageBuffer& rendered,
                               const Mask& mask) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t p = 0; p < mask.size(); ++p) {
    if (!mask[p]) continue;
    double e2 = 0.0;
    for (int ch = 0; ch < 3; ++ch) {
      const double d = target.data[3 * p + ch] - rendered.data[3 * p + ch];
      e2 += d * d;
    }
    sum += std::sqrt(e2);
    ++count;
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

}  // namespace facefit::reference
