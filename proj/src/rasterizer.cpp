// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#include "facefit/rasterizer.hpp"

#include "facefit/errors.hpp"
#include "raster_detail.hpp"

#include <omp.h>

#include <limits>
#include <string>

namespace facefit {

namespace detail {

void check_raster_inputs(const Points2& xy, const Eigen::VectorXd& depth,
                         const Triangles& triangles, int width, int height) {
  if (width <= 0 || height <= 0) {
    throw InvalidArgument("raster dimensions must be positive, got " + std::to_string(width) +
                          "x" + std::to_string(height));
  }
  if (depth.size() != xy.rows()) throw DimensionError("depth and point counts differ");
  for (Eigen::Index t = 0; t < triangles.rows(); ++t) {
    for (int k = 0; k < 3; ++k) {
      if (triangles(t, k) < 0 || triangles(t, k) >= xy.rows()) {
        throw InvalidArgument("triangle " + std::to_string(t) + " references a missing vertex");
      }
    }
  }
}

}  // namespace detail

namespace {

constexpr int kTileRows = 8;

}  // namespace

RasterOutput::RasterOutput(int w, int h)
    : width(w),
      height(h),
      color(w, h),
      tri_id(static_cast<std::size_t>(w) * h, -1),
      bary(static_cast<std::size_t>(w) * h * 3, 0.0),
      depth(static_cast<std::size_t>(w) * h, 0.0),
      mask(static_cast<std::size_t>(w) * h, 0) {}

int RasterOutput::covered_count() const {
  int n = 0;
  for (auto m : mask) n += m != 0;
  return n;
}

std::uint64_t coverage_signature(const RasterOutput& raster) {
  std::uint64_t h = 1469598103934665603ull;
  for (int id : raster.tri_id) {
    h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(id));
    h *= 1099511628211ull;
  }
  return h;
}

namespace raster {

Points2 camera_to_raster(const Points2& camera, int width, int height) {
  Points2 out(camera.rows(), 2);
  const double cx = 0.5 * width, cy = 0.5 * height;
  for (Eigen::Index i = 0; i < camera.rows(); ++i) {
    out(i, 0) = camera(i, 0) + cx;
    out(i, 1) = cy - camera(i, 1);
  }
  return out;
}

RasterOutput rasterize_coverage(const Points2& raster_xy, const Eigen::VectorXd& depth,
                                const Triangles& triangles, int width, int height,
                                Culling culling) {
  detail::check_raster_inputs(raster_xy, depth, triangles, width, height);
  const int num_tris = static_cast<int>(triangles.rows());
  std::vector<detail::TriangleSetup> setups(num_tris);
#pragma omp parallel for schedule(static)
  for (int t = 0; t < num_tris; ++t) {
    setups[t] = detail::setup_triangle(raster_xy, depth, triangles, t, width, height, culling);
  }

  // Bin triangles into row tiles; each list stays in ascending triangle order.
  const int num_tiles = (height + kTileRows - 1) / kTileRows;
  std::vector<std::vector<int>> bins(num_tiles);
  for (int t = 0; t < num_tris; ++t) {
    const auto& s = setups[t];
    if (!s.active) continue;
    for (int tile = s.row0 / kTileRows; tile <= s.row1 / kTileRows; ++tile) {
      bins[tile].push_back(t);
    }
  }

  RasterOutput out(width, height);
#pragma omp parallel for schedule(dynamic, 1)
  for (int tile = 0; tile < num_tiles; ++tile) {
    const int r0 = tile * kTileRows;
    const int r1 = std::min(height - 1, r0 + kTileRows - 1);
    std::vector<double> zbuf(static_cast<std::size_t>(kTileRows) * width,
                             std::numeric_limits<double>::infinity());
    for (int t : bins[tile]) {
      const auto& s = setups[t];
      const int rs = std::max(r0, s.row0), re = std::min(r1, s.row1);
      for (int r = rs; r <= re; ++r) {
        const double py = r + 0.5;
        for (int c = s.col0; c <= s.col1; ++c) {
          detail::PixelHit hit;
          if (!detail::evaluate_pixel(s, c + 0.5, py, hit)) continue;
          double& zb = zbuf[static_cast<std::size_t>(r - r0) * width + c];
          if (hit.depth < zb) {
            zb = hit.depth;
            detail::write_hit(out, static_cast<std::size_t>(r) * width + c, t, hit);
          }
        }
      }
    }
  }
  return out;
}

RasterOutput refresh_coverage(const RasterOutput& frozen, const Points2& raster_xy,
                              const Eigen::VectorXd& depth, const Triangles& triangles) {
  RasterOutput out(frozen.width, frozen.height);
  const int n = static_cast<int>(frozen.pixel_count());
#pragma omp parallel for schedule(static)
  for (int p = 0; p < n; ++p) {
    const int t = frozen.tri_id[p];
    if (t < 0) continue;
    const int r = p / frozen.width, c = p % frozen.width;
    const double px = c + 0.5, py = r + 0.5;
    double w[3];
    double z[3];
    for (int i = 0; i < 3; ++i) {
      const int vj = triangles(t, (i + 1) % 3), vk = triangles(t, (i + 2) % 3);
      w[i] = detail::cross_at(raster_xy(vj, 0), raster_xy(vj, 1), raster_xy(vk, 0),
                              raster_xy(vk, 1), px, py);
      z[i] = depth[triangles(t, i)];
    }
    const double sum = w[0] + w[1] + w[2];
    detail::PixelHit hit;
    for (int i = 0; i < 3; ++i) hit.bary[i] = w[i] / sum;
    hit.depth = hit.bary[0] * z[0] + hit.bary[1] * z[1] + hit.bary[2] * z[2];
    detail::write_hit(out, static_cast<std::size_t>(p), t, hit);
  }
  return out;
}

Attributes interpolate(const RasterOutput& raster, const Attributes& attributes,
                       const Triangles& triangles) {
  const Eigen::Index a = attributes.cols();
  const int n = static_cast<int>(raster.pixel_count());
  Attributes out = Attributes::Zero(n, a);
#pragma omp parallel for schedule(static)
  for (int p = 0; p < n; ++p) {
    const int t = raster.tri_id[p];
    if (t < 0) continue;
    for (int i = 0; i < 3; ++i) {
      out.row(p) += raster.bary[3 * p + i] * attributes.row(triangles(t, i));
    }
  }
  return out;
}

InterpolationGradient interpolate_backward(const RasterOutput& raster,
                                           const Points2& raster_xy,
                                           const Attributes& attributes,
                                           const Triangles& triangles,
                                           const Attributes& d_pixel_attributes) {
  const int n = static_cast<int>(raster.pixel_count());
  const int a = static_cast<int>(attributes.cols());
  if (d_pixel_attributes.rows() != n || d_pixel_attributes.cols() != a) {
    throw DimensionError("interpolate_backward: cotangent shape mismatch");
  }
  // Per pixel and corner: a attribute cotangents followed by 2 position cotangents.
  const int stride = a + 2;
  std::vector<double> contrib(static_cast<std::size_t>(n) * 3 * stride, 0.0);

#pragma omp parallel for schedule(static)
  for (int p = 0; p < n; ++p) {
    const int t = raster.tri_id[p];
    if (t < 0) continue;
    const auto g = d_pixel_attributes.row(p);
    if (g.isZero(0.0)) continue;
    const int r = p / raster.width, c = p % raster.width;
    const double px = c + 0.5, py = r + 0.5;
    double* out = &contrib[static_cast<std::size_t>(p) * 3 * stride];
    double b[3], db[3], w[3];
    for (int i = 0; i < 3; ++i) {
      b[i] = raster.bary[3 * p + i];
      const auto attr = attributes.row(triangles(t, i));
      db[i] = g.dot(attr);
      for (int k = 0; k < a; ++k) out[i * stride + k] = b[i] * g[k];
      const int vj = triangles(t, (i + 1) % 3), vk = triangles(t, (i + 2) % 3);
      w[i] = detail::cross_at(raster_xy(vj, 0), raster_xy(vj, 1), raster_xy(vk, 0),
                              raster_xy(vk, 1), px, py);
    }
    const double sum = w[0] + w[1] + w[2];
    const double mean_db = db[0] * b[0] + db[1] * b[1] + db[2] * b[2];
    for (int i = 0; i < 3; ++i) {
      const double dw = (db[i] - mean_db) / sum;
      const int j = (i + 1) % 3, k = (i + 2) % 3;
      const int vj = triangles(t, j), vk = triangles(t, k);
      const double ax = raster_xy(vj, 0) - px, ay = raster_xy(vj, 1) - py;
      const double bx = raster_xy(vk, 0) - px, by = raster_xy(vk, 1) - py;
      out[j * stride + a] += dw * by;
      out[j * stride + a + 1] -= dw * bx;
      out[k * stride + a] -= dw * ay;
      out[k * stride + a + 1] += dw * ax;
    }
  }

  InterpolationGradient grad;
  grad.d_attributes = Attributes::Zero(attributes.rows(), a);
  grad.d_raster_xy = Points2::Zero(raster_xy.rows(), 2);
  for (int p = 0; p < n; ++p) {
    const int t = raster.tri_id[p];
    if (t < 0) continue;
    const double* in = &contrib[static_cast<std::size_t>(p) * 3 * stride];
    for (int i = 0; i < 3; ++i) {
      const int v = triangles(t, i);
      for (int k = 0; k < a; ++k) grad.d_attributes(v, k) += in[i * stride + k];
      grad.d_raster_xy(v, 0) += in[i * stride + a];
      grad.d_raster_xy(v, 1) += in[i * stride + a + 1];
    }
  }
  return grad;
}

}  // namespace raster

Rasterized rasterize(const Points2& points2d, const Eigen::VectorXd& depth,
                     const Attributes& attributes, const Triangles& triangles, int width,
                     int height, Culling culling) {
  if (attributes.rows() != points2d.rows()) {
    throw DimensionError("attribute rows differ from vertex count");
  }
  const Points2 xy = raster::camera_to_raster(points2d, width, height);
  Rasterized out;
  out.raster = raster::rasterize_coverage(xy, depth, triangles, width, height, culling);
  out.attributes = raster::interpolate(out.raster, attributes, triangles);
  return out;
}

}  // namespace facefit
