// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

// Per-triangle setup and per-pixel evaluation shared by the parallel
// rasterizer and the serial reference.

#pragma once

#include "facefit/rasterizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace facefit::detail {

struct TriangleSetup {
  bool active = false;
  int vertex[3] = {0, 0, 0};
  double x[3] = {0, 0, 0};
  double y[3] = {0, 0, 0};
  double z[3] = {0, 0, 0};
  // Edge i (opposite vertex i) is evaluated from its endpoints in ascending
  // global vertex order, then multiplied by edge_sign[i]. Neighbouring
  // triangles therefore see bitwise-negated edge values on a shared edge.
  int edge_a[3] = {0, 0, 0};
  int edge_b[3] = {0, 0, 0};
  double edge_sign[3] = {1, 1, 1};
  int row0 = 0, row1 = -1, col0 = 0, col1 = -1;
};

inline double cross_at(double ax, double ay, double bx, double by, double px, double py) {
  return (ax - px) * (by - py) - (ay - py) * (bx - px);
}

inline TriangleSetup setup_triangle(const Points2& xy, const Eigen::VectorXd& depth,
                                    const Triangles& triangles, int t, int width, int height,
                                    Culling culling) {
  TriangleSetup s;
  for (int i = 0; i < 3; ++i) {
    s.vertex[i] = triangles(t, i);
    s.x[i] = xy(s.vertex[i], 0);
    s.y[i] = xy(s.vertex[i], 1);
    s.z[i] = depth[s.vertex[i]];
  }
  // In raster coordinates (row down) a camera-facing triangle has positive area.
  const double area = (s.x[1] - s.x[0]) * (s.y[2] - s.y[0]) -
                      (s.y[1] - s.y[0]) * (s.x[2] - s.x[0]);
  if (!(area != 0.0) || !std::isfinite(area)) return s;
  if (culling == Culling::Back && area < 0.0) return s;
  const double orient = area > 0.0 ? 1.0 : -1.0;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    if (s.vertex[j] < s.vertex[k]) {
      s.edge_a[i] = j;
      s.edge_b[i] = k;
      s.edge_sign[i] = orient;
    } else {
      s.edge_a[i] = k;
      s.edge_b[i] = j;
      s.edge_sign[i] = -orient;
    }
  }
  const double min_x = std::min({s.x[0], s.x[1], s.x[2]});
  const double max_x = std::max({s.x[0], s.x[1], s.x[2]});
  const double min_y = std::min({s.y[0], s.y[1], s.y[2]});
  const double max_y = std::max({s.y[0], s.y[1], s.y[2]});
  s.col0 = static_cast<int>(std::max(0.0, std::ceil(min_x - 0.5)));
  s.col1 = static_cast<int>(std::min(static_cast<double>(width - 1), std::floor(max_x - 0.5)));
  s.row0 = static_cast<int>(std::max(0.0, std::ceil(min_y - 0.5)));
  s.row1 = static_cast<int>(std::min(static_cast<double>(height - 1), std::floor(max_y - 0.5)));
  s.active = s.col0 <= s.col1 && s.row0 <= s.row1;
  return s;
}

/// Oriented edge values at (px, py); interior points have all three positive.
inline void edge_values(const TriangleSetup& s, double px, double py, double w[3]) {
  for (int i = 0; i < 3; ++i) {
    const int a = s.edge_a[i], b = s.edge_b[i];
    w[i] = s.edge_sign[i] * cross_at(s.x[a], s.y[a], s.x[b], s.y[b], px, py);
  }
}

/// Top-left rule: a pixel exactly on an edge belongs to the triangle whose
/// interior lies to its right, or below for a horizontal edge.
inline bool owns_edge(const TriangleSetup& s, int i) {
  const int a = s.edge_a[i], b = s.edge_b[i];
  const double gx = s.edge_sign[i] * (s.y[a] - s.y[b]);
  const double gy = s.edge_sign[i] * (s.x[b] - s.x[a]);
  return gx > 0.0 || (gx == 0.0 && gy > 0.0);
}

struct PixelHit {
  double bary[3];
  double depth;
};

/// Returns true if the pixel centre (px, py) is covered, filling `hit`.
inline bool evaluate_pixel(const TriangleSetup& s, double px, double py, PixelHit& hit) {
  double w[3];
  edge_values(s, px, py, w);
  for (int i = 0; i < 3; ++i) {
    if (w[i] < 0.0) return false;
    if (w[i] == 0.0 && !owns_edge(s, i)) return false;
  }
  const double sum = w[0] + w[1] + w[2];
  if (!(sum > 0.0)) return false;
  for (int i = 0; i < 3; ++i) hit.bary[i] = w[i] / sum;
  hit.depth = hit.bary[0] * s.z[0] + hit.bary[1] * s.z[1] + hit.bary[2] * s.z[2];
  return true;
}

inline void write_hit(RasterOutput& out, std::size_t p, int t, const PixelHit& hit) {
  out.tri_id[p] = t;
  out.mask[p] = 1;
  out.depth[p] = hit.depth;
  for (int i = 0; i < 3; ++i) out.bary[3 * p + i] = hit.bary[i];
}

void check_raster_inputs(const Points2& xy, const Eigen::VectorXd& depth,
                                const Triangles& triangles, int width, int height);

}  // namespace facefit::detail
