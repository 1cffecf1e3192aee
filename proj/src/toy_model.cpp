// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#include "facefit/errors.hpp"
#include "facefit/facemodel.hpp"
#include "random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace facefit {

namespace {

constexpr double kExtent = 200.0;       // mm, x and y span of the grid
constexpr double kDomeHeight = 60.0;
constexpr double kDomeRadiusX = 150.0;
constexpr double kDomeRadiusY = 170.0;
constexpr double kNoseHeight = 25.0;
constexpr double kNoseY = -5.0;
constexpr double kMaxShapeDisplacement = 0.05;   // fraction of the diameter
constexpr double kMaxAlbedoChange = 0.1;

using detail::Rng;

double to_float(double x) { return static_cast<double>(static_cast<float>(x)); }

double gauss2(double x, double y, double cx, double cy, double sx, double sy) {
  const double dx = (x - cx) / sx, dy = (y - cy) / sy;
  return std::exp(-0.5 * (dx * dx + dy * dy));
}

double surface_height(double x, double y) {
  const double rho2 = (x / kDomeRadiusX) * (x / kDomeRadiusX) +
                      (y / kDomeRadiusY) * (y / kDomeRadiusY);
  return kDomeHeight * std::sqrt(std::max(0.0, 1.0 - rho2)) +
         kNoseHeight * gauss2(x, y, 0.0, kNoseY, 14.0, 22.0);
}

// Sum of a few random low-frequency plane waves over the UV square.
struct SmoothField {
  std::vector<std::array<double, 4>> waves;   // kx, ky, phase, amplitude

  SmoothField(Rng& rng, int count) {
    for (int i = 0; i < count; ++i) {
      const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double freq = rng.uniform(0.3, 1.5);
      waves.push_back({freq * std::cos(angle), freq * std::sin(angle),
                       rng.uniform(0.0, 2.0 * std::numbers::pi), rng.normal()});
    }
  }
  double operator()(double u, double v) const {
    double s = 0.0;
    for (const auto& w : waves) {
      s += w[3] * std::cos(2.0 * std::numbers::pi * (w[0] * u + w[1] * v) + w[2]);
    }
    return s;
  }
};

Eigen::VectorXd smooth_basis_column(Rng& rng, const Points2& uv, double max_norm,
                                    const std::vector<double>& window) {
  const Eigen::Index v = uv.rows();
  std::array<SmoothField, 3> fields{SmoothField(rng, 4), SmoothField(rng, 4),
                                    SmoothField(rng, 4)};
  Eigen::VectorXd col(3 * v);
  double peak = 0.0;
  for (Eigen::Index i = 0; i < v; ++i) {
    double n2 = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double value = fields[k](uv(i, 0), uv(i, 1)) * window[i];
      col[3 * i + k] = value;
      n2 += value * value;
    }
    peak = std::max(peak, std::sqrt(n2));
  }
  // Slight margin so float32 rounding cannot push the peak past the bound.
  if (peak > 0.0) col *= max_norm * (1.0 - 1e-6) / peak;
  return col.unaryExpr(&to_float);
}

struct LandmarkPattern {
  std::array<Vec2, kLandmarkCount> points;
};

// 68-point layout in face millimetres (x right, y up): jaw, brows, nose, eyes, mouth.
LandmarkPattern landmark_pattern() {
  LandmarkPattern p;
  int k = 0;
  for (int i = 0; i < 17; ++i) {
    const double t = i / 16.0;
    p.points[k++] = {-70.0 * std::cos(std::numbers::pi * t),
                     30.0 - 115.0 * std::sin(std::numbers::pi * t)};
  }
  for (int side = 0; side < 2; ++side) {
    for (int i = 0; i < 5; ++i) {
      const double x = side == 0 ? -60.0 + 11.25 * i : 15.0 + 11.25 * i;
      const double c = side == 0 ? -37.5 : 37.5;
      p.points[k++] = {x, 50.0 - 0.01 * (x - c) * (x - c)};
    }
  }
  for (int i = 0; i < 4; ++i) p.points[k++] = {0.0, 35.0 - 40.0 * i / 3.0};
  for (int i = 0; i < 5; ++i) p.points[k++] = {-16.0 + 8.0 * i, -20.0 - (i == 2 ? 3.0 : 0.0)};
  for (double cx : {-35.0, 35.0}) {
    for (int i = 0; i < 6; ++i) {
      const double a = std::numbers::pi - 2.0 * std::numbers::pi * i / 6.0;
      p.points[k++] = {cx + 12.0 * std::cos(a), 20.0 + 5.0 * std::sin(a)};
    }
  }
  for (int i = 0; i < 12; ++i) {
    const double a = std::numbers::pi - 2.0 * std::numbers::pi * i / 12.0;
    p.points[k++] = {28.0 * std::cos(a), -50.0 + 12.0 * std::sin(a)};
  }
  for (int i = 0; i < 8; ++i) {
    const double a = std::numbers::pi - 2.0 * std::numbers::pi * i / 8.0;
    p.points[k++] = {18.0 * std::cos(a), -50.0 + 5.0 * std::sin(a)};
  }
  return p;
}

Vec3 base_albedo(double x, double y) {
  Vec3 skin(0.72, 0.52, 0.42);
  skin *= 0.95 + 0.05 * std::cos(x / 60.0) * std::cos(y / 80.0);
  const Vec3 brow(0.22, 0.16, 0.12), eye(0.12, 0.10, 0.10), lip(0.62, 0.28, 0.28);
  auto blend = [](const Vec3& base, const Vec3& feature, double w) {
    return ((1.0 - w) * base + w * feature).eval();
  };
  Vec3 a = skin;
  a = blend(a, brow, gauss2(std::abs(x), y, 37.5, 47.0, 16.0, 4.0));
  a = blend(a, eye, gauss2(std::abs(x), y, 35.0, 20.0, 9.0, 4.0));
  a = blend(a, lip, gauss2(x, y, 0.0, -50.0, 22.0, 8.0));
  return a;
}

}  // namespace

FaceModel generate_toy_model(std::uint64_t seed, int grid_size, int num_id, int num_exp,
                             int num_tex) {
  if (grid_size < 9) {
    throw InvalidArgument("toy model grid_size must be >= 9 (68 distinct landmarks), got " +
                          std::to_string(grid_size));
  }
  if (num_id < 1 || num_exp < 1 || num_tex < 1) {
    throw InvalidArgument("toy model basis counts must be >= 1");
  }
  Rng rng(seed);
  const int n = grid_size;
  const int v = n * n;

  FaceModel m;
  m.uv_coords.resize(v, 2);
  m.mean_shape.resize(3 * v);
  m.mean_albedo.resize(3 * v);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int idx = i * n + j;
      const double u = static_cast<double>(j) / (n - 1);
      const double w = static_cast<double>(i) / (n - 1);
      m.uv_coords(idx, 0) = u;
      m.uv_coords(idx, 1) = w;
      const double x = (u - 0.5) * kExtent;
      const double y = (w - 0.5) * kExtent;
      m.mean_shape.segment<3>(3 * idx) = Vec3(x, y, surface_height(x, y));
      m.mean_albedo.segment<3>(3 * idx) = base_albedo(x, y);
    }
  }
  m.uv_coords = m.uv_coords.unaryExpr(&to_float);
  m.mean_shape = m.mean_shape.unaryExpr(&to_float);
  m.mean_albedo = m.mean_albedo.unaryExpr(&to_float);

  m.triangles.resize(2 * (n - 1) * (n - 1), 3);
  int t = 0;
  for (int i = 0; i + 1 < n; ++i) {
    for (int j = 0; j + 1 < n; ++j) {
      const int v00 = i * n + j, v01 = v00 + 1, v10 = v00 + n, v11 = v10 + 1;
      // Counter-clockwise in (x, y): normals face +z.
      m.triangles.row(t++) << v00, v01, v11;
      m.triangles.row(t++) << v00, v11, v10;
    }
  }

  const double diameter = model_diameter(m);
  const std::vector<double> global(v, 1.0);
  m.basis_id.resize(3 * v, num_id);
  for (int k = 0; k < num_id; ++k) {
    m.basis_id.col(k) =
        smooth_basis_column(rng, m.uv_coords, kMaxShapeDisplacement * diameter, global);
  }
  m.basis_exp.resize(3 * v, num_exp);
  for (int k = 0; k < num_exp; ++k) {
    // Expressions act locally: around the mouth or around the brows.
    const bool mouth = (k % 2) == 0;
    std::vector<double> window(v);
    for (int i = 0; i < v; ++i) {
      const double x = m.mean_shape[3 * i], y = m.mean_shape[3 * i + 1];
      window[i] = mouth ? gauss2(x, y, 0.0, -50.0, 45.0, 30.0)
                        : gauss2(x, y, 0.0, 40.0, 70.0, 25.0);
    }
    m.basis_exp.col(k) =
        smooth_basis_column(rng, m.uv_coords, kMaxShapeDisplacement * diameter, window);
  }
  m.basis_tex.resize(3 * v, num_tex);
  for (int k = 0; k < num_tex; ++k) {
    m.basis_tex.col(k) = smooth_basis_column(rng, m.uv_coords, kMaxAlbedoChange, global);
  }

  // Greedy nearest-unused-vertex assignment keeps the indices distinct on
  // coarse grids.
  const LandmarkPattern pattern = landmark_pattern();
  std::vector<char> used(v, 0);
  m.landmark_indices.resize(kLandmarkCount);
  for (int l = 0; l < kLandmarkCount; ++l) {
    int best = -1;
    double best_d = 0.0;
    for (int i = 0; i < v; ++i) {
      if (used[i]) continue;
      const double dx = m.mean_shape[3 * i] - pattern.points[l].x();
      const double dy = m.mean_shape[3 * i + 1] - pattern.points[l].y();
      const double d = dx * dx + dy * dy;
      if (best < 0 || d < best_d) {
        best = i;
        best_d = d;
      }
    }
    used[best] = 1;
    m.landmark_indices[l] = best;
  }
  m.validate();
  return m;
}

}  // namespace facefit
