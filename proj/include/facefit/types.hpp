// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <vector>

namespace facefit {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Row-per-vertex point arrays (V x 3 / V x 2).
using Points3 = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Points2 = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;

/// Row-per-vertex attribute array (V x A).
using Attributes = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// One vertex-index triple per row.
using Triangles = Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>;

using Mask = std::vector<std::uint8_t>;

/// Indexed triangle mesh.
struct Mesh {
  Points3 vertices;
  Triangles triangles;
  Points2 uvs;                 // optional, either empty or one row per vertex
};

/// Planar RGB image in linear light, row 0 at the top.
struct ImageBuffer {
  int width = 0;
  int height = 0;
  std::vector<double> data;    // height * width * 3

  ImageBuffer() = default;
  ImageBuffer(int w, int h, double fill = 0.0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, fill) {}

  double& at(int row, int col, int ch) {
    return data[(static_cast<std::size_t>(row) * width + col) * 3 + ch];
  }
  double at(int row, int col, int ch) const {
    return data[(static_cast<std::size_t>(row) * width + col) * 3 + ch];
  }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
};

}  // namespace facefit
