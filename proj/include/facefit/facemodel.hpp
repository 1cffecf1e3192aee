// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "facefit/types.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <vector>

namespace facefit {

inline constexpr int kLandmarkCount = 68;
/// Nose tip in the 68-point landmark convention (0-based).
inline constexpr int kNoseTipLandmark = 30;

/// Linear face model: mean plus identity, expression and albedo bases.
///
/// Shapes are stored flattened as (x0, y0, z0, x1, ...) in model space
/// (millimetres); albedo is linear RGB in the same layout. The model is
/// immutable once built and may be shared between threads.
struct FaceModel {
  Eigen::VectorXd mean_shape;    // 3V
  Eigen::MatrixXd basis_id;      // 3V x K_id
  Eigen::MatrixXd basis_exp;     // 3V x K_exp
  Eigen::VectorXd mean_albedo;   // 3V
  Eigen::MatrixXd basis_tex;     // 3V x K_tex
  Triangles triangles;           // T x 3
  Points2 uv_coords;             // V x 2 in [0,1]^2
  std::vector<int> landmark_indices;

  int num_vertices() const { return static_cast<int>(mean_shape.size() / 3); }
  int num_triangles() const { return static_cast<int>(triangles.rows()); }
  int num_id() const { return static_cast<int>(basis_id.cols()); }
  int num_exp() const { return static_cast<int>(basis_exp.cols()); }
  int num_tex() const { return static_cast<int>(basis_tex.cols()); }

  /// Throws InvalidArgument / DimensionError naming the broken invariant.
  void validate() const;
};

struct ShapeCoeffs {
  Eigen::VectorXd id;
  Eigen::VectorXd exp;
  Eigen::VectorXd tex;

  static ShapeCoeffs zeros(const FaceModel& model);
};

struct Synthesized {
  Points3 vertices;          // model space
  Points3 albedo;            // clamped to [0,1]
  Points3 albedo_unclamped;  // pre-clamp values, kept for the backward pass
};

Synthesized synthesize(const FaceModel& model, const ShapeCoeffs& coeffs);

/// Maps cotangents of (vertices, albedo) to coefficient cotangents.
/// Texels saturated by the albedo clamp receive zero gradient.
ShapeCoeffs synthesize_backward(const FaceModel& model, const Synthesized& forward,
                                const Points3& d_vertices, const Points3& d_albedo);

/// Area-weighted vertex normals. Vertices without incident area get (0,0,1).
Points3 vertex_normals(const Points3& vertices, const Triangles& triangles);

/// Reverse-mode companion of vertex_normals.
Points3 vertex_normals_backward(const Points3& vertices, const Triangles& triangles,
                                const Points3& d_normals);

/// Reshape a flattened 3V vector into V x 3 rows.
Points3 to_points(const Eigen::VectorXd& flat);

/// Synthetic stand-in for a licensed morphable model.
///
/// The base surface is a dome-shaped height field with a nose bump sampled on a
/// grid_size x grid_size UV grid, ~200 mm across, facing +z in model space.
/// Requires grid_size >= 9 so that 68 distinct landmark vertices exist.
FaceModel generate_toy_model(std::uint64_t seed, int grid_size, int num_id, int num_exp,
                             int num_tex);

/// Largest axis-aligned extent of the mean shape.
double model_diameter(const FaceModel& model);

// FMM1 container.
void write_model(const std::filesystem::path& path, const FaceModel& model);
FaceModel read_model(const std::filesystem::path& path);
/// CRC32 over the serialized payload; used as a model fingerprint.
std::uint32_t model_fingerprint(const FaceModel& model);

}  // namespace facefit
