// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "facefit/camera.hpp"
#include "facefit/facemodel.hpp"
#include "facefit/lighting.hpp"
#include "facefit/rasterizer.hpp"
#include "facefit/types.hpp"

#include <cstdint>
#include <vector>

namespace facefit {

/// What the texels of a UvMap hold. The numeric values are the on-disk tags.
enum class UvSpace : std::uint8_t { Model = 0, View = 1, Scalar = 2, Color = 3 };

const char* to_string(UvSpace space);

/// Texture-space image. Texel (r, c) sits at u = (c + 0.5) / width,
/// v = (r + 0.5) / height.
struct UvMap {
  int width = 0;
  int height = 0;
  int channels = 0;
  UvSpace space = UvSpace::Scalar;
  std::vector<double> data;   // height * width * channels
  Mask mask;                  // height * width

  UvMap() = default;
  UvMap(int w, int h, int c, UvSpace s);

  std::size_t texel_count() const { return static_cast<std::size_t>(width) * height; }
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * width + col;
  }
  double& at(int row, int col, int ch) { return data[index(row, col) * channels + ch]; }
  double at(int row, int col, int ch) const { return data[index(row, col) * channels + ch]; }
  Vec3 vec3(std::size_t texel) const {
    return {data[3 * texel], data[3 * texel + 1], data[3 * texel + 2]};
  }
  void set_vec3(std::size_t texel, const Vec3& v) {
    for (int ch = 0; ch < 3; ++ch) data[3 * texel + ch] = v[ch];
  }
  int valid_count() const;

  /// Throws InvalidArgument / DimensionError on a broken invariant.
  void validate() const;
};

/// Rasterizes the model's UV chart at res x res texels and interpolates one
/// attribute row per vertex. Pass the vertex positions to get a position map.
UvMap rasterize_to_uv(const FaceModel& model, const Attributes& per_vertex, int res,
                      UvSpace space);

/// Geometric length of one texel: sqrt(surface area / UV area) / res.
double texel_length(const FaceModel& model, const Points3& vertices, int res);

/// Color unwrap of `image` onto the UV chart. `mask` marks texels that are
/// front-facing, unoccluded and project inside the image.
UvMap unwrap_image(const ImageBuffer& image, const FaceModel& model, const Points3& vertices,
                   const Pose& pose, int res);

enum class DisplacementMode { ViewZ, Normal };

/// Detail positions = coarse + d along view z (default) or along the coarse
/// per-texel normal.
UvMap apply_displacement(const UvMap& coarse_view, const UvMap& displacement,
                         DisplacementMode mode = DisplacementMode::ViewZ);

/// Unit normals normalize(dP/du x dP/dv) from central differences, one-sided
/// where a neighbour is invalid. Texels without a valid neighbour along
/// either axis are dropped from the output mask.
UvMap uv_normals(const UvMap& positions);

/// Reverse mode of uv_normals: position cotangent (3 channels) for a normal
/// cotangent. Texels outside the normal mask carry no gradient.
UvMap uv_normals_backward(const UvMap& positions, const UvMap& normals,
                          const UvMap& d_normals);

/// Mesh over the valid texels plus the texel each vertex came from.
struct TexelMesh {
  Mesh mesh;
  std::vector<int> texel;
};

TexelMesh uv_to_texel_mesh(const UvMap& positions, const Mask& mask);

/// Two counter-clockwise triangles per 2x2 block of valid texels.
Mesh uv_to_mesh(const UvMap& positions);

UvMap to_view_space(const UvMap& model_positions, const Pose& pose);
UvMap to_model_space(const UvMap& view_positions, const Pose& pose);

/// Copy where one mask is set, average where both are; output mask is the
/// union. View-space maps are refused because they depend on the pose.
UvMap blend_uv_maps(const UvMap& a, const UvMap& b);

/// Per-texel weighted variant: (wa * a + wb * b) / (wa + wb) where both are
/// valid. Weights must be non-negative with a positive sum on the overlap.
UvMap blend_uv_maps(const UvMap& a, const UvMap& b, const std::vector<double>& weight_a,
                    const std::vector<double>& weight_b);

/// State of a render through the UV path, kept for the backward pass.
struct UvRender {
  RasterOutput output;
  UvMap normals;
  TexelMesh mesh;
  Points2 raster_xy;
  Attributes vertex_attributes;   // V x 6, albedo then normal
  Attributes pixel_attributes;    // (H*W) x 6
};

/// Renders view-space detail positions: texel mesh, UV normals, orthographic
/// drop of z, back-face culled rasterization and SH shading. With `frozen`,
/// coverage is taken from a previous render.
UvRender render_uv_path(const UvMap& detail_view, const UvMap& albedo_uv,
                        const ShLighting& lighting, int width, int height,
                        const RasterOutput* frozen = nullptr);

RasterOutput render_from_uv(const UvMap& detail_view, const UvMap& albedo_uv,
                            const ShLighting& lighting, int width, int height);

struct UvRenderGradient {
  UvMap d_positions;          // 3 channels, view space
  UvMap d_normals;            // cotangent reaching the UV normal map
  ShCoeffMatrix d_lighting = ShCoeffMatrix::Zero();
};

/// Reverse mode of render_uv_path for an image cotangent. `extra_d_normals`
/// (optional) is added to the normal cotangent before it is pushed through
/// uv_normals.
UvRenderGradient render_uv_backward(const UvMap& detail_view, const UvRender& state,
                                    const ShLighting& lighting, const ImageBuffer& d_image,
                                    const UvMap* extra_d_normals = nullptr);

/// Displacement cotangent from a detail-position cotangent.
UvMap displacement_backward(const UvMap& coarse_view, const UvMap& d_detail,
                            DisplacementMode mode = DisplacementMode::ViewZ);

}  // namespace facefit
