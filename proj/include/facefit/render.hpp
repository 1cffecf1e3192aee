// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "facefit/camera.hpp"
#include "facefit/facemodel.hpp"
#include "facefit/lighting.hpp"
#include "facefit/rasterizer.hpp"
#include "facefit/scene.hpp"

namespace facefit {

/// Per-pixel attribute layout used by both render paths: albedo (3), normal (3).
inline constexpr int kShadingAttributes = 6;

/// Shade covered pixels in place from interpolated albedo/normal attributes.
/// Normals are renormalized per pixel. Background stays black.
void shade_pixels(RasterOutput& raster, const Attributes& pixel_attributes,
                  const ShLighting& lighting);

struct ShadingGradient {
  Attributes d_pixel_attributes;                    // (H*W) x 6
  ShCoeffMatrix d_lighting = ShCoeffMatrix::Zero();
};

/// Reverse mode of shade_pixels. The lighting gradient is reduced row by row
/// in a fixed order.
ShadingGradient shade_pixels_backward(const RasterOutput& raster,
                                      const Attributes& pixel_attributes,
                                      const ShLighting& lighting, const ImageBuffer& d_image);

/// Everything the backward pass needs from a forward face render.
struct FaceRender {
  RasterOutput output;
  Synthesized synth;
  Points3 normals_model;
  Points3 normals_view;
  Projection projection;
  Points2 raster_xy;
  Attributes vertex_attributes;   // V x 6
  Attributes pixel_attributes;    // (H*W) x 6
};

/// synthesize -> vertex normals -> project -> rasterize (back-face culled) ->
/// SH shading. With `frozen`, coverage is taken from a previous render.
FaceRender render_face(const FaceModel& model, const SceneParams& params, int width,
                       int height, const RasterOutput* frozen = nullptr);

/// Gradients of sum(d_image * image) wrt every scene parameter. Only pixels
/// inside the coverage mask contribute; coverage changes are not
/// differentiated.
SceneGradient render_backward(const FaceModel& model, const SceneParams& params,
                              const FaceRender& state, const ImageBuffer& d_image);

}  // namespace facefit
