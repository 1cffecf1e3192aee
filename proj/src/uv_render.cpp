// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#include "facefit/errors.hpp"
#include "facefit/render.hpp"
#include "facefit/uvspace.hpp"

namespace facefit {

UvRender render_uv_path(const UvMap& detail_view, const UvMap& albedo_uv,
                        const ShLighting& lighting, int width, int height,
                        const RasterOutput* frozen) {
  if (detail_view.space != UvSpace::View || albedo_uv.space != UvSpace::Color) {
    throw InvalidArgument("render_from_uv expects view-space positions and a color map");
  }
  if (detail_view.width != albedo_uv.width || detail_view.height != albedo_uv.height) {
    throw DimensionError("render_from_uv: position and albedo maps differ in resolution");
  }
  lighting.validate();
  UvRender s;
  s.normals = uv_normals(detail_view);
  Mask mask(detail_view.texel_count());
  for (std::size_t t = 0; t < mask.size(); ++t) {
    mask[t] = detail_view.mask[t] && s.normals.mask[t] && albedo_uv.mask[t];
  }
  s.mesh = uv_to_texel_mesh(detail_view, mask);
  const Points3& verts = s.mesh.mesh.vertices;
  const Eigen::Index nv = verts.rows();
  s.raster_xy = raster::camera_to_raster(verts.leftCols(2), width, height);
  const Eigen::VectorXd depth = verts.col(2);
  if (frozen != nullptr) {
    s.output = raster::refresh_coverage(*frozen, s.raster_xy, depth, s.mesh.mesh.triangles);
  } else {
    s.output = raster::rasterize_coverage(s.raster_xy, depth, s.mesh.mesh.triangles, width,
                                          height, Culling::Back);
  }
  s.vertex_attributes.resize(nv, kShadingAttributes);
  for (Eigen::Index v = 0; v < nv; ++v) {
    const std::size_t t = s.mesh.texel[v];
    for (int ch = 0; ch < 3; ++ch) {
      s.vertex_attributes(v, ch) = albedo_uv.data[3 * t + ch];
      s.vertex_attributes(v, 3 + ch) = s.normals.data[3 * t + ch];
    }
  }
  s.pixel_attributes = raster::interpolate(s.output, s.vertex_attributes, s.mesh.mesh.triangles);
  shade_pixels(s.output, s.pixel_attributes, lighting);
  return s;
}

RasterOutput render_from_uv(const UvMap& detail_view, const UvMap& albedo_uv,
                            const ShLighting& lighting, int width, int height) {
  return render_uv_path(detail_view, albedo_uv, lighting, width, height).output;
}

UvRenderGradient render_uv_backward(const UvMap& detail_view, const UvRender& state,
                                    const ShLighting& lighting, const ImageBuffer& d_image,
                                    const UvMap* extra_d_normals) {
  const ShadingGradient sg =
      shade_pixels_backward(state.output, state.pixel_attributes, lighting, d_image);
  const raster::InterpolationGradient ig =
      raster::interpolate_backward(state.output, state.raster_xy, state.vertex_attributes,
                                   state.mesh.mesh.triangles, sg.d_pixel_attributes);

  UvRenderGradient g;
  g.d_lighting = sg.d_lighting;
  g.d_normals = UvMap(detail_view.width, detail_view.height, 3, detail_view.space);
  g.d_normals.mask = state.normals.mask;
  if (extra_d_normals != nullptr) {
    if (extra_d_normals->texel_count() != detail_view.texel_count() ||
        extra_d_normals->channels != 3) {
      throw DimensionError("extra normal cotangent has the wrong shape");
    }
    g.d_normals.data = extra_d_normals->data;
  }
  for (std::size_t v = 0; v < state.mesh.texel.size(); ++v) {
    const std::size_t t = state.mesh.texel[v];
    const auto vi = static_cast<Eigen::Index>(v);
    for (int ch = 0; ch < 3; ++ch) g.d_normals.data[3 * t + ch] += ig.d_attributes(vi, 3 + ch);
  }
  g.d_positions = uv_normals_backward(detail_view, state.normals, g.d_normals);
  // Raster rows grow downwards: d/dy_view = -d/d(row).
  for (std::size_t v = 0; v < state.mesh.texel.size(); ++v) {
    const std::size_t t = state.mesh.texel[v];
    const auto vi = static_cast<Eigen::Index>(v);
    g.d_positions.data[3 * t] += ig.d_raster_xy(vi, 0);
    g.d_positions.data[3 * t + 1] -= ig.d_raster_xy(vi, 1);
  }
  return g;
}

}  // namespace facefit
