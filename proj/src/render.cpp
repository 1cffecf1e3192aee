// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#include "facefit/render.hpp"

#include "facefit/errors.hpp"

#include <omp.h>

namespace facefit {

namespace {

// Unit normal used for shading; degenerate interpolated normals face the camera.
Vec3 pixel_normal(const Eigen::Ref<const Eigen::RowVectorXd>& row, double* length) {
  const Vec3 m(row[3], row[4], row[5]);
  *length = m.norm();
  return *length > 0.0 ? Vec3(m / *length) : Vec3(0.0, 0.0, -1.0);
}

}  // namespace

void shade_pixels(RasterOutput& raster, const Attributes& pixel_attributes,
                  const ShLighting& lighting) {
  const int n = static_cast<int>(raster.pixel_count());
  if (pixel_attributes.rows() != n || pixel_attributes.cols() != kShadingAttributes) {
    throw DimensionError("shade_pixels expects (H*W) x 6 attributes");
  }
#pragma omp parallel for schedule(static)
  for (int p = 0; p < n; ++p) {
    double* out = &raster.color.data[3 * static_cast<std::size_t>(p)];
    out[0] = out[1] = out[2] = 0.0;
    if (!raster.mask[p]) continue;
    const auto row = pixel_attributes.row(p);
    double len;
    const Vec3 n_hat = pixel_normal(row, &len);
    const Vec3 c = shade(Vec3(row[0], row[1], row[2]), n_hat, lighting);
    out[0] = c[0];
    out[1] = c[1];
    out[2] = c[2];
  }
}

ShadingGradient shade_pixels_backward(const RasterOutput& raster,
                                      const Attributes& pixel_attributes,
                                      const ShLighting& lighting, const ImageBuffer& d_image) {
  const int n = static_cast<int>(raster.pixel_count());
  if (d_image.width != raster.width || d_image.height != raster.height) {
    throw DimensionError("image cotangent size differs from the render");
  }
  ShadingGradient g;
  g.d_pixel_attributes = Attributes::Zero(n, kShadingAttributes);
  std::vector<ShCoeffMatrix> row_light(raster.height, ShCoeffMatrix::Zero());

#pragma omp parallel for schedule(static)
  for (int r = 0; r < raster.height; ++r) {
    for (int c = 0; c < raster.width; ++c) {
      const int p = r * raster.width + c;
      if (!raster.mask[p]) continue;
      const Vec3 d_out(d_image.data[3 * p], d_image.data[3 * p + 1], d_image.data[3 * p + 2]);
      if (d_out.isZero(0.0)) continue;
      const auto row = pixel_attributes.row(p);
      double len;
      const Vec3 n_hat = pixel_normal(row, &len);
      const ShadeGradient sg = shade_backward(Vec3(row[0], row[1], row[2]), n_hat, lighting, d_out);
      row_light[r] += sg.coeffs;
      g.d_pixel_attributes(p, 0) = sg.albedo[0];
      g.d_pixel_attributes(p, 1) = sg.albedo[1];
      g.d_pixel_attributes(p, 2) = sg.albedo[2];
      if (len > 0.0) {
        const Vec3 d_m = (sg.normal - n_hat * n_hat.dot(sg.normal)) / len;
        g.d_pixel_attributes(p, 3) = d_m[0];
        g.d_pixel_attributes(p, 4) = d_m[1];
        g.d_pixel_attributes(p, 5) = d_m[2];
      }
    }
  }
  for (const auto& l : row_light) g.d_lighting += l;
  return g;
}

FaceRender render_face(const FaceModel& model, const SceneParams& params, int width,
                       int height, const RasterOutput* frozen) {
  params.validate(model);
  FaceRender s;
  s.synth = synthesize(model, params.coeffs);
  s.normals_model = vertex_normals(s.synth.vertices, model.triangles);
  const Mat3 r = params.pose.rotation();
  s.normals_view = s.normals_model * r.transpose();
  s.projection = transform_project(params.pose, s.synth.vertices);
  s.raster_xy = raster::camera_to_raster(s.projection.points, width, height);
  if (frozen != nullptr) {
    if (frozen->width != width || frozen->height != height) {
      throw DimensionError("frozen coverage has a different image size");
    }
    s.output = raster::refresh_coverage(*frozen, s.raster_xy, s.projection.depth, model.triangles);
  } else {
    s.output = raster::rasterize_coverage(s.raster_xy, s.projection.depth, model.triangles,
                                          width, height, Culling::Back);
  }
  s.vertex_attributes.resize(model.num_vertices(), kShadingAttributes);
  s.vertex_attributes.leftCols(3) = s.synth.albedo;
  s.vertex_attributes.rightCols(3) = s.normals_view;
  s.pixel_attributes = raster::interpolate(s.output, s.vertex_attributes, model.triangles);
  shade_pixels(s.output, s.pixel_attributes, params.lighting);
  return s;
}

SceneGradient render_backward(const FaceModel& model, const SceneParams& params,
                              const FaceRender& state, const ImageBuffer& d_image) {
  const ShadingGradient sg =
      shade_pixels_backward(state.output, state.pixel_attributes, params.lighting, d_image);
  const raster::InterpolationGradient ig =
      raster::interpolate_backward(state.output, state.raster_xy, state.vertex_attributes,
                                   model.triangles, sg.d_pixel_attributes);

  const Eigen::Index v = model.num_vertices();
  const Points3 d_albedo = ig.d_attributes.leftCols(3);
  const Points3 d_normals_view = ig.d_attributes.rightCols(3);

  // Raster rows grow downwards: d/dy_camera = -d/d(row).
  Points2 d_points(v, 2);
  d_points.col(0) = ig.d_raster_xy.col(0);
  d_points.col(1) = -ig.d_raster_xy.col(1);

  // normals_view = normals_model * R^T.
  const Mat3 r = params.pose.rotation();
  const Points3 d_normals_model = d_normals_view * r;
  const Mat3 d_r = d_normals_view.transpose() * state.normals_model;

  Points3 d_vertices =
      vertex_normals_backward(state.synth.vertices, model.triangles, d_normals_model);
  const ProjectionGradient pg = transform_project_backward(
      params.pose, state.synth.vertices, d_points, Eigen::VectorXd::Zero(v));
  d_vertices += pg.vertices;

  SceneGradient g;
  g.coeffs = synthesize_backward(model, state.synth, d_vertices, d_albedo);
  g.pose = pg.pose;
  g.pose.segment<3>(1) +=
      rotation_matrix_backward(params.pose.rx, params.pose.ry, params.pose.rz, d_r);
  g.lighting = sg.d_lighting;
  return g;
}

}  // namespace facefit
