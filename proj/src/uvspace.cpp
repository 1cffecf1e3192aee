// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#include "facefit/uvspace.hpp"

#include "facefit/errors.hpp"

#include <array>
#include <cmath>
#include <string>

namespace facefit {

namespace {

int expected_channels(UvSpace space) { return space == UvSpace::Scalar ? 1 : 3; }

void require_same_grid(const UvMap& a, const UvMap& b, const char* what) {
  if (a.width != b.width || a.height != b.height) {
    throw DimensionError(std::string(what) + ": UV maps differ in resolution (" +
                         std::to_string(a.width) + "x" + std::to_string(a.height) + " vs " +
                         std::to_string(b.width) + "x" + std::to_string(b.height) + ")");
  }
}

void require_space(const UvMap& m, UvSpace space, const char* what) {
  if (m.space != space) {
    throw InvalidArgument(std::string(what) + ": expected a " + to_string(space) +
                          " map, got " + to_string(m.space));
  }
}

// Finite-difference stencil of one texel along one axis.
struct Stencil {
  bool valid = false;
  std::size_t plus = 0, minus = 0;
  double scale = 1.0;
};

Stencil stencil(const UvMap& pos, int r, int c, bool along_u) {
  const int dr = along_u ? 0 : 1, dc = along_u ? 1 : 0;
  const int rp = r + dr, cp = c + dc, rm = r - dr, cm = c - dc;
  const bool has_plus = rp < pos.height && cp < pos.width && pos.mask[pos.index(rp, cp)];
  const bool has_minus = rm >= 0 && cm >= 0 && pos.mask[pos.index(rm, cm)];
  Stencil s;
  const std::size_t centre = pos.index(r, c);
  if (has_plus && has_minus) {
    s = {true, pos.index(rp, cp), pos.index(rm, cm), 0.5};
  } else if (has_plus) {
    s = {true, pos.index(rp, cp), centre, 1.0};
  } else if (has_minus) {
    s = {true, centre, pos.index(rm, cm), 1.0};
  }
  return s;
}

Vec3 difference(const UvMap& pos, const Stencil& s) {
  return (pos.vec3(s.plus) - pos.vec3(s.minus)) * s.scale;
}

}  // namespace

const char* to_string(UvSpace space) {
  switch (space) {
    case UvSpace::Model: return "model";
    case UvSpace::View: return "view";
    case UvSpace::Scalar: return "scalar";
    case UvSpace::Color: return "color";
  }
  return "unknown";
}

UvMap::UvMap(int w, int h, int c, UvSpace s)
    : width(w), height(h), channels(c), space(s) {
  if (w <= 0 || h <= 0) {
    throw InvalidArgument("UV map resolution must be positive, got " + std::to_string(w) +
                          "x" + std::to_string(h));
  }
  if (c != expected_channels(s)) {
    throw InvalidArgument(std::string("a ") + to_string(s) + " UV map needs " +
                          std::to_string(expected_channels(s)) + " channel(s), got " +
                          std::to_string(c));
  }
  data.assign(texel_count() * c, 0.0);
  mask.assign(texel_count(), 0);
}

int UvMap::valid_count() const {
  int n = 0;
  for (auto m : mask) n += m ? 1 : 0;
  return n;
}

void UvMap::validate() const {
  if (width <= 0 || height <= 0) throw InvalidArgument("UV map has zero size");
  if (channels != expected_channels(space)) {
    throw InvalidArgument("UV map channel count does not match its space tag");
  }
  if (data.size() != texel_count() * channels || mask.size() != texel_count()) {
    throw DimensionError("UV map buffers do not match its dimensions");
  }
  for (std::size_t t = 0; t < texel_count(); ++t) {
    if (!mask[t]) continue;
    for (int ch = 0; ch < channels; ++ch) {
      if (!std::isfinite(data[t * channels + ch])) {
        throw InvalidArgument("UV map has a non-finite value at a valid texel " +
                              std::to_string(t));
      }
    }
  }
}

UvMap rasterize_to_uv(const FaceModel& model, const Attributes& per_vertex, int res,
                      UvSpace space) {
  if (res <= 0) throw InvalidArgument("UV resolution must be positive");
  if (per_vertex.rows() != model.num_vertices()) {
    throw DimensionError("rasterize_to_uv expects one attribute row per model vertex");
  }
  UvMap out(res, res, static_cast<int>(per_vertex.cols()), space);
  const Points2 xy = model.uv_coords * static_cast<double>(res);
  const Eigen::VectorXd depth = Eigen::VectorXd::Zero(model.num_vertices());
  const RasterOutput cov =
      raster::rasterize_coverage(xy, depth, model.triangles, res, res, Culling::None);
  const Attributes values = raster::interpolate(cov, per_vertex, model.triangles);
  for (std::size_t t = 0; t < out.texel_count(); ++t) {
    out.mask[t] = cov.mask[t];
    for (int ch = 0; ch < out.channels; ++ch) {
      out.data[t * out.channels + ch] = values(static_cast<Eigen::Index>(t), ch);
    }
  }
  return out;
}

double texel_length(const FaceModel& model, const Points3& vertices, int res) {
  if (res <= 0) throw InvalidArgument("UV resolution must be positive");
  double surface = 0.0, chart = 0.0;
  for (int t = 0; t < model.num_triangles(); ++t) {
    const int a = model.triangles(t, 0), b = model.triangles(t, 1), c = model.triangles(t, 2);
    const Vec3 e1 = vertices.row(b) - vertices.row(a);
    const Vec3 e2 = vertices.row(c) - vertices.row(a);
    surface += 0.5 * e1.cross(e2).norm();
    const Vec2 f1 = model.uv_coords.row(b) - model.uv_coords.row(a);
    const Vec2 f2 = model.uv_coords.row(c) - model.uv_coords.row(a);
    chart += 0.5 * std::abs(f1.x() * f2.y() - f1.y() * f2.x());
  }
  if (!(chart > 0.0)) throw DegenerateInput("model UV chart has zero area");
  return std::sqrt(surface / chart) / res;
}

UvMap unwrap_image(const ImageBuffer& image, const FaceModel& model, const Points3& vertices,
                   const Pose& pose, int res) {
  if (vertices.rows() != model.num_vertices()) {
    throw DimensionError("unwrap_image expects one position per model vertex");
  }
  if (image.width <= 0 || image.height <= 0 || image.data.size() != image.pixel_count() * 3) {
    throw DimensionError("unwrap_image got an empty or inconsistent image");
  }
  pose.validate();
  const UvMap positions = rasterize_to_uv(model, vertices, res, UvSpace::Model);
  const UvMap normals =
      rasterize_to_uv(model, vertex_normals(vertices, model.triangles), res, UvSpace::Model);

  const Projection proj = transform_project(pose, vertices);
  const Points2 raster_xy = raster::camera_to_raster(proj.points, image.width, image.height);
  const RasterOutput cov = raster::rasterize_coverage(
      raster_xy, proj.depth, model.triangles, image.width, image.height, Culling::Back);
  const double tolerance = texel_length(model, vertices, res) * pose.f;
  const Mat3 r = pose.rotation();
  const int w = image.width, h = image.height;

  UvMap out(res, res, 3, UvSpace::Color);
#pragma omp parallel for schedule(static)
  for (int row = 0; row < res; ++row) {
    for (int col = 0; col < res; ++col) {
      const std::size_t t = out.index(row, col);
      if (!positions.mask[t]) continue;
      const Vec3 n = r * normals.vec3(t);
      if (n.z() >= 0.0) continue;
      const Vec3 p = pose.f * (r * positions.vec3(t)) + pose.translation();
      const double px = p.x() + 0.5 * w;
      const double py = 0.5 * h - p.y();
      const double sx = px - 0.5, sy = py - 0.5;
      const int x0 = static_cast<int>(std::floor(sx)), y0 = static_cast<int>(std::floor(sy));
      if (x0 < 0 || y0 < 0 || x0 + 1 >= w || y0 + 1 >= h) continue;
      const int cx = static_cast<int>(std::floor(px)), cy = static_cast<int>(std::floor(py));
      const std::size_t home = static_cast<std::size_t>(cy) * w + cx;
      if (!cov.mask[home] || p.z() > cov.depth[home] + tolerance) continue;
      bool taps_covered = true;
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          taps_covered = taps_covered && cov.mask[static_cast<std::size_t>(y0 + dy) * w + x0 + dx];
        }
      }
      if (!taps_covered) continue;
      const double fx = sx - x0, fy = sy - y0;
      for (int ch = 0; ch < 3; ++ch) {
        const double top = (1 - fx) * image.at(y0, x0, ch) + fx * image.at(y0, x0 + 1, ch);
        const double bottom =
            (1 - fx) * image.at(y0 + 1, x0, ch) + fx * image.at(y0 + 1, x0 + 1, ch);
        out.at(row, col, ch) = (1 - fy) * top + fy * bottom;
      }
      out.mask[t] = 1;
    }
  }
  return out;
}

UvMap apply_displacement(const UvMap& coarse_view, const UvMap& displacement,
                         DisplacementMode mode) {
  require_same_grid(coarse_view, displacement, "apply_displacement");
  require_space(coarse_view, UvSpace::View, "apply_displacement");
  require_space(displacement, UvSpace::Scalar, "apply_displacement");
  UvMap out = coarse_view;
  UvMap normals;
  if (mode == DisplacementMode::Normal) normals = uv_normals(coarse_view);
#pragma omp parallel for schedule(static)
  for (int row = 0; row < out.height; ++row) {
    for (int col = 0; col < out.width; ++col) {
      const std::size_t t = out.index(row, col);
      bool valid = coarse_view.mask[t] && displacement.mask[t];
      if (mode == DisplacementMode::Normal) valid = valid && normals.mask[t];
      out.mask[t] = valid ? 1 : 0;
      if (!valid) continue;
      const double d = displacement.data[t];
      if (mode == DisplacementMode::ViewZ) {
        out.data[3 * t + 2] += d;
      } else {
        out.set_vec3(t, coarse_view.vec3(t) + d * normals.vec3(t));
      }
    }
  }
  return out;
}

UvMap displacement_backward(const UvMap& coarse_view, const UvMap& d_detail,
                            DisplacementMode mode) {
  require_same_grid(coarse_view, d_detail, "displacement_backward");
  UvMap out(coarse_view.width, coarse_view.height, 1, UvSpace::Scalar);
  UvMap normals;
  if (mode == DisplacementMode::Normal) normals = uv_normals(coarse_view);
  for (std::size_t t = 0; t < out.texel_count(); ++t) {
    out.mask[t] = coarse_view.mask[t];
    if (mode == DisplacementMode::ViewZ) {
      out.data[t] = d_detail.data[3 * t + 2];
    } else if (normals.mask[t]) {
      out.data[t] = d_detail.vec3(t).dot(normals.vec3(t));
    }
  }
  return out;
}

UvMap uv_normals(const UvMap& positions) {
  if (positions.channels != 3) throw DimensionError("uv_normals expects a position map");
  UvMap out(positions.width, positions.height, 3, positions.space);
#pragma omp parallel for schedule(static)
  for (int row = 0; row < positions.height; ++row) {
    for (int col = 0; col < positions.width; ++col) {
      const std::size_t t = positions.index(row, col);
      if (!positions.mask[t]) continue;
      const Stencil su = stencil(positions, row, col, true);
      const Stencil sv = stencil(positions, row, col, false);
      if (!su.valid || !sv.valid) continue;
      const Vec3 c = difference(positions, su).cross(difference(positions, sv));
      const double len = c.norm();
      if (!(len > 0.0)) continue;
      out.set_vec3(t, c / len);
      out.mask[t] = 1;
    }
  }
  return out;
}

UvMap uv_normals_backward(const UvMap& positions, const UvMap& normals,
                          const UvMap& d_normals) {
  require_same_grid(positions, normals, "uv_normals_backward");
  require_same_grid(positions, d_normals, "uv_normals_backward");
  const std::size_t n = positions.texel_count();
  // Per texel: cotangents of the two difference vectors.
  std::vector<Vec3> d_pu(n, Vec3::Zero()), d_pv(n, Vec3::Zero());
#pragma omp parallel for schedule(static)
  for (int row = 0; row < positions.height; ++row) {
    for (int col = 0; col < positions.width; ++col) {
      const std::size_t t = positions.index(row, col);
      if (!normals.mask[t]) continue;
      const Vec3 g = d_normals.vec3(t);
      if (g.isZero(0.0)) continue;
      const Vec3 pu = difference(positions, stencil(positions, row, col, true));
      const Vec3 pv = difference(positions, stencil(positions, row, col, false));
      const Vec3 c = pu.cross(pv);
      const double len = c.norm();
      const Vec3 nh = c / len;
      const Vec3 d_c = (g - nh * nh.dot(g)) / len;
      d_pu[t] = pv.cross(d_c);
      d_pv[t] = d_c.cross(pu);
    }
  }
  UvMap out(positions.width, positions.height, 3, positions.space);
  out.mask = positions.mask;
  for (int row = 0; row < positions.height; ++row) {
    for (int col = 0; col < positions.width; ++col) {
      const std::size_t t = positions.index(row, col);
      if (!normals.mask[t]) continue;
      const Stencil su = stencil(positions, row, col, true);
      const Stencil sv = stencil(positions, row, col, false);
      for (int ch = 0; ch < 3; ++ch) {
        out.data[3 * su.plus + ch] += su.scale * d_pu[t][ch];
        out.data[3 * su.minus + ch] -= su.scale * d_pu[t][ch];
        out.data[3 * sv.plus + ch] += sv.scale * d_pv[t][ch];
        out.data[3 * sv.minus + ch] -= sv.scale * d_pv[t][ch];
      }
    }
  }
  return out;
}

TexelMesh uv_to_texel_mesh(const UvMap& positions, const Mask& mask) {
  if (positions.channels != 3) throw DimensionError("uv_to_mesh expects a position map");
  if (mask.size() != positions.texel_count()) throw DimensionError("mask size mismatch");
  const int w = positions.width, h = positions.height;
  auto valid = [&](int r, int c) { return mask[positions.index(r, c)] != 0; };
  std::vector<std::uint8_t> used(positions.texel_count(), 0);
  std::vector<std::array<int, 2>> quads;
  for (int r = 0; r + 1 < h; ++r) {
    for (int c = 0; c + 1 < w; ++c) {
      if (valid(r, c) && valid(r, c + 1) && valid(r + 1, c) && valid(r + 1, c + 1)) {
        quads.push_back({r, c});
        used[positions.index(r, c)] = used[positions.index(r, c + 1)] = 1;
        used[positions.index(r + 1, c)] = used[positions.index(r + 1, c + 1)] = 1;
      }
    }
  }
  TexelMesh out;
  std::vector<int> vertex_of(positions.texel_count(), -1);
  for (std::size_t t = 0; t < used.size(); ++t) {
    if (!used[t]) continue;
    vertex_of[t] = static_cast<int>(out.texel.size());
    out.texel.push_back(static_cast<int>(t));
  }
  const auto nv = static_cast<Eigen::Index>(out.texel.size());
  out.mesh.vertices.resize(nv, 3);
  out.mesh.uvs.resize(nv, 2);
  for (Eigen::Index v = 0; v < nv; ++v) {
    const std::size_t t = out.texel[v];
    out.mesh.vertices.row(v) = positions.vec3(t).transpose();
    out.mesh.uvs(v, 0) = (static_cast<double>(t % w) + 0.5) / w;
    out.mesh.uvs(v, 1) = (static_cast<double>(t / w) + 0.5) / h;
  }
  out.mesh.triangles.resize(static_cast<Eigen::Index>(2 * quads.size()), 3);
  for (std::size_t q = 0; q < quads.size(); ++q) {
    const int r = quads[q][0], c = quads[q][1];
    const int v00 = vertex_of[positions.index(r, c)];
    const int v01 = vertex_of[positions.index(r, c + 1)];
    const int v10 = vertex_of[positions.index(r + 1, c)];
    const int v11 = vertex_of[positions.index(r + 1, c + 1)];
    out.mesh.triangles.row(2 * q) << v00, v01, v11;
    out.mesh.triangles.row(2 * q + 1) << v00, v11, v10;
  }
  return out;
}

Mesh uv_to_mesh(const UvMap& positions) {
  return uv_to_texel_mesh(positions, positions.mask).mesh;
}

UvMap to_view_space(const UvMap& model_positions, const Pose& pose) {
  require_space(model_positions, UvSpace::Model, "to_view_space");
  pose.validate();
  const Mat3 r = pose.rotation();
  UvMap out = model_positions;
  out.space = UvSpace::View;
  for (std::size_t t = 0; t < out.texel_count(); ++t) {
    if (out.mask[t]) out.set_vec3(t, pose.f * (r * out.vec3(t)) + pose.translation());
  }
  return out;
}

UvMap to_model_space(const UvMap& view_positions, const Pose& pose) {
  require_space(view_positions, UvSpace::View, "to_model_space");
  pose.validate();
  const Mat3 r = pose.rotation();
  UvMap out = view_positions;
  out.space = UvSpace::Model;
  for (std::size_t t = 0; t < out.texel_count(); ++t) {
    if (out.mask[t]) {
      out.set_vec3(t, r.transpose() * (out.vec3(t) - pose.translation()) / pose.f);
    }
  }
  return out;
}

UvMap blend_uv_maps(const UvMap& a, const UvMap& b) {
  const std::vector<double> ones(a.texel_count(), 1.0);
  return blend_uv_maps(a, b, ones, std::vector<double>(b.texel_count(), 1.0));
}

UvMap blend_uv_maps(const UvMap& a, const UvMap& b, const std::vector<double>& weight_a,
                    const std::vector<double>& weight_b) {
  require_same_grid(a, b, "blend_uv_maps");
  if (a.space != b.space || a.channels != b.channels) {
    throw InvalidArgument(std::string("blend_uv_maps: cannot blend a ") + to_string(a.space) +
                          " map with a " + to_string(b.space) + " map");
  }
  if (a.space == UvSpace::View) {
    throw InvalidArgument("blend_uv_maps: view-space maps depend on their pose; "
                          "convert both to model space first");
  }
  if (weight_a.size() != a.texel_count() || weight_b.size() != b.texel_count()) {
    throw DimensionError("blend_uv_maps: one weight per texel expected");
  }
  UvMap out(a.width, a.height, a.channels, a.space);
  const int ch = a.channels;
  for (std::size_t t = 0; t < out.texel_count(); ++t) {
    const bool in_a = a.mask[t] != 0, in_b = b.mask[t] != 0;
    if (!in_a && !in_b) continue;
    out.mask[t] = 1;
    if (in_a && in_b) {
      const double wa = weight_a[t], wb = weight_b[t];
      if (wa < 0.0 || wb < 0.0 || !(wa + wb > 0.0)) {
        throw InvalidArgument("blend_uv_maps: weights must be non-negative with a positive "
                              "sum at texel " + std::to_string(t));
      }
      for (int k = 0; k < ch; ++k) {
        out.data[t * ch + k] = (wa * a.data[t * ch + k] + wb * b.data[t * ch + k]) / (wa + wb);
      }
    } else {
      const UvMap& src = in_a ? a : b;
      for (int k = 0; k < ch; ++k) out.data[t * ch + k] = src.data[t * ch + k];
    }
  }
  return out;
}

}  // namespace facefit
