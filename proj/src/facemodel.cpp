// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#include "facefit/facemodel.hpp"

#include "facefit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

namespace facefit {

namespace {

void check_basis(const Eigen::MatrixXd& basis, Eigen::Index rows, const char* name) {
  if (basis.rows() != rows) {
    throw DimensionError(std::string(name) + " has " + std::to_string(basis.rows()) +
                         " rows, expected " + std::to_string(rows));
  }
  if (basis.cols() < 1) {
    throw DimensionError(std::string(name) + " needs at least one column");
  }
}

void check_coeffs(const Eigen::VectorXd& c, const Eigen::MatrixXd& basis, const char* name) {
  if (c.size() != basis.cols()) {
    throw DimensionError(std::string(name) + ": got " + std::to_string(c.size()) +
                         " coefficients for a basis with " + std::to_string(basis.cols()) +
                         " columns");
  }
  if (!c.allFinite()) {
    throw InvalidArgument(std::string(name) + " coefficients must be finite");
  }
}

Vec3 row3(const Points3& p, int i) { return p.row(i).transpose(); }

}  // namespace

void FaceModel::validate() const {
  const Eigen::Index n3 = mean_shape.size();
  if (n3 == 0 || n3 % 3 != 0) {
    throw DimensionError("mean_shape length must be a positive multiple of 3");
  }
  const int v = num_vertices();
  check_basis(basis_id, n3, "basis_id");
  check_basis(basis_exp, n3, "basis_exp");
  check_basis(basis_tex, n3, "basis_tex");
  if (mean_albedo.size() != n3) throw DimensionError("mean_albedo length differs from mean_shape");
  if (uv_coords.rows() != v) throw DimensionError("uv_coords needs one row per vertex");
  for (Eigen::Index i = 0; i < uv_coords.rows(); ++i) {
    for (int k = 0; k < 2; ++k) {
      const double x = uv_coords(i, k);
      if (!(x >= 0.0 && x <= 1.0)) {
        throw InvalidArgument("uv coordinate of vertex " + std::to_string(i) +
                              " lies outside [0,1]^2");
      }
    }
  }
  for (Eigen::Index t = 0; t < triangles.rows(); ++t) {
    const int a = triangles(t, 0), b = triangles(t, 1), c = triangles(t, 2);
    for (int idx : {a, b, c}) {
      if (idx < 0 || idx >= v) {
        throw InvalidArgument("triangle " + std::to_string(t) + " references vertex " +
                              std::to_string(idx) + " out of range");
      }
    }
    if (a == b || b == c || a == c) {
      throw InvalidArgument("triangle " + std::to_string(t) + " is degenerate");
    }
  }
  if (static_cast<int>(landmark_indices.size()) != kLandmarkCount) {
    throw DimensionError("expected 68 landmark indices, got " +
                         std::to_string(landmark_indices.size()));
  }
  std::unordered_set<int> seen;
  for (int idx : landmark_indices) {
    if (idx < 0 || idx >= v) throw InvalidArgument("landmark index out of range");
    if (!seen.insert(idx).second) throw InvalidArgument("landmark indices must be distinct");
  }
}

ShapeCoeffs ShapeCoeffs::zeros(const FaceModel& model) {
  return {Eigen::VectorXd::Zero(model.num_id()), Eigen::VectorXd::Zero(model.num_exp()),
          Eigen::VectorXd::Zero(model.num_tex())};
}

Points3 to_points(const Eigen::VectorXd& flat) {
  const Eigen::Index v = flat.size() / 3;
  return Eigen::Map<const Points3>(flat.data(), v, 3);
}

Synthesized synthesize(const FaceModel& model, const ShapeCoeffs& coeffs) {
  check_coeffs(coeffs.id, model.basis_id, "basis_id");
  check_coeffs(coeffs.exp, model.basis_exp, "basis_exp");
  check_coeffs(coeffs.tex, model.basis_tex, "basis_tex");

  Eigen::VectorXd shape = model.mean_shape;
  shape.noalias() += model.basis_id * coeffs.id;
  shape.noalias() += model.basis_exp * coeffs.exp;
  Eigen::VectorXd albedo = model.mean_albedo;
  albedo.noalias() += model.basis_tex * coeffs.tex;

  Synthesized out;
  out.vertices = to_points(shape);
  out.albedo_unclamped = to_points(albedo);
  out.albedo = out.albedo_unclamped.cwiseMax(0.0).cwiseMin(1.0);
  return out;
}

ShapeCoeffs synthesize_backward(const FaceModel& model, const Synthesized& forward,
                                const Points3& d_vertices, const Points3& d_albedo) {
  const int v = model.num_vertices();
  if (d_vertices.rows() != v || d_albedo.rows() != v) {
    throw DimensionError("synthesize_backward: cotangent row count differs from model");
  }
  const Eigen::Map<const Eigen::VectorXd> dv(d_vertices.data(), 3 * v);
  Eigen::VectorXd da(3 * v);
  for (int i = 0; i < v; ++i) {
    for (int k = 0; k < 3; ++k) {
      const double a = forward.albedo_unclamped(i, k);
      da[3 * i + k] = (a >= 0.0 && a <= 1.0) ? d_albedo(i, k) : 0.0;
    }
  }
  ShapeCoeffs g;
  g.id = model.basis_id.transpose() * dv;
  g.exp = model.basis_exp.transpose() * dv;
  g.tex = model.basis_tex.transpose() * da;
  return g;
}

Points3 vertex_normals(const Points3& vertices, const Triangles& triangles) {
  const Eigen::Index v = vertices.rows();
  Points3 acc = Points3::Zero(v, 3);
  for (Eigen::Index t = 0; t < triangles.rows(); ++t) {
    const int a = triangles(t, 0), b = triangles(t, 1), c = triangles(t, 2);
    const Vec3 p0 = row3(vertices, a);
    // Cross product length is twice the area, so summing it area-weights.
    const Vec3 n = (row3(vertices, b) - p0).cross(row3(vertices, c) - p0);
    acc.row(a) += n.transpose();
    acc.row(b) += n.transpose();
    acc.row(c) += n.transpose();
  }
  Points3 out(v, 3);
  for (Eigen::Index i = 0; i < v; ++i) {
    const double len = acc.row(i).norm();
    if (len > 0.0) {
      out.row(i) = acc.row(i) / len;
    } else {
      out.row(i) << 0.0, 0.0, 1.0;
    }
  }
  return out;
}

Points3 vertex_normals_backward(const Points3& vertices, const Triangles& triangles,
                                const Points3& d_normals) {
  const Eigen::Index v = vertices.rows();
  Points3 acc = Points3::Zero(v, 3);
  for (Eigen::Index t = 0; t < triangles.rows(); ++t) {
    const int a = triangles(t, 0), b = triangles(t, 1), c = triangles(t, 2);
    const Vec3 p0 = row3(vertices, a);
    const Vec3 n = (row3(vertices, b) - p0).cross(row3(vertices, c) - p0);
    acc.row(a) += n.transpose();
    acc.row(b) += n.transpose();
    acc.row(c) += n.transpose();
  }
  // d/d(acc) of acc/|acc|.
  Points3 d_acc = Points3::Zero(v, 3);
  for (Eigen::Index i = 0; i < v; ++i) {
    const double len = acc.row(i).norm();
    if (len <= 0.0) continue;
    const Vec3 n = acc.row(i).transpose() / len;
    const Vec3 g = row3(d_normals, static_cast<int>(i));
    d_acc.row(i) = ((g - n * n.dot(g)) / len).transpose();
  }
  Points3 d_vertices = Points3::Zero(v, 3);
  for (Eigen::Index t = 0; t < triangles.rows(); ++t) {
    const int a = triangles(t, 0), b = triangles(t, 1), c = triangles(t, 2);
    const Vec3 e1 = row3(vertices, b) - row3(vertices, a);
    const Vec3 e2 = row3(vertices, c) - row3(vertices, a);
    const Vec3 g = row3(d_acc, a) + row3(d_acc, b) + row3(d_acc, c);
    // n = e1 x e2: dn/de1 applied to g is e2 x g, dn/de2 is g x e1.
    const Vec3 d_e1 = e2.cross(g);
    const Vec3 d_e2 = g.cross(e1);
    d_vertices.row(b) += d_e1.transpose();
    d_vertices.row(c) += d_e2.transpose();
    d_vertices.row(a) -= (d_e1 + d_e2).transpose();
  }
  return d_vertices;
}

double model_diameter(const FaceModel& model) {
  const Points3 p = to_points(model.mean_shape);
  const Vec3 extent = (p.colwise().maxCoeff() - p.colwise().minCoeff()).transpose();
  return extent.maxCoeff();
}

}  // namespace facefit
