// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "facefit/types.hpp"

#include <limits>
#include <vector>

namespace facefit {

/// x -> scale * R x + t.
struct SimilarityTransform {
  double scale = 1.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return scale * (rotation * p) + translation; }
  Points3 apply(const Points3& points) const;
  void validate() const;
};

struct IcpOptions {
  int max_iterations = 100;
  double tolerance = 1e-12;   // stop when the RMS residual changes less than this
};

struct IcpResult {
  SimilarityTransform transform;
  std::vector<double> residuals;   // RMS nearest-neighbour distance per iteration
  int iterations = 0;
};

/// Similarity ICP: exact nearest neighbours, closed-form similarity per
/// iteration. Starts from centroid alignment and the RMS-radius ratio.
/// Throws DegenerateInput for fewer than 4 or coplanar source points.
IcpResult icp_align(const Points3& source, const Points3& target, const IcpOptions& options = {});

/// Keeps vertices strictly closer than `radius` to `center` and the
/// triangles whose corners all survive. Throws EmptyResult if nothing is left.
Mesh crop_radius(const Mesh& mesh, const Vec3& center, double radius = 95.0);

double point_to_point_rmse(const Points3& a, const Points3& b);

enum class ClosestRegion { Interior, Edge, Vertex };

struct ClosestPoint {
  Vec3 point = Vec3::Zero();
  ClosestRegion region = ClosestRegion::Interior;
};

ClosestPoint closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                                       const Vec3& c);

struct PointToPlaneResult {
  double mean = 0.0;
  std::vector<double> distances;
};

/// Per source point: |n . (p - q)| with q the closest surface point and n its
/// face normal; plain |p - q| when q lies on an edge or a vertex.
PointToPlaneResult point_to_plane(const Points3& source, const Mesh& target);

/// Single-channel depth image, row-major.
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<double> data;
};

/// Mean absolute error after rescaling pred so its masked min/max match gt's.
/// Throws UndefinedResult when pred is constant over the mask.
double depth_error(const DepthImage& pred, const DepthImage& gt, const Mask& mask);

}  // namespace facefit
