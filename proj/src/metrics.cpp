// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#include "facefit/metrics.hpp"

#include "facefit/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>
#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace facefit {

namespace {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

using BPoint = bg::model::point<double, 3, bg::cs::cartesian>;
using BBox = bg::model::box<BPoint>;
using PointEntry = std::pair<BPoint, int>;
using BoxEntry = std::pair<BBox, int>;

BPoint to_bpoint(const Vec3& v) { return BPoint(v.x(), v.y(), v.z()); }

class PointIndex {
 public:
  explicit PointIndex(const Points3& points) {
    std::vector<PointEntry> entries;
    entries.reserve(points.rows());
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      entries.emplace_back(to_bpoint(points.row(i)), static_cast<int>(i));
    }
    tree_ = bgi::rtree<PointEntry, bgi::rstar<16>>(entries.begin(), entries.end());
  }

  int nearest(const Vec3& p) const {
    std::vector<PointEntry> hit;
    tree_.query(bgi::nearest(to_bpoint(p), 1), std::back_inserter(hit));
    return hit.front().second;
  }

 private:
  bgi::rtree<PointEntry, bgi::rstar<16>> tree_;
};

double box_distance(const BBox& box, const Vec3& p) {
  double d2 = 0.0;
  const double lo[3] = {bg::get<bg::min_corner, 0>(box), bg::get<bg::min_corner, 1>(box),
                        bg::get<bg::min_corner, 2>(box)};
  const double hi[3] = {bg::get<bg::max_corner, 0>(box), bg::get<bg::max_corner, 1>(box),
                        bg::get<bg::max_corner, 2>(box)};
  for (int k = 0; k < 3; ++k) {
    const double e = std::max({lo[k] - p[k], 0.0, p[k] - hi[k]});
    d2 += e * e;
  }
  return std::sqrt(d2);
}

void check_non_coplanar(const Points3& points, const char* what) {
  if (points.rows() < 4) {
    throw DegenerateInput(std::string(what) + ": need at least 4 points, got " +
                          std::to_string(points.rows()));
  }
  const Eigen::RowVector3d centroid = points.colwise().mean();
  const Eigen::MatrixXd centred = points.rowwise() - centroid;
  const Mat3 cov = centred.transpose() * centred / static_cast<double>(points.rows());
  const Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  const Vec3 ev = es.eigenvalues();   // ascending
  if (!(ev[2] > 0.0) || ev[0] <= 1e-12 * ev[2]) {
    throw DegenerateInput(std::string(what) + ": points are coplanar or collinear");
  }
}

double rms_radius(const Points3& p) {
  const Eigen::RowVector3d c = p.colwise().mean();
  return std::sqrt((p.rowwise() - c).rowwise().squaredNorm().mean());
}

}  // namespace

Points3 SimilarityTransform::apply(const Points3& points) const {
  Points3 out = scale * points * rotation.transpose();
  out.rowwise() += translation.transpose();
  return out;
}

void SimilarityTransform::validate() const {
  if (!(scale > 0.0)) throw InvalidArgument("similarity scale must be positive");
  if (std::abs(rotation.determinant() - 1.0) > 1e-9 ||
      !(rotation.transpose() * rotation).isApprox(Mat3::Identity(), 1e-9)) {
    throw InvalidArgument("similarity rotation must be orthonormal with det 1");
  }
}

IcpResult icp_align(const Points3& source, const Points3& target, const IcpOptions& options) {
  check_non_coplanar(source, "icp_align source");
  if (target.rows() == 0) throw EmptyResult("icp_align: empty target");
  const PointIndex index(target);
  const auto n = static_cast<int>(source.rows());

  IcpResult result;
  SimilarityTransform& t = result.transform;
  t.scale = rms_radius(target) / rms_radius(source);
  t.translation = target.colwise().mean().transpose() -
                  t.scale * source.colwise().mean().transpose();

  Eigen::Matrix3Xd src = source.transpose();
  Eigen::Matrix3Xd dst(3, n);
  double previous = std::numeric_limits<double>::infinity();
  SimilarityTransform accepted = t;
  for (int it = 0; it < options.max_iterations; ++it) {
    const Points3 moved = t.apply(source);
    std::vector<double> d2(n);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      const int j = index.nearest(moved.row(i));
      dst.col(i) = target.row(j).transpose();
      d2[i] = (moved.row(i) - target.row(j)).squaredNorm();
    }
    double sum = 0.0;
    for (double v : d2) sum += v;
    const double rms = std::sqrt(sum / n);
    // A step that got worse (only possible through rounding) is rolled back.
    if (rms > previous) {
      t = accepted;
      break;
    }
    accepted = t;
    result.residuals.push_back(rms);
    result.iterations = it + 1;
    if (previous - rms < options.tolerance) break;
    previous = rms;

    const Eigen::Matrix4d m = Eigen::umeyama(src, dst, true);
    const Mat3 sr = m.topLeftCorner<3, 3>();
    SimilarityTransform next;
    next.scale = std::cbrt(sr.determinant());
    next.rotation = sr / next.scale;
    next.translation = m.topRightCorner<3, 1>();
    t = next;
  }
  return result;
}

Mesh crop_radius(const Mesh& mesh, const Vec3& center, double radius) {
  if (std::isnan(radius) || radius < 0.0) throw InvalidArgument("crop radius must be >= 0");
  const bool has_uv = mesh.uvs.rows() == mesh.vertices.rows() && mesh.uvs.rows() > 0;
  std::vector<int> remap(mesh.vertices.rows(), -1);
  int kept = 0;
  for (Eigen::Index i = 0; i < mesh.vertices.rows(); ++i) {
    if ((mesh.vertices.row(i).transpose() - center).norm() < radius) remap[i] = kept++;
  }
  if (kept == 0) {
    throw EmptyResult("crop_radius: no vertex within " + std::to_string(radius) +
                      " of the centre");
  }
  Mesh out;
  out.vertices.resize(kept, 3);
  if (has_uv) out.uvs.resize(kept, 2);
  for (Eigen::Index i = 0; i < mesh.vertices.rows(); ++i) {
    if (remap[i] < 0) continue;
    out.vertices.row(remap[i]) = mesh.vertices.row(i);
    if (has_uv) out.uvs.row(remap[i]) = mesh.uvs.row(i);
  }
  std::vector<int> tris;
  for (Eigen::Index t = 0; t < mesh.triangles.rows(); ++t) {
    const int a = remap[mesh.triangles(t, 0)], b = remap[mesh.triangles(t, 1)],
              c = remap[mesh.triangles(t, 2)];
    if (a < 0 || b < 0 || c < 0) continue;
    tris.insert(tris.end(), {a, b, c});
  }
  out.triangles.resize(static_cast<Eigen::Index>(tris.size() / 3), 3);
  for (std::size_t i = 0; i < tris.size(); ++i) out.triangles(i / 3, i % 3) = tris[i];
  return out;
}

double point_to_point_rmse(const Points3& a, const Points3& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("point_to_point_rmse: " + std::to_string(a.rows()) + " vs " +
                         std::to_string(b.rows()) + " points");
  }
  if (a.rows() == 0) throw EmptyResult("point_to_point_rmse: no points");
  return std::sqrt((a - b).rowwise().squaredNorm().mean());
}

ClosestPoint closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                                       const Vec3& c) {
  // Voronoi-region walk over vertices, edges and the face.
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return {a, ClosestRegion::Vertex};
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return {b, ClosestRegion::Vertex};
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    return {a + ab * (d1 / (d1 - d3)), ClosestRegion::Edge};
  }
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return {c, ClosestRegion::Vertex};
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    return {a + ac * (d2 / (d2 - d6)), ClosestRegion::Edge};
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return {b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6))), ClosestRegion::Edge};
  }
  const double denom = 1.0 / (va + vb + vc);
  return {a + ab * (vb * denom) + ac * (vc * denom), ClosestRegion::Interior};
}

PointToPlaneResult point_to_plane(const Points3& source, const Mesh& target) {
  if (target.triangles.rows() == 0) throw EmptyResult("point_to_plane: target has no triangles");
  std::vector<BoxEntry> boxes;
  boxes.reserve(target.triangles.rows());
  for (Eigen::Index t = 0; t < target.triangles.rows(); ++t) {
    Vec3 lo = target.vertices.row(target.triangles(t, 0));
    Vec3 hi = lo;
    for (int k = 1; k < 3; ++k) {
      const Vec3 v = target.vertices.row(target.triangles(t, k));
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
    boxes.emplace_back(BBox(to_bpoint(lo), to_bpoint(hi)), static_cast<int>(t));
  }
  const bgi::rtree<BoxEntry, bgi::rstar<16>> tree(boxes.begin(), boxes.end());

  PointToPlaneResult result;
  const auto n = static_cast<int>(source.rows());
  result.distances.assign(n, 0.0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const Vec3 p = source.row(i);
    double best = std::numeric_limits<double>::infinity();
    int best_tri = -1;
    ClosestPoint best_cp;
    // Boxes arrive in increasing distance; stop once none can beat `best`.
    for (auto it = tree.qbegin(bgi::nearest(to_bpoint(p), static_cast<unsigned>(tree.size())));
         it != tree.qend(); ++it) {
      if (box_distance(it->first, p) > best) break;
      const int t = it->second;
      const Vec3 a = target.vertices.row(target.triangles(t, 0));
      const Vec3 b = target.vertices.row(target.triangles(t, 1));
      const Vec3 c = target.vertices.row(target.triangles(t, 2));
      const ClosestPoint cp = closest_point_on_triangle(p, a, b, c);
      const double d = (p - cp.point).norm();
      if (d < best || (d == best && t < best_tri)) {
        best = d;
        best_tri = t;
        best_cp = cp;
      }
    }
    double dist = best;
    if (best_cp.region == ClosestRegion::Interior) {
      const Vec3 a = target.vertices.row(target.triangles(best_tri, 0));
      const Vec3 b = target.vertices.row(target.triangles(best_tri, 1));
      const Vec3 c = target.vertices.row(target.triangles(best_tri, 2));
      const Vec3 normal = (b - a).cross(c - a);
      const double len = normal.norm();
      if (len > 0.0) dist = std::abs((normal / len).dot(p - best_cp.point));
    }
    result.distances[i] = dist;
  }
  double sum = 0.0;
  for (double d : result.distances) sum += d;
  result.mean = n > 0 ? sum / n : 0.0;
  return result;
}

double depth_error(const DepthImage& pred, const DepthImage& gt, const Mask& mask) {
  if (pred.width != gt.width || pred.height != gt.height ||
      pred.data.size() != gt.data.size() || mask.size() != gt.data.size() ||
      gt.data.size() != static_cast<std::size_t>(gt.width) * gt.height) {
    throw DimensionError("depth_error: prediction, ground truth and mask sizes differ");
  }
  double pmin = std::numeric_limits<double>::infinity(), pmax = -pmin;
  double gmin = pmin, gmax = -pmin;
  std::size_t count = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    pmin = std::min(pmin, pred.data[i]);
    pmax = std::max(pmax, pred.data[i]);
    gmin = std::min(gmin, gt.data[i]);
    gmax = std::max(gmax, gt.data[i]);
    ++count;
  }
  if (count == 0) throw EmptyResult("depth_error: mask selects no pixel");
  if (!(pmax > pmin)) throw UndefinedResult("depth_error: prediction is constant over the mask");
  const double scale = (gmax - gmin) / (pmax - pmin);
  double sum = 0.0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    sum += std::abs((pred.data[i] - pmin) * scale + gmin - gt.data[i]);
  }
  return sum / static_cast<double>(count);
}

}  // namespace facefit
