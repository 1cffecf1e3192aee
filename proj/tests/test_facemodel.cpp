// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"

#include "facefit/errors.hpp"
#include "facefit/facemodel.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <random>

namespace facefit {
namespace {

using testing::toy_model;

// Icosahedron refined by midpoint subdivision, projected to the unit sphere.
Mesh icosphere(int levels) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
                         {0, -1, t}, {0, 1, t},  {0, -1, -t}, {0, 1, -t},
                         {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  std::vector<std::array<int, 3>> f = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
      {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (auto& p : v) p.normalize();
  for (int l = 0; l < levels; ++l) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      return mid[key] = static_cast<int>(v.size()) - 1;
    };
    std::vector<std::array<int, 3>> next;
    for (const auto& tri : f) {
      const int a = midpoint(tri[0], tri[1]), b = midpoint(tri[1], tri[2]),
                c = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], a, c});
      next.push_back({tri[1], b, a});
      next.push_back({tri[2], c, b});
      next.push_back({a, b, c});
    }
    f = std::move(next);
  }
  Mesh m;
  m.vertices.resize(static_cast<Eigen::Index>(v.size()), 3);
  for (std::size_t i = 0; i < v.size(); ++i) m.vertices.row(i) = v[i].transpose();
  m.triangles.resize(static_cast<Eigen::Index>(f.size()), 3);
  for (std::size_t i = 0; i < f.size(); ++i) m.triangles.row(i) << f[i][0], f[i][1], f[i][2];
  return m;
}

ShapeCoeffs random_coeffs(const FaceModel& model, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  ShapeCoeffs c = ShapeCoeffs::zeros(model);
  for (Eigen::VectorXd* v : {&c.id, &c.exp, &c.tex}) {
    for (Eigen::Index i = 0; i < v->size(); ++i) (*v)[i] = n(rng);
  }
  return c;
}

TEST(Synthesize, ZeroCoefficientsGiveMeanShape) {
  const FaceModel& m = toy_model();
  const Synthesized s = synthesize(m, ShapeCoeffs::zeros(m));
  for (int i = 0; i < m.num_vertices(); ++i) {
    for (int k = 0; k < 3; ++k) EXPECT_EQ(s.vertices(i, k), m.mean_shape[3 * i + k]);
  }
}

TEST(Synthesize, UnitIdentityCoefficientAddsFirstColumn) {
  const FaceModel& m = toy_model();
  ShapeCoeffs c = ShapeCoeffs::zeros(m);
  c.id[0] = 1.0;
  const Synthesized s = synthesize(m, c);
  for (int i = 0; i < m.num_vertices(); ++i) {
    for (int k = 0; k < 3; ++k) {
      EXPECT_NEAR(s.vertices(i, k) - m.mean_shape[3 * i + k], m.basis_id(3 * i + k, 0), 1e-12);
    }
  }
}

TEST(Synthesize, MatchesLoopOracle) {
  const FaceModel m = generate_toy_model(7, 12, 3, 2, 4);
  const ShapeCoeffs c = random_coeffs(m, 11, 0.5);
  const Synthesized s = synthesize(m, c);
  for (int i = 0; i < m.num_vertices(); ++i) {
    for (int k = 0; k < 3; ++k) {
      const int row = 3 * i + k;
      double v = m.mean_shape[row];
      for (int j = 0; j < m.num_id(); ++j) v += m.basis_id(row, j) * c.id[j];
      for (int j = 0; j < m.num_exp(); ++j) v += m.basis_exp(row, j) * c.exp[j];
      double a = m.mean_albedo[row];
      for (int j = 0; j < m.num_tex(); ++j) a += m.basis_tex(row, j) * c.tex[j];
      a = std::clamp(a, 0.0, 1.0);
      EXPECT_NEAR(s.vertices(i, k), v, 1e-9 * std::max(1.0, std::abs(v)));
      EXPECT_NEAR(s.albedo(i, k), a, 1e-12);
    }
  }
}

TEST(Synthesize, DimensionMismatchNamesBasis) {
  const FaceModel& m = toy_model();
  ShapeCoeffs c = ShapeCoeffs::zeros(m);
  c.exp.resize(2);
  try {
    synthesize(m, c);
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    EXPECT_NE(std::string(e.what()).find("exp"), std::string::npos) << e.what();
  }
}

TEST(Synthesize, Linearity) {
  const FaceModel& m = toy_model();
  const ShapeCoeffs c1 = random_coeffs(m, 1), c2 = random_coeffs(m, 2);
  const double a = 0.7, b = -1.3;
  ShapeCoeffs mix = ShapeCoeffs::zeros(m);
  mix.id = a * c1.id + b * c2.id;
  mix.exp = a * c1.exp + b * c2.exp;
  mix.tex = a * c1.tex + b * c2.tex;
  const Points3 mean = to_points(m.mean_shape);
  const Points3 d1 = synthesize(m, c1).vertices - mean;
  const Points3 d2 = synthesize(m, c2).vertices - mean;
  const Points3 dm = synthesize(m, mix).vertices - mean;
  const Points3 expect = a * d1 + b * d2;
  EXPECT_LE((dm - expect).cwiseAbs().maxCoeff(), 1e-9 * expect.cwiseAbs().maxCoeff());
}

TEST(Synthesize, BackwardMatchesFiniteDifferences) {
  const FaceModel m = generate_toy_model(3, 10, 3, 2, 3);
  ShapeCoeffs c = random_coeffs(m, 5, 0.2);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n;
  Points3 wv(m.num_vertices(), 3), wa(m.num_vertices(), 3);
  for (Eigen::Index i = 0; i < wv.size(); ++i) {
    wv.data()[i] = n(rng);
    wa.data()[i] = n(rng);
  }
  // Quadratic in vertices, linear in albedo.
  auto f = [&](const ShapeCoeffs& cc) {
    const Synthesized s = synthesize(m, cc);
    return 0.5 * s.vertices.cwiseProduct(s.vertices).cwiseProduct(wv).sum() / 1e3 +
           s.albedo.cwiseProduct(wa).sum();
  };
  const Synthesized s = synthesize(m, c);
  const ShapeCoeffs g =
      synthesize_backward(m, s, s.vertices.cwiseProduct(wv) / 1e3, wa);
  for (auto [vec, grad] : {std::pair{&c.id, &g.id}, {&c.exp, &g.exp}, {&c.tex, &g.tex}}) {
    for (Eigen::Index j = 0; j < vec->size(); ++j) {
      const double x0 = (*vec)[j];
      const double fd = testing::central_difference(
          [&](double x) {
            (*vec)[j] = x;
            const double out = f(c);
            (*vec)[j] = x0;
            return out;
          },
          x0);
      EXPECT_LE(testing::relative_error((*grad)[j], fd), 1e-4) << j;
    }
  }
}

TEST(VertexNormals, FlatSquareFacesUp) {
  Points3 v(4, 3);
  v << 0, 0, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0;
  Triangles t(2, 3);
  t << 0, 1, 2, 0, 2, 3;
  const Points3 n = vertex_normals(v, t);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(Vec3(n.row(i)), Vec3(0, 0, 1));
}

TEST(VertexNormals, IcosphereIsRadial) {
  const Mesh s = icosphere(3);
  const Points3 n = vertex_normals(s.vertices, s.triangles);
  for (Eigen::Index i = 0; i < n.rows(); ++i) {
    const Vec3 radial = s.vertices.row(i).transpose().normalized();
    const double angle = std::acos(std::clamp(radial.dot(n.row(i).transpose()), -1.0, 1.0));
    EXPECT_LT(angle, 0.05) << i;
  }
}

TEST(VertexNormals, IsolatedVertexFallsBack) {
  Points3 v(4, 3);
  v << 0, 0, 0, 1, 0, 0, 0, 1, 0, 5, 5, 5;
  Triangles t(1, 3);
  t << 0, 1, 2;
  EXPECT_EQ(Vec3(vertex_normals(v, t).row(3)), Vec3(0, 0, 1));
}

TEST(VertexNormals, BackwardMatchesFiniteDifferences) {
  const Mesh s = icosphere(1);
  Points3 v = s.vertices;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] += 0.05 * n(rng);
  Points3 w(v.rows(), 3);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = n(rng);
  const Points3 g = vertex_normals_backward(v, s.triangles, w);
  for (Eigen::Index i = 0; i < v.size(); i += 3) {
    const double x0 = v.data()[i];
    const double fd = testing::central_difference(
        [&](double x) {
          v.data()[i] = x;
          const double out = vertex_normals(v, s.triangles).cwiseProduct(w).sum();
          v.data()[i] = x0;
          return out;
        },
        x0, 1e-6);
    EXPECT_LE(testing::relative_error(g.data()[i], fd), 1e-4) << i;
  }
}

TEST(ToyModel, SameSeedIsBitIdentical) {
  const FaceModel a = generate_toy_model(5, 16, 4, 3, 2);
  const FaceModel b = generate_toy_model(5, 16, 4, 3, 2);
  EXPECT_EQ(a.mean_shape, b.mean_shape);
  EXPECT_EQ(a.basis_id, b.basis_id);
  EXPECT_EQ(a.basis_exp, b.basis_exp);
  EXPECT_EQ(a.basis_tex, b.basis_tex);
  EXPECT_EQ(a.mean_albedo, b.mean_albedo);
  EXPECT_EQ(a.triangles, b.triangles);
  EXPECT_EQ(a.uv_coords, b.uv_coords);
  EXPECT_EQ(a.landmark_indices, b.landmark_indices);
  EXPECT_EQ(model_fingerprint(a), model_fingerprint(b));
}

TEST(ToyModel, SatisfiesInvariantsOverSeeds) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const FaceModel m = generate_toy_model(seed, 9 + static_cast<int>(seed) * 3, 2, 1, 3);
    EXPECT_NO_THROW(m.validate()) << seed;
  }
  EXPECT_NO_THROW(generate_toy_model(1, 32, 10, 5, 10).validate());
}

TEST(ToyModel, FrontFacingNormals) {
  for (std::uint64_t seed : {0, 1, 2}) {
    const FaceModel m = generate_toy_model(seed, 20, 3, 3, 3);
    const Points3 n = vertex_normals(synthesize(m, ShapeCoeffs::zeros(m)).vertices, m.triangles);
    EXPECT_GT(n.col(2).minCoeff(), 0.0) << seed;
  }
}

TEST(ToyModel, UnitCoefficientDisplacementIsBounded) {
  const FaceModel& m = toy_model();
  const double limit = 0.05 * model_diameter(m) + 1e-9;
  for (int j = 0; j < m.num_id(); ++j) {
    EXPECT_LE(to_points(m.basis_id.col(j)).rowwise().norm().maxCoeff(), limit);
  }
  for (int j = 0; j < m.num_exp(); ++j) {
    EXPECT_LE(to_points(m.basis_exp.col(j)).rowwise().norm().maxCoeff(), limit);
  }
}

TEST(ToyModel, RejectsBadParameters) {
  EXPECT_THROW(generate_toy_model(0, 4, 1, 1, 1), InvalidArgument);
  EXPECT_THROW(generate_toy_model(0, 16, 0, 1, 1), InvalidArgument);
}

TEST(ModelCodec, RoundTrip) {
  const auto dir = testing::temp_dir("model_codec");
  const FaceModel m = generate_toy_model(2, 14, 3, 2, 2);
  write_model(dir / "m.fmm", m);
  const FaceModel r = read_model(dir / "m.fmm");
  // Stored as float32.
  EXPECT_EQ(r.mean_shape, m.mean_shape.cast<float>().cast<double>());
  EXPECT_EQ(r.basis_id, m.basis_id.cast<float>().cast<double>());
  EXPECT_EQ(r.basis_exp, m.basis_exp.cast<float>().cast<double>());
  EXPECT_EQ(r.basis_tex, m.basis_tex.cast<float>().cast<double>());
  EXPECT_EQ(r.triangles, m.triangles);
  EXPECT_EQ(r.landmark_indices, m.landmark_indices);
  write_model(dir / "r.fmm", r);
  const FaceModel rr = read_model(dir / "r.fmm");
  EXPECT_EQ(rr.mean_shape, r.mean_shape);
  EXPECT_EQ(rr.basis_id, r.basis_id);
  EXPECT_EQ(rr.uv_coords, r.uv_coords);
  EXPECT_EQ(rr.mean_albedo, r.mean_albedo);
}

std::vector<char> slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

void spit(const std::filesystem::path& p, const std::vector<char>& bytes) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

FormatError::Kind read_error_kind(const std::filesystem::path& p) {
  try {
    read_model(p);
  } catch (const FormatError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no FormatError";
  return FormatError::Kind::Io;
}

TEST(ModelCodec, DistinctErrors) {
  const auto dir = testing::temp_dir("model_codec_err");
  write_model(dir / "m.fmm", generate_toy_model(2, 10, 1, 1, 1));
  const std::vector<char> good = slurp(dir / "m.fmm");

  auto bad = good;
  bad[0] = 'X';
  spit(dir / "magic.fmm", bad);
  EXPECT_EQ(read_error_kind(dir / "magic.fmm"), FormatError::Kind::MalformedHeader);

  bad = good;
  bad.pop_back();
  spit(dir / "short.fmm", bad);
  EXPECT_EQ(read_error_kind(dir / "short.fmm"), FormatError::Kind::TruncatedPayload);

  bad = good;
  bad[bad.size() / 2] ^= 0x40;
  spit(dir / "flip.fmm", bad);
  EXPECT_EQ(read_error_kind(dir / "flip.fmm"), FormatError::Kind::ChecksumMismatch);
}

}  // namespace
}  // namespace facefit
