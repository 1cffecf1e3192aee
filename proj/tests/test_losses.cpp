// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"

#include "facefit/errors.hpp"
#include "facefit/losses.hpp"
#include "facefit/reference.hpp"
#include "facefit/render.hpp"

#include <gtest/gtest.h>

#include <random>

namespace facefit {
namespace {

using testing::toy_model;
using testing::toy_scene;

ImageBuffer random_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ImageBuffer img(w, h);
  for (double& v : img.data) v = u(rng);
  return img;
}

Mask random_mask(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Mask m(n);
  for (auto& v : m) v = (rng() % 3) != 0;
  return m;
}

Points2 random_landmarks(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 30.0);
  Points2 p(kLandmarkCount, 2);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = n(rng);
  return p;
}

UvMap normal_map(int w, int h, const Vec3& n) {
  UvMap m(w, h, 3, UvSpace::View);
  for (std::size_t t = 0; t < m.texel_count(); ++t) {
    m.set_vec3(t, n);
    m.mask[t] = 1;
  }
  return m;
}

TEST(Photometric, IdenticalIsZero) {
  const ImageBuffer a = random_image(16, 12, 1);
  EXPECT_EQ(photometric_loss(a, a, Mask(16 * 12, 1)), 0.0);
}

TEST(Photometric, ConstantOffset) {
  const ImageBuffer a = random_image(16, 12, 2);
  ImageBuffer b = a;
  for (std::size_t p = 0; p < b.pixel_count(); ++p) b.data[3 * p] += 0.3;
  EXPECT_NEAR(photometric_loss(a, b, Mask(16 * 12, 1)), 0.3, 1e-12);
}

TEST(Photometric, EmptyMaskIsZero) {
  EXPECT_EQ(photometric_loss(random_image(4, 4, 1), random_image(4, 4, 2), Mask(16, 0)), 0.0);
}

TEST(Photometric, MatchesLoopOracle) {
  const ImageBuffer a = random_image(37, 23, 3), b = random_image(37, 23, 4);
  const Mask m = random_mask(37 * 23, 5);
  double sum = 0.0;
  int n = 0;
  for (int r = 0; r < 23; ++r) {
    for (int c = 0; c < 37; ++c) {
      if (!m[r * 37 + c]) continue;
      double e = 0.0;
      for (int ch = 0; ch < 3; ++ch) e += std::pow(a.at(r, c, ch) - b.at(r, c, ch), 2);
      sum += std::sqrt(e);
      ++n;
    }
  }
  EXPECT_NEAR(photometric_loss(a, b, m), sum / n, 1e-9);
  EXPECT_NEAR(reference::photometric_loss_serial(a, b, m), sum / n, 1e-9);
}

TEST(Photometric, ShapeMismatch) {
  EXPECT_THROW(photometric_loss(ImageBuffer(4, 4), ImageBuffer(4, 5), Mask(16, 1)),
               DimensionError);
}

TEST(Photometric, BackwardMatchesFiniteDifferences) {
  const ImageBuffer a = random_image(8, 6, 6);
  ImageBuffer b = random_image(8, 6, 7);
  const Mask m = random_mask(48, 8);
  const ImageBuffer g = photometric_loss_backward(a, b, m);
  for (std::size_t i = 0; i < b.data.size(); ++i) {
    const double x0 = b.data[i];
    const double fd = testing::central_difference(
        [&](double x) {
          b.data[i] = x;
          const double out = photometric_loss(a, b, m);
          b.data[i] = x0;
          return out;
        },
        x0, 1e-6);
    if (!m[i / 3]) {
      EXPECT_EQ(g.data[i], 0.0);
    } else {
      EXPECT_LE(testing::relative_error(g.data[i], fd), 1e-5) << i;
    }
  }
}

TEST(Photometric, ZeroResidualHasZeroSubgradient) {
  const ImageBuffer a = random_image(4, 4, 9);
  const ImageBuffer g = photometric_loss_backward(a, a, Mask(16, 1));
  for (double v : g.data) EXPECT_EQ(v, 0.0);
}

TEST(Landmark, IdenticalIsZero) {
  const Points2 p = random_landmarks(1);
  EXPECT_EQ(landmark_loss(p, p), 0.0);
}

TEST(Landmark, ThreeFourFive) {
  const Points2 p = random_landmarks(2);
  Points2 q = p;
  q.col(0).array() += 3.0;
  q.col(1).array() += 4.0;
  EXPECT_NEAR(landmark_loss(p, q), 25.0, 1e-9);
}

TEST(Landmark, MatchesLoopOracleAndGradient) {
  const Points2 p = random_landmarks(3);
  Points2 q = random_landmarks(4);
  double s = 0.0;
  for (int i = 0; i < kLandmarkCount; ++i) {
    s += std::pow(p(i, 0) - q(i, 0), 2) + std::pow(p(i, 1) - q(i, 1), 2);
  }
  EXPECT_NEAR(landmark_loss(p, q), s / kLandmarkCount, 1e-9 * s);
  const Points2 g = landmark_loss_backward(p, q);
  for (Eigen::Index i = 0; i < q.size(); i += 7) {
    const double x0 = q.data()[i];
    const double fd = testing::central_difference(
        [&](double x) {
          q.data()[i] = x;
          const double out = landmark_loss(p, q);
          q.data()[i] = x0;
          return out;
        },
        x0);
    EXPECT_LE(testing::relative_error(g.data()[i], fd), 1e-6);
  }
}

TEST(Landmark, LengthMismatch) {
  EXPECT_THROW(landmark_loss(Points2::Zero(68, 2), Points2::Zero(67, 2)), DimensionError);
}

TEST(Perceptual, IdenticalIsZero) {
  const LinearFeatureExtractor ex;
  const ImageBuffer a = random_image(64, 64, 1);
  EXPECT_EQ(perceptual_loss(a, a, ex), 0.0);
  EXPECT_EQ(ex.feature_size(), 128);
}

TEST(Perceptual, SinglePixelChangeIsDetected) {
  const LinearFeatureExtractor ex;
  const ImageBuffer a = random_image(64, 64, 2);
  for (int p : {0, 517, 4095}) {
    ImageBuffer b = a;
    for (int c = 0; c < 3; ++c) b.data[3 * p + c] = std::min(1.0, b.data[3 * p + c] + 0.5);
    EXPECT_GT(perceptual_loss(a, b, ex), 0.0) << p;
  }
}

TEST(Perceptual, BackwardMatchesFiniteDifferences) {
  const LinearFeatureExtractor ex;
  const ImageBuffer a = random_image(40, 36, 3);
  ImageBuffer b = random_image(40, 36, 4);
  const ImageBuffer g = perceptual_loss_backward(a, b, ex);
  for (std::size_t i = 0; i < b.data.size(); i += 97) {
    const double x0 = b.data[i];
    const double fd = testing::central_difference(
        [&](double x) {
          b.data[i] = x;
          const double out = perceptual_loss(a, b, ex);
          b.data[i] = x0;
          return out;
        },
        x0);
    EXPECT_LE(testing::relative_error(g.data[i], fd), 1e-4) << i;
  }
}

TEST(Regularizer, ZeroCoefficients) {
  EXPECT_EQ(param_regularizer(ShapeCoeffs::zeros(toy_model()), 1.3, 1.0, 1.3), 0.0);
}

TEST(Regularizer, UnitIdentityUsesShapeWeight) {
  ShapeCoeffs c = ShapeCoeffs::zeros(toy_model());
  c.id[0] = 1.0;
  const CoarseWeights w;
  EXPECT_DOUBLE_EQ(param_regularizer(c, w.omega_s, w.omega_e, w.omega_t), 1.3);
}

TEST(Regularizer, MatchesLoopOracleAndGradient) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  ShapeCoeffs c = ShapeCoeffs::zeros(toy_model());
  for (Eigen::VectorXd* v : {&c.id, &c.exp, &c.tex}) {
    for (Eigen::Index i = 0; i < v->size(); ++i) (*v)[i] = n(rng);
  }
  double s = 0.0;
  for (Eigen::Index i = 0; i < c.id.size(); ++i) s += 1.3 * c.id[i] * c.id[i];
  for (Eigen::Index i = 0; i < c.exp.size(); ++i) s += 0.7 * c.exp[i] * c.exp[i];
  for (Eigen::Index i = 0; i < c.tex.size(); ++i) s += 2.1 * c.tex[i] * c.tex[i];
  EXPECT_NEAR(param_regularizer(c, 1.3, 0.7, 2.1), s, 1e-12 * s);
  const ShapeCoeffs g = param_regularizer_backward(c, 1.3, 0.7, 2.1);
  EXPECT_LE((g.id - 2.6 * c.id).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((g.exp - 1.4 * c.exp).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((g.tex - 4.2 * c.tex).cwiseAbs().maxCoeff(), 1e-12);
}

struct CoarseSetup {
  SceneParams params;
  ImageBuffer image;
  Points2 landmarks;
};

CoarseSetup self_render(int size = 64) {
  const FaceModel& m = toy_model();
  CoarseSetup s;
  s.params = toy_scene(size);
  s.params.coeffs.id[0] = 0.3;
  s.params.coeffs.exp[1] = -0.2;
  s.params.coeffs.tex[2] = 0.4;
  const FaceRender r = render_face(m, s.params, size, size);
  s.image = r.output.color;
  s.landmarks = project_landmarks(s.params.pose, r.synth.vertices, m.landmark_indices);
  return s;
}

TEST(CoarseLoss, ZeroWeightsGiveZero) {
  const CoarseSetup s = self_render();
  SceneParams p = s.params;
  p.pose.tx += 3.0;
  const CoarseWeights zero{0, 0, 0, 0, 0, 0, 0};
  const CoarseEvaluation e =
      coarse_loss(toy_model(), p, s.image, s.landmarks, zero, LinearFeatureExtractor());
  EXPECT_EQ(e.value, 0.0);
  EXPECT_EQ(e.gradient.to_vector().cwiseAbs().maxCoeff(), 0.0);
}

TEST(CoarseLoss, SelfRenderIsRegularizerOnly) {
  const CoarseSetup s = self_render();
  const CoarseWeights w;
  const CoarseEvaluation e =
      coarse_loss(toy_model(), s.params, s.image, s.landmarks, w, LinearFeatureExtractor());
  EXPECT_EQ(e.value, w.w4 * param_regularizer(s.params.coeffs, w.omega_s, w.omega_e, w.omega_t));
}

TEST(CoarseLoss, EqualsSumOfTerms) {
  const FaceModel& m = toy_model();
  const CoarseSetup s = self_render();
  SceneParams p = s.params;
  p.pose.rx += 0.05;
  p.pose.tx -= 2.0;
  p.lighting.coeffs(0, 1) *= 1.1;
  const CoarseWeights w;
  const LinearFeatureExtractor ex;
  const CoarseEvaluation e = coarse_loss(m, p, s.image, s.landmarks, w, ex);
  const FaceRender r = render_face(m, p, 64, 64);
  const double expect =
      w.w1 * photometric_loss(s.image, r.output.color, r.output.mask) +
      w.w2 * landmark_loss(s.landmarks,
                           project_landmarks(p.pose, r.synth.vertices, m.landmark_indices)) +
      w.w3 * perceptual_loss(s.image, r.output.color, ex) +
      w.w4 * param_regularizer(p.coeffs, w.omega_s, w.omega_e, w.omega_t);
  EXPECT_NEAR(e.value, expect, 1e-9 * expect);
}

TEST(CoarseLoss, GradientLinearInWeights) {
  const FaceModel& m = toy_model();
  const CoarseSetup s = self_render();
  SceneParams p = s.params;
  p.pose.ry += 0.05;
  const LinearFeatureExtractor ex;
  CoarseWeights w;
  auto grad = [&](double w1) {
    w.w1 = w1;
    return coarse_loss(m, p, s.image, s.landmarks, w, ex).gradient.to_vector();
  };
  const Eigen::VectorXd g0 = grad(0.0), g1 = grad(1.0), g3 = grad(3.0);
  const Eigen::VectorXd expect = 3.0 * (g1 - g0);
  EXPECT_LE((g3 - g0 - expect).cwiseAbs().maxCoeff(), 1e-9 * expect.cwiseAbs().maxCoeff());
}

TEST(CoarseLoss, LandmarkCountMismatch) {
  const CoarseSetup s = self_render();
  EXPECT_THROW(coarse_loss(toy_model(), s.params, s.image, Points2::Zero(5, 2), CoarseWeights{},
                           LinearFeatureExtractor()),
               DimensionError);
}

TEST(Smoothness, ConstantFieldIsZero) {
  const UvMap n = normal_map(6, 5, Vec3(0, 0, -1));
  UvMap d(6, 5, 1, UvSpace::Scalar);
  std::fill(d.data.begin(), d.data.end(), 0.7);
  std::fill(d.mask.begin(), d.mask.end(), 1);
  EXPECT_EQ(smoothness_loss(n, n, d, d.mask, 20, 10), 0.0);
}

TEST(Smoothness, StepEdgeCountsBothOrderings) {
  const UvMap n = normal_map(2, 1, Vec3(0, 0, -1));
  UvMap d(2, 1, 1, UvSpace::Scalar);
  const double h = 0.35;
  d.data = {0.0, h};
  d.mask = {1, 1};
  EXPECT_NEAR(smoothness_loss(n, n, d, d.mask, 20, 10), 2 * 10 * h * h, 1e-15);
}

TEST(Smoothness, BackwardMatchesFiniteDifferences) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  const UvMap nc = normal_map(5, 4, Vec3(0, 0, -1));
  UvMap nd = nc;
  for (double& v : nd.data) v += 0.1 * g(rng);
  UvMap d(5, 4, 1, UvSpace::Scalar);
  for (double& v : d.data) v = g(rng);
  d.mask = random_mask(20, 7);
  const UvLossGradient grad = smoothness_loss_backward(nc, nd, d, d.mask, 20, 10);
  for (std::size_t i = 0; i < d.data.size(); ++i) {
    const double x0 = d.data[i];
    const double fd = testing::central_difference(
        [&](double x) {
          d.data[i] = x;
          const double out = smoothness_loss(nc, nd, d, d.mask, 20, 10);
          d.data[i] = x0;
          return out;
        },
        x0);
    EXPECT_NEAR(grad.d_displacement.data[i], fd, 1e-6 * std::max(1.0, std::abs(fd)));
  }
  for (std::size_t i = 0; i < nd.data.size(); ++i) {
    const double x0 = nd.data[i];
    const double fd = testing::central_difference(
        [&](double x) {
          nd.data[i] = x;
          const double out = smoothness_loss(nc, nd, d, d.mask, 20, 10);
          nd.data[i] = x0;
          return out;
        },
        x0);
    EXPECT_NEAR(grad.d_normals.data[i], fd, 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST(DisplacementRegularizer, ZeroIsZero) {
  const UvMap n = normal_map(3, 3, Vec3(0, 0, -1));
  UvMap d(3, 3, 1, UvSpace::Scalar);
  std::fill(d.mask.begin(), d.mask.end(), 1);
  EXPECT_EQ(displacement_regularizer(n, n, d, d.mask, 0.5, 0.01), 0.0);
}

TEST(DisplacementRegularizer, SingleTexel) {
  const UvMap n = normal_map(1, 1, Vec3(0, 0, -1));
  UvMap d(1, 1, 1, UvSpace::Scalar);
  d.data[0] = 2.0;
  d.mask[0] = 1;
  EXPECT_DOUBLE_EQ(displacement_regularizer(n, n, d, d.mask, 0.5, 0.01), 0.04);
}

TEST(DisplacementRegularizer, ResolutionMismatch) {
  const UvMap n = normal_map(3, 3, Vec3(0, 0, -1));
  const UvMap d(4, 3, 1, UvSpace::Scalar);
  EXPECT_THROW(displacement_regularizer(n, n, d, d.mask, 0.5, 0.01), DimensionError);
}

struct FineSetup {
  DetailContext ctx;
  UvMap zero;
};

FineSetup zero_detail(int res = 64) {
  const FaceModel& m = toy_model();
  const SceneParams p = toy_scene();
  FineSetup s;
  s.ctx = make_detail_context(m, p, ImageBuffer(128, 128), res);
  s.ctx.image = render_from_uv(s.ctx.coarse_view, s.ctx.albedo, p.lighting, 128, 128).color;
  s.zero = UvMap(res, res, 1, UvSpace::Scalar);
  s.zero.mask = s.ctx.coarse_view.mask;
  return s;
}

TEST(FineLoss, ZeroDisplacementOnOwnRender) {
  const FineSetup s = zero_detail();
  const FineEvaluation e = fine_loss(s.zero, s.ctx, FineWeights{});
  EXPECT_EQ(e.terms.smoothness, 0.0);
  EXPECT_EQ(e.terms.displacement, 0.0);
  EXPECT_LE(e.terms.pixel, 2e-2);
}

TEST(FineLoss, ZeroWeightsGiveZero) {
  FineSetup s = zero_detail(32);
  for (double& v : s.zero.data) v = 0.5;
  const FineEvaluation e = fine_loss(s.zero, s.ctx, FineWeights{0, 0, 0, 0, 0, 0, 0});
  EXPECT_EQ(e.value, 0.0);
  for (double v : e.gradient.data) EXPECT_EQ(v, 0.0);
}

TEST(FineLoss, EqualsSumOfTerms) {
  FineSetup s = zero_detail();
  for (int r = 0; r < 64; ++r) {
    for (int c = 0; c < 64; ++c) s.zero.at(r, c, 0) = 0.5 * std::sin(0.2 * r) * std::cos(0.15 * c);
  }
  const FineWeights w;
  const FineEvaluation e = fine_loss(s.zero, s.ctx, w);
  const UvMap detail = apply_displacement(s.ctx.coarse_view, s.zero);
  const UvMap nd = uv_normals(detail);
  Mask mask(s.zero.texel_count());
  for (std::size_t t = 0; t < mask.size(); ++t) {
    mask[t] = nd.mask[t] && s.ctx.coarse_normals.mask[t] && s.zero.mask[t];
  }
  const RasterOutput r = render_from_uv(detail, s.ctx.albedo, s.ctx.lighting, 128, 128);
  const double expect =
      w.omega_p * photometric_loss(s.ctx.image, r.color, r.mask) +
      w.omega_s_fine * smoothness_loss(s.ctx.coarse_normals, nd, s.zero, mask, w.w_sn, w.w_sz) +
      w.omega_d * displacement_regularizer(s.ctx.coarse_normals, nd, s.zero, mask, w.w_dn, w.w_dz);
  EXPECT_NEAR(e.value, expect, 1e-9 * expect);
}

TEST(FineLoss, SingleTexelPhotometricGradient) {
  FineSetup s = zero_detail(48);
  const FineWeights photo_only{1, 0, 0, 0, 0, 0, 0};
  // Pick a texel near the chart centre.
  const std::size_t t = s.zero.index(24, 24);
  ASSERT_TRUE(s.zero.mask[t]);
  // A constant view-z offset leaves the image unchanged, so use a varying field.
  for (int row = 0; row < 48; ++row) {
    for (int col = 0; col < 48; ++col) s.zero.at(row, col, 0) = 0.3 * std::sin(0.4 * row + 0.25 * col);
  }
  const FineEvaluation base = fine_loss(s.zero, s.ctx, photo_only);
  const double fd = testing::central_difference(
      [&](double x) {
        UvMap d = s.zero;
        d.data[t] = x;
        return fine_loss(d, s.ctx, photo_only, &base.render.output).value;
      },
      s.zero.data[t]);
  EXPECT_LE(testing::relative_error(base.gradient.data[t], fd), 1e-3);
}

}  // namespace
}  // namespace facefit
