// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "facefit/facemodel.hpp"
#include "facefit/render.hpp"
#include "facefit/scene.hpp"
#include "facefit/types.hpp"
#include "facefit/uvspace.hpp"

#include <Eigen/Core>

#include <cstdint>

namespace facefit {

/// Stage-one weights: photometric, landmark, identity, regularizer, and the
/// regularizer's per-block weights.
struct CoarseWeights {
  double w1 = 1.3;
  double w2 = 1.0;
  double w3 = 1.5;
  double w4 = 20.0;
  double omega_s = 1.3;
  double omega_e = 1.0;
  double omega_t = 1.3;

  void validate() const;
};

/// Stage-two weights. omega_s_fine is the smoothness weight (distinct from
/// the shape regularizer's omega_s).
struct FineWeights {
  double omega_p = 1.0;
  double omega_s_fine = 10.0;
  double omega_d = 10.0;
  double w_sn = 20.0;
  double w_sz = 10.0;
  double w_dn = 0.5;
  double w_dz = 0.01;

  void validate() const;
};

/// Mean over masked pixels of the per-pixel RGB Euclidean residual.
double photometric_loss(const ImageBuffer& target, const ImageBuffer& rendered,
                        const Mask& mask);

/// Gradient wrt `rendered`. Uses r / sqrt(|r|^2 + 1e-8) per pixel, so pixels
/// with zero residual get zero gradient.
ImageBuffer photometric_loss_backward(const ImageBuffer& target, const ImageBuffer& rendered,
                                      const Mask& mask);

/// Mean squared landmark distance.
double landmark_loss(const Points2& target, const Points2& rendered);
Points2 landmark_loss_backward(const Points2& target, const Points2& rendered);

/// Image -> fixed-length feature vector with a reverse mode.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual int feature_size() const = 0;
  virtual Eigen::VectorXd extract(const ImageBuffer& image) const = 0;
  /// Image cotangent for a feature cotangent, evaluated at `image`.
  virtual ImageBuffer backward(const ImageBuffer& image,
                               const Eigen::VectorXd& d_features) const = 0;
};

/// Grayscale, box-downsampled to grid x grid, then a seeded Gaussian linear
/// map to `features` outputs.
class LinearFeatureExtractor final : public FeatureExtractor {
 public:
  explicit LinearFeatureExtractor(std::uint64_t seed = 0x5eed, int features = 128,
                                  int grid = 32);
  int feature_size() const override { return static_cast<int>(projection_.rows()); }
  Eigen::VectorXd extract(const ImageBuffer& image) const override;
  ImageBuffer backward(const ImageBuffer& image,
                       const Eigen::VectorXd& d_features) const override;

 private:
  Eigen::VectorXd downsample(const ImageBuffer& image) const;

  int grid_;
  Eigen::MatrixXd projection_;
};

/// Squared feature distance.
double perceptual_loss(const ImageBuffer& target, const ImageBuffer& rendered,
                       const FeatureExtractor& extractor);
ImageBuffer perceptual_loss_backward(const ImageBuffer& target, const ImageBuffer& rendered,
                                     const FeatureExtractor& extractor);

double param_regularizer(const ShapeCoeffs& c, double omega_s, double omega_e,
                         double omega_t);
ShapeCoeffs param_regularizer_backward(const ShapeCoeffs& c, double omega_s, double omega_e,
                                       double omega_t);

struct CoarseTerms {
  double pixel = 0.0;
  double landmark = 0.0;
  double identity = 0.0;
  double regularizer = 0.0;
};

struct CoarseEvaluation {
  double value = 0.0;
  CoarseTerms terms;
  SceneGradient gradient;
  FaceRender render;
  Points2 landmarks;   // projected model landmarks
};

/// w1 L_pixel + w2 L_lm + w3 L_id + w4 R_param with gradients for every
/// scene parameter. With `frozen`, coverage is taken from a previous render.
CoarseEvaluation coarse_loss(const FaceModel& model, const SceneParams& params,
                             const ImageBuffer& image, const Points2& landmarks,
                             const CoarseWeights& weights, const FeatureExtractor& extractor,
                             const RasterOutput* frozen = nullptr);

/// Frozen stage-one result in UV space.
struct DetailContext {
  UvMap coarse_view;      // view-space coarse position map
  UvMap coarse_normals;   // uv_normals(coarse_view)
  UvMap albedo;
  ShLighting lighting;
  ImageBuffer image;
  DisplacementMode mode = DisplacementMode::ViewZ;
};

DetailContext make_detail_context(const FaceModel& model, const SceneParams& params,
                                  const ImageBuffer& image, int res,
                                  DisplacementMode mode = DisplacementMode::ViewZ);

/// Gradients of a UV-space loss wrt the detail normals and the displacement.
struct UvLossGradient {
  UvMap d_normals;        // 3 channels
  UvMap d_displacement;   // scalar
};

/// Sum over texels i and 4-neighbours j (both valid, both orderings) of
/// w_sn |dn_i - dn_j|^2 + w_sz (d_i - d_j)^2, dn = n_detail - n_coarse.
double smoothness_loss(const UvMap& n_coarse, const UvMap& n_detail, const UvMap& d,
                       const Mask& mask, double w_sn, double w_sz);
UvLossGradient smoothness_loss_backward(const UvMap& n_coarse, const UvMap& n_detail,
                                        const UvMap& d, const Mask& mask, double w_sn,
                                        double w_sz);

/// Sum over valid texels of w_dn |dn_i|^2 + w_dz d_i^2.
double displacement_regularizer(const UvMap& n_coarse, const UvMap& n_detail, const UvMap& d,
                                const Mask& mask, double w_dn, double w_dz);
UvLossGradient displacement_regularizer_backward(const UvMap& n_coarse, const UvMap& n_detail,
                                                 const UvMap& d, const Mask& mask,
                                                 double w_dn, double w_dz);

struct FineTerms {
  double pixel = 0.0;
  double smoothness = 0.0;
  double displacement = 0.0;
};

struct FineEvaluation {
  double value = 0.0;
  FineTerms terms;
  UvMap gradient;   // scalar, wrt the displacement map
  UvRender render;
  UvMap detail;
};

/// omega_p L_pixel + omega_s_fine L_smooth + omega_d L_disp.
FineEvaluation fine_loss(const UvMap& displacement, const DetailContext& context,
                         const FineWeights& weights, const RasterOutput* frozen = nullptr);

}  // namespace facefit
