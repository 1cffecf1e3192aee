// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "facefit/facemodel.hpp"
#include "facefit/losses.hpp"
#include "facefit/optim.hpp"
#include "facefit/scene.hpp"
#include "facefit/uvspace.hpp"

#include <vector>

namespace facefit {

/// Default UV resolution of the detail stage.
inline constexpr int kDefaultUvResolution = 256;

/// Zero coefficients, frontal pose with the mean shape's projected bounding
/// box spanning 80% of the image and centred, band-0 lighting of level 1.
SceneParams initial_params(const FaceModel& model, int width, int height);

struct CoarseFit {
  SceneParams params;
  std::vector<double> loss;        // loss at each evaluated iterate
  std::vector<double> best_loss;   // running minimum of `loss`
  int steps = 0;
};

/// Adam on coarse_loss over every scene parameter; returns the best iterate.
/// Focal length is optimized relative to its initial value and translation
/// in units of 10 pixels; everything else in its natural unit.
CoarseFit fit_coarse(const ImageBuffer& image, const Points2& landmarks,
                     const FaceModel& model, const SceneParams& init, const FitConfig& config,
                     const CoarseWeights& weights = {},
                     const FeatureExtractor& extractor = LinearFeatureExtractor());

struct DetailOptions {
  int uv_resolution = kDefaultUvResolution;
  DisplacementMode mode = DisplacementMode::ViewZ;
  FineWeights weights;
};

struct DetailFit {
  UvMap displacement;   // scalar, view units
  UvMap detail_view;    // view-space detail positions
  Mesh detail_mesh;     // model space
  std::vector<double> loss;
  std::vector<double> best_loss;
  int steps = 0;
};

/// Adam on fine_loss over every valid displacement texel (initialized to 0);
/// `coarse` is only read.
DetailFit fit_detail(const ImageBuffer& image, const SceneParams& coarse,
                     const FaceModel& model, const FitConfig& config,
                     const DetailOptions& options = {});

}  // namespace facefit
