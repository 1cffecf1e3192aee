// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#include "facefit/fitting.hpp"

#include "facefit/camera.hpp"
#include "facefit/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace facefit {

namespace {

constexpr double kTranslationUnit = 10.0;   // pixels
constexpr double kInitialCoverage = 0.8;

// Tracks the best iterate and the plateau stopping rule.
class Progress {
 public:
  explicit Progress(const FitConfig& config) : config_(config) {}

  // Returns true if `value` is a new best.
  bool record(double value, std::vector<double>& loss, std::vector<double>& best) {
    loss.push_back(value);
    const bool improved = value < best_;
    if (improved) best_ = value;
    best.push_back(best_);
    return improved;
  }

  bool converged(const std::vector<double>& best) const {
    const auto n = static_cast<int>(best.size());
    if (n <= config_.convergence_window) return false;
    const double then = best[n - 1 - config_.convergence_window];
    const double now = best[n - 1];
    return then - now < config_.convergence_tol * std::abs(then);
  }

 private:
  const FitConfig& config_;
  double best_ = std::numeric_limits<double>::infinity();
};

}  // namespace

SceneParams initial_params(const FaceModel& model, int width, int height) {
  if (width <= 0 || height <= 0) throw InvalidArgument("image size must be positive");
  SceneParams p = SceneParams::zeros(model);
  p.pose.ry = std::numbers::pi;
  const Points3 mean = to_points(model.mean_shape);
  const Points3 view = mean * p.pose.rotation().transpose();
  const Eigen::RowVector3d lo = view.colwise().minCoeff(), hi = view.colwise().maxCoeff();
  const double extent = std::max(hi.x() - lo.x(), hi.y() - lo.y());
  if (!(extent > 0.0)) throw DegenerateInput("model has zero projected extent");
  p.pose.f = kInitialCoverage * std::min(width, height) / extent;
  p.pose.tx = -p.pose.f * 0.5 * (lo.x() + hi.x());
  p.pose.ty = -p.pose.f * 0.5 * (lo.y() + hi.y());
  p.lighting = ShLighting::ambient(1.0);
  return p;
}

CoarseFit fit_coarse(const ImageBuffer& image, const Points2& landmarks,
                     const FaceModel& model, const SceneParams& init, const FitConfig& config,
                     const CoarseWeights& weights, const FeatureExtractor& extractor) {
  config.validate();
  init.validate(model);
  CoarseFit fit;
  fit.params = init;

  // Optimization variable theta = x / unit, per coordinate.
  const Eigen::VectorXd x0 = init.to_vector();
  Eigen::VectorXd unit = Eigen::VectorXd::Ones(x0.size());
  const Eigen::Index pose0 = init.coeffs.id.size() + init.coeffs.exp.size() + init.coeffs.tex.size();
  unit[pose0] = init.pose.f;
  unit.segment<3>(pose0 + 4).setConstant(kTranslationUnit);
  Eigen::VectorXd theta = x0.cwiseQuotient(unit);

  const CoarseEvaluation first = coarse_loss(model, init, image, landmarks, weights, extractor);
  if (!std::isfinite(first.value)) throw Diverged("coarse loss is not finite at the initial point");
  if (config.max_steps == 0) {
    fit.loss.push_back(first.value);
    fit.best_loss.push_back(first.value);
    return fit;
  }

  Progress progress(config);
  AdamState adam(theta.size());
  CoarseEvaluation eval = first;
  for (int k = 0;; ++k) {
    const SceneParams current = SceneParams::from_vector(theta.cwiseProduct(unit), init);
    if (k > 0) eval = coarse_loss(model, current, image, landmarks, weights, extractor);
    if (!std::isfinite(eval.value)) break;
    if (progress.record(eval.value, fit.loss, fit.best_loss)) fit.params = current;
    if (k == config.max_steps || progress.converged(fit.best_loss)) break;
    const Eigen::VectorXd g = eval.gradient.to_vector().cwiseProduct(unit);
    const double lr =
        scheduled_learning_rate(config.learning_rate, config.decay_rate, config.decay_every, k);
    adam_step(adam, theta, g, lr);
    // Keep the iterate inside the parameter domain.
    theta[pose0] = std::max(theta[pose0], 1e-3);
    fit.steps = k + 1;
  }
  return fit;
}

DetailFit fit_detail(const ImageBuffer& image, const SceneParams& coarse,
                     const FaceModel& model, const FitConfig& config,
                     const DetailOptions& options) {
  config.validate();
  const DetailContext ctx =
      make_detail_context(model, coarse, image, options.uv_resolution, options.mode);

  DetailFit fit;
  fit.displacement = UvMap(ctx.coarse_view.width, ctx.coarse_view.height, 1, UvSpace::Scalar);
  fit.displacement.mask = ctx.coarse_view.mask;
  std::vector<int> texels;
  for (std::size_t t = 0; t < fit.displacement.texel_count(); ++t) {
    if (fit.displacement.mask[t]) texels.push_back(static_cast<int>(t));
  }

  Progress progress(config);
  AdamState adam(static_cast<Eigen::Index>(texels.size()));
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(texels.size()));
  UvMap current = fit.displacement;
  UvMap best_detail;
  for (int k = 0;; ++k) {
    for (std::size_t i = 0; i < texels.size(); ++i) current.data[texels[i]] = theta[i];
    const FineEvaluation eval = fine_loss(current, ctx, options.weights);
    if (!std::isfinite(eval.value)) {
      if (k == 0) throw Diverged("fine loss is not finite at the initial point");
      break;
    }
    if (progress.record(eval.value, fit.loss, fit.best_loss)) {
      fit.displacement = current;
      best_detail = eval.detail;
    }
    if (k == config.max_steps || progress.converged(fit.best_loss)) break;
    Eigen::VectorXd g(theta.size());
    for (std::size_t i = 0; i < texels.size(); ++i) g[i] = eval.gradient.data[texels[i]];
    const double lr =
        scheduled_learning_rate(config.learning_rate, config.decay_rate, config.decay_every, k);
    adam_step(adam, theta, g, lr);
    fit.steps = k + 1;
  }
  fit.detail_view = best_detail;
  fit.detail_mesh = uv_to_mesh(to_model_space(best_detail, coarse.pose));
  return fit;
}

}  // namespace facefit
