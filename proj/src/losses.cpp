// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#include "facefit/losses.hpp"

#include "facefit/errors.hpp"
#include "random.hpp"

#include <cmath>
#include <string>

namespace facefit {

namespace {

constexpr double kResidualSmoothing = 1e-8;
constexpr double kLuma[3] = {0.2126, 0.7152, 0.0722};

void require_non_negative(double w, const char* name) {
  if (!(w >= 0.0) || !std::isfinite(w)) {
    throw InvalidArgument(std::string("weight ") + name + " must be finite and non-negative");
  }
}

void check_images(const ImageBuffer& a, const ImageBuffer& b, const char* what) {
  if (a.width != b.width || a.height != b.height || a.data.size() != b.data.size()) {
    throw DimensionError(std::string(what) + ": image sizes differ (" + std::to_string(a.width) +
                         "x" + std::to_string(a.height) + " vs " + std::to_string(b.width) +
                         "x" + std::to_string(b.height) + ")");
  }
}

void check_uv_inputs(const UvMap& n_coarse, const UvMap& n_detail, const UvMap& d,
                     const Mask& mask) {
  const auto same = [&](const UvMap& m) {
    return m.width == d.width && m.height == d.height;
  };
  if (!same(n_coarse) || !same(n_detail) || mask.size() != d.texel_count()) {
    throw DimensionError("UV loss inputs differ in resolution");
  }
  if (n_coarse.channels != 3 || n_detail.channels != 3 || d.channels != 1) {
    throw DimensionError("UV loss expects normal maps and a scalar displacement");
  }
}

Vec3 delta_normal(const UvMap& n_coarse, const UvMap& n_detail, std::size_t t) {
  return n_detail.vec3(t) - n_coarse.vec3(t);
}

UvLossGradient empty_uv_gradient(const UvMap& d) {
  UvLossGradient g;
  g.d_normals = UvMap(d.width, d.height, 3, UvSpace::View);
  g.d_displacement = UvMap(d.width, d.height, 1, UvSpace::Scalar);
  g.d_displacement.mask = d.mask;
  return g;
}

}  // namespace

void CoarseWeights::validate() const {
  require_non_negative(w1, "w1");
  require_non_negative(w2, "w2");
  require_non_negative(w3, "w3");
  require_non_negative(w4, "w4");
  require_non_negative(omega_s, "omega_s");
  require_non_negative(omega_e, "omega_e");
  require_non_negative(omega_t, "omega_t");
}

void FineWeights::validate() const {
  require_non_negative(omega_p, "omega_p");
  require_non_negative(omega_s_fine, "omega_s_fine");
  require_non_negative(omega_d, "omega_d");
  require_non_negative(w_sn, "w_sn");
  require_non_negative(w_sz, "w_sz");
  require_non_negative(w_dn, "w_dn");
  require_non_negative(w_dz, "w_dz");
}

double photometric_loss(const ImageBuffer& target, const ImageBuffer& rendered,
                        const Mask& mask) {
  check_images(target, rendered, "photometric_loss");
  if (mask.size() != target.pixel_count()) throw DimensionError("photometric_loss: mask size");
  const int h = target.height, w = target.width;
  std::vector<double> row_sum(h, 0.0);
  std::vector<int> row_count(h, 0);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t p = static_cast<std::size_t>(r) * w + c;
      if (!mask[p]) continue;
      double e2 = 0.0;
      for (int ch = 0; ch < 3; ++ch) {
        const double d = target.data[3 * p + ch] - rendered.data[3 * p + ch];
        e2 += d * d;
      }
      row_sum[r] += std::sqrt(e2);
      ++row_count[r];
    }
  }
  double sum = 0.0;
  long count = 0;
  for (int r = 0; r < h; ++r) {
    sum += row_sum[r];
    count += row_count[r];
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

ImageBuffer photometric_loss_backward(const ImageBuffer& target, const ImageBuffer& rendered,
                                      const Mask& mask) {
  check_images(target, rendered, "photometric_loss");
  if (mask.size() != target.pixel_count()) throw DimensionError("photometric_loss: mask size");
  ImageBuffer grad(target.width, target.height);
  long count = 0;
  for (auto m : mask) count += m ? 1 : 0;
  if (count == 0) return grad;
  const double inv = 1.0 / static_cast<double>(count);
  const int n = static_cast<int>(mask.size());
#pragma omp parallel for schedule(static)
  for (int p = 0; p < n; ++p) {
    if (!mask[p]) continue;
    double r[3], e2 = 0.0;
    for (int ch = 0; ch < 3; ++ch) {
      r[ch] = rendered.data[3 * p + ch] - target.data[3 * p + ch];
      e2 += r[ch] * r[ch];
    }
    if (e2 == 0.0) continue;
    const double scale = inv / std::sqrt(e2 + kResidualSmoothing);
    for (int ch = 0; ch < 3; ++ch) grad.data[3 * p + ch] = r[ch] * scale;
  }
  return grad;
}

double landmark_loss(const Points2& target, const Points2& rendered) {
  if (target.rows() != rendered.rows()) {
    throw DimensionError("landmark_loss: " + std::to_string(target.rows()) + " vs " +
                         std::to_string(rendered.rows()) + " landmarks");
  }
  if (target.rows() == 0) return 0.0;
  return (target - rendered).rowwise().squaredNorm().sum() / static_cast<double>(target.rows());
}

Points2 landmark_loss_backward(const Points2& target, const Points2& rendered) {
  if (target.rows() != rendered.rows()) throw DimensionError("landmark_loss: count mismatch");
  if (target.rows() == 0) return Points2(0, 2);
  return 2.0 * (rendered - target) / static_cast<double>(target.rows());
}

LinearFeatureExtractor::LinearFeatureExtractor(std::uint64_t seed, int features, int grid)
    : grid_(grid) {
  if (features <= 0 || grid <= 0) throw InvalidArgument("feature extractor sizes must be > 0");
  const int inputs = grid * grid;
  projection_.resize(features, inputs);
  detail::Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(inputs));
  for (int i = 0; i < features; ++i) {
    for (int j = 0; j < inputs; ++j) projection_(i, j) = rng.normal() * scale;
  }
}

Eigen::VectorXd LinearFeatureExtractor::downsample(const ImageBuffer& image) const {
  if (image.width < grid_ || image.height < grid_) {
    throw DimensionError("feature extractor needs an image of at least " +
                         std::to_string(grid_) + "x" + std::to_string(grid_) + " pixels");
  }
  Eigen::VectorXd cells = Eigen::VectorXd::Zero(grid_ * grid_);
  for (int i = 0; i < grid_; ++i) {
    const int r0 = i * image.height / grid_, r1 = (i + 1) * image.height / grid_;
    for (int j = 0; j < grid_; ++j) {
      const int c0 = j * image.width / grid_, c1 = (j + 1) * image.width / grid_;
      double sum = 0.0;
      for (int r = r0; r < r1; ++r) {
        for (int c = c0; c < c1; ++c) {
          for (int ch = 0; ch < 3; ++ch) sum += kLuma[ch] * image.at(r, c, ch);
        }
      }
      cells[i * grid_ + j] = sum / static_cast<double>((r1 - r0) * (c1 - c0));
    }
  }
  return cells;
}

Eigen::VectorXd LinearFeatureExtractor::extract(const ImageBuffer& image) const {
  return projection_ * downsample(image);
}

ImageBuffer LinearFeatureExtractor::backward(const ImageBuffer& image,
                                             const Eigen::VectorXd& d_features) const {
  if (d_features.size() != feature_size()) {
    throw DimensionError("feature cotangent length " + std::to_string(d_features.size()) +
                         " differs from " + std::to_string(feature_size()));
  }
  downsample(image);   // size check only; the map is linear
  const Eigen::VectorXd d_cells = projection_.transpose() * d_features;
  ImageBuffer grad(image.width, image.height);
  for (int i = 0; i < grid_; ++i) {
    const int r0 = i * image.height / grid_, r1 = (i + 1) * image.height / grid_;
    for (int j = 0; j < grid_; ++j) {
      const int c0 = j * image.width / grid_, c1 = (j + 1) * image.width / grid_;
      const double g = d_cells[i * grid_ + j] / static_cast<double>((r1 - r0) * (c1 - c0));
      for (int r = r0; r < r1; ++r) {
        for (int c = c0; c < c1; ++c) {
          for (int ch = 0; ch < 3; ++ch) grad.at(r, c, ch) = kLuma[ch] * g;
        }
      }
    }
  }
  return grad;
}

double perceptual_loss(const ImageBuffer& target, const ImageBuffer& rendered,
                       const FeatureExtractor& extractor) {
  check_images(target, rendered, "perceptual_loss");
  const Eigen::VectorXd a = extractor.extract(target), b = extractor.extract(rendered);
  if (a.size() != b.size()) throw DimensionError("perceptual_loss: feature length mismatch");
  return (a - b).squaredNorm();
}

ImageBuffer perceptual_loss_backward(const ImageBuffer& target, const ImageBuffer& rendered,
                                     const FeatureExtractor& extractor) {
  check_images(target, rendered, "perceptual_loss");
  const Eigen::VectorXd a = extractor.extract(target), b = extractor.extract(rendered);
  if (a.size() != b.size()) throw DimensionError("perceptual_loss: feature length mismatch");
  return extractor.backward(rendered, 2.0 * (b - a));
}

double param_regularizer(const ShapeCoeffs& c, double omega_s, double omega_e,
                         double omega_t) {
  return omega_s * c.id.squaredNorm() + omega_e * c.exp.squaredNorm() +
         omega_t * c.tex.squaredNorm();
}

ShapeCoeffs param_regularizer_backward(const ShapeCoeffs& c, double omega_s, double omega_e,
                                       double omega_t) {
  return {2.0 * omega_s * c.id, 2.0 * omega_e * c.exp, 2.0 * omega_t * c.tex};
}

CoarseEvaluation coarse_loss(const FaceModel& model, const SceneParams& params,
                             const ImageBuffer& image, const Points2& landmarks,
                             const CoarseWeights& weights, const FeatureExtractor& extractor,
                             const RasterOutput* frozen) {
  weights.validate();
  if (landmarks.rows() != static_cast<Eigen::Index>(model.landmark_indices.size())) {
    throw DimensionError("coarse_loss: expected " +
                         std::to_string(model.landmark_indices.size()) + " landmarks, got " +
                         std::to_string(landmarks.rows()));
  }
  CoarseEvaluation e;
  e.render = render_face(model, params, image.width, image.height, frozen);
  const ImageBuffer& rendered = e.render.output.color;
  e.landmarks = project_landmarks(params.pose, e.render.synth.vertices, model.landmark_indices);

  e.terms.pixel = photometric_loss(image, rendered, e.render.output.mask);
  e.terms.landmark = landmark_loss(landmarks, e.landmarks);
  e.terms.identity = perceptual_loss(image, rendered, extractor);
  e.terms.regularizer =
      param_regularizer(params.coeffs, weights.omega_s, weights.omega_e, weights.omega_t);
  e.value = weights.w1 * e.terms.pixel + weights.w2 * e.terms.landmark +
            weights.w3 * e.terms.identity + weights.w4 * e.terms.regularizer;

  ImageBuffer d_image = photometric_loss_backward(image, rendered, e.render.output.mask);
  const ImageBuffer d_identity = perceptual_loss_backward(image, rendered, extractor);
  for (std::size_t i = 0; i < d_image.data.size(); ++i) {
    d_image.data[i] = weights.w1 * d_image.data[i] + weights.w3 * d_identity.data[i];
  }
  e.gradient = render_backward(model, params, e.render, d_image);

  const Points2 d_lm = weights.w2 * landmark_loss_backward(landmarks, e.landmarks);
  const ProjectionGradient lg = project_landmarks_backward(
      params.pose, e.render.synth.vertices, model.landmark_indices, d_lm);
  e.gradient.pose += lg.pose;
  const ShapeCoeffs lc = synthesize_backward(model, e.render.synth, lg.vertices,
                                             Points3::Zero(model.num_vertices(), 3));
  const ShapeCoeffs rc = param_regularizer_backward(params.coeffs, weights.omega_s,
                                                    weights.omega_e, weights.omega_t);
  e.gradient.coeffs.id += lc.id + weights.w4 * rc.id;
  e.gradient.coeffs.exp += lc.exp + weights.w4 * rc.exp;
  e.gradient.coeffs.tex += lc.tex + weights.w4 * rc.tex;
  return e;
}

DetailContext make_detail_context(const FaceModel& model, const SceneParams& params,
                                  const ImageBuffer& image, int res, DisplacementMode mode) {
  params.validate(model);
  const Synthesized synth = synthesize(model, params.coeffs);
  DetailContext ctx;
  ctx.coarse_view =
      to_view_space(rasterize_to_uv(model, synth.vertices, res, UvSpace::Model), params.pose);
  ctx.coarse_normals = uv_normals(ctx.coarse_view);
  ctx.albedo = rasterize_to_uv(model, synth.albedo, res, UvSpace::Color);
  ctx.lighting = params.lighting;
  ctx.image = image;
  ctx.mode = mode;
  return ctx;
}

double smoothness_loss(const UvMap& n_coarse, const UvMap& n_detail, const UvMap& d,
                       const Mask& mask, double w_sn, double w_sz) {
  check_uv_inputs(n_coarse, n_detail, d, mask);
  const int w = d.width, h = d.height;
  std::vector<double> row_sum(h, 0.0);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t i = d.index(r, c);
      if (!mask[i]) continue;
      const Vec3 dni = delta_normal(n_coarse, n_detail, i);
      const int nbr[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
      for (const auto& q : nbr) {
        if (q[0] < 0 || q[0] >= h || q[1] < 0 || q[1] >= w) continue;
        const std::size_t j = d.index(q[0], q[1]);
        if (!mask[j]) continue;
        const double dz = d.data[i] - d.data[j];
        row_sum[r] += w_sn * (dni - delta_normal(n_coarse, n_detail, j)).squaredNorm() +
                      w_sz * dz * dz;
      }
    }
  }
  double sum = 0.0;
  for (double s : row_sum) sum += s;
  return sum;
}

UvLossGradient smoothness_loss_backward(const UvMap& n_coarse, const UvMap& n_detail,
                                        const UvMap& d, const Mask& mask, double w_sn,
                                        double w_sz) {
  check_uv_inputs(n_coarse, n_detail, d, mask);
  UvLossGradient g = empty_uv_gradient(d);
  const int w = d.width, h = d.height;
  // Each unordered pair appears twice in the double sum, hence the factor 4.
#pragma omp parallel for schedule(static)
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t i = d.index(r, c);
      if (!mask[i]) continue;
      const Vec3 dni = delta_normal(n_coarse, n_detail, i);
      Vec3 gn = Vec3::Zero();
      double gz = 0.0;
      const int nbr[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
      for (const auto& q : nbr) {
        if (q[0] < 0 || q[0] >= h || q[1] < 0 || q[1] >= w) continue;
        const std::size_t j = d.index(q[0], q[1]);
        if (!mask[j]) continue;
        gn += 4.0 * w_sn * (dni - delta_normal(n_coarse, n_detail, j));
        gz += 4.0 * w_sz * (d.data[i] - d.data[j]);
      }
      g.d_normals.set_vec3(i, gn);
      g.d_normals.mask[i] = 1;
      g.d_displacement.data[i] = gz;
    }
  }
  return g;
}

double displacement_regularizer(const UvMap& n_coarse, const UvMap& n_detail, const UvMap& d,
                                const Mask& mask, double w_dn, double w_dz) {
  check_uv_inputs(n_coarse, n_detail, d, mask);
  double sum = 0.0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    sum += w_dn * delta_normal(n_coarse, n_detail, i).squaredNorm() +
           w_dz * d.data[i] * d.data[i];
  }
  return sum;
}

UvLossGradient displacement_regularizer_backward(const UvMap& n_coarse, const UvMap& n_detail,
                                                 const UvMap& d, const Mask& mask,
                                                 double w_dn, double w_dz) {
  check_uv_inputs(n_coarse, n_detail, d, mask);
  UvLossGradient g = empty_uv_gradient(d);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    g.d_normals.set_vec3(i, 2.0 * w_dn * delta_normal(n_coarse, n_detail, i));
    g.d_normals.mask[i] = 1;
    g.d_displacement.data[i] = 2.0 * w_dz * d.data[i];
  }
  return g;
}

FineEvaluation fine_loss(const UvMap& displacement, const DetailContext& context,
                         const FineWeights& weights, const RasterOutput* frozen) {
  weights.validate();
  FineEvaluation e;
  e.detail = apply_displacement(context.coarse_view, displacement, context.mode);
  e.render = render_uv_path(e.detail, context.albedo, context.lighting, context.image.width,
                            context.image.height, frozen);
  const UvMap& n_detail = e.render.normals;
  Mask mask(displacement.texel_count());
  for (std::size_t t = 0; t < mask.size(); ++t) {
    mask[t] = n_detail.mask[t] && context.coarse_normals.mask[t] && displacement.mask[t];
  }
  const ImageBuffer& rendered = e.render.output.color;
  e.terms.pixel = photometric_loss(context.image, rendered, e.render.output.mask);
  e.terms.smoothness = smoothness_loss(context.coarse_normals, n_detail, displacement, mask,
                                       weights.w_sn, weights.w_sz);
  e.terms.displacement = displacement_regularizer(context.coarse_normals, n_detail,
                                                  displacement, mask, weights.w_dn,
                                                  weights.w_dz);
  e.value = weights.omega_p * e.terms.pixel + weights.omega_s_fine * e.terms.smoothness +
            weights.omega_d * e.terms.displacement;

  ImageBuffer d_image = photometric_loss_backward(context.image, rendered, e.render.output.mask);
  for (double& v : d_image.data) v *= weights.omega_p;
  const UvLossGradient gs = smoothness_loss_backward(context.coarse_normals, n_detail,
                                                     displacement, mask, weights.w_sn,
                                                     weights.w_sz);
  const UvLossGradient gd = displacement_regularizer_backward(
      context.coarse_normals, n_detail, displacement, mask, weights.w_dn, weights.w_dz);
  UvMap extra = gs.d_normals;
  for (std::size_t i = 0; i < extra.data.size(); ++i) {
    extra.data[i] = weights.omega_s_fine * gs.d_normals.data[i] +
                    weights.omega_d * gd.d_normals.data[i];
  }
  const UvRenderGradient rg =
      render_uv_backward(e.detail, e.render, context.lighting, d_image, &extra);
  e.gradient = displacement_backward(context.coarse_view, rg.d_positions, context.mode);
  for (std::size_t t = 0; t < e.gradient.texel_count(); ++t) {
    if (!displacement.mask[t] || !e.detail.mask[t]) {
      e.gradient.data[t] = 0.0;
      e.gradient.mask[t] = displacement.mask[t];
      continue;
    }
    e.gradient.data[t] += weights.omega_s_fine * gs.d_displacement.data[t] +
                          weights.omega_d * gd.d_displacement.data[t];
    e.gradient.mask[t] = 1;
  }
  return e;
}

}  // namespace facefit
