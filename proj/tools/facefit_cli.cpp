// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

// facefit command-line driver: synth, fit-coarse, fit-detail, render, eval,
// blend-uv. Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include "facefit/errors.hpp"
#include "facefit/fitting.hpp"
#include "facefit/io.hpp"
#include "facefit/metrics.hpp"
#include "facefit/render.hpp"
#include "facefit/uvspace.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace facefit;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Common {
  int threads = 0;
  std::uint64_t seed = 0;
};

struct SynthArgs {
  fs::path out;
  int grid = 32;
  int num_id = 10, num_exp = 5, num_tex = 10;
  int image_size = 128;
  int uv_res = kDefaultUvResolution;
  double coeff_scale = 0.0;
  double detail_amplitude = 0.02;
};

struct FitArgs {
  fs::path image, landmarks, model, params, out;
  int steps = -1;
  double lr = -1.0, decay_rate = -1.0, tol = -1.0;
  int decay_every = -1;
  CoarseWeights coarse;
  FineWeights fine;
  int uv_res = kDefaultUvResolution;
  std::string mode = "view_z";
};

struct RenderArgs {
  fs::path params, model, out;
  int width = 0, height = 0;
};

struct EvalArgs {
  fs::path pred, gt, model, mask;
  bool p2p = false, p2plane = false, depth = false, align = false;
  double crop_mm = -1.0;
  int nose_vertex = -1;
};

struct BlendArgs {
  fs::path a, b, out, weight_a, weight_b;
};

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void apply_fit_overrides(const FitArgs& a, FitConfig& cfg) {
  if (a.steps >= 0) cfg.max_steps = a.steps;
  if (a.lr > 0.0) cfg.learning_rate = a.lr;
  if (a.decay_every > 0) cfg.decay_every = a.decay_every;
  if (a.decay_rate > 0.0) cfg.decay_rate = a.decay_rate;
  if (a.tol >= 0.0) cfg.convergence_tol = a.tol;
  cfg.validate();
}

void write_trace(const fs::path& path, const std::vector<double>& loss,
                 const std::vector<double>& best) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError(FormatError::Kind::Io, "cannot write " + path.string());
  f << "step,loss,best\n";
  char buf[96];
  for (std::size_t i = 0; i < loss.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", i, loss[i], best[i]);
    f << buf;
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw FormatError(FormatError::Kind::Io, "cannot create " + dir.string());
}

Mesh model_mesh(const FaceModel& model, const Points3& vertices) {
  return {vertices, model.triangles, model.uv_coords};
}

// Colored directional terms per channel so shading constrains both normal
// directions of the synthetic surface.
ShLighting synth_lighting() {
  ShLighting l = ShLighting::ambient(1.0);
  l.coeffs(3, 0) = 0.5;
  l.coeffs(1, 1) = 0.5;
  l.coeffs(3, 2) = -0.35;
  l.coeffs(1, 2) = -0.35;
  for (int c = 0; c < 3; ++c) l.coeffs(2, c) = -0.3;
  return l;
}

UvMap bump_field(const UvMap& support, double amplitude) {
  UvMap d(support.width, support.height, 1, UvSpace::Scalar);
  d.mask = support.mask;
  for (int r = 0; r < d.height; ++r) {
    for (int c = 0; c < d.width; ++c) {
      const double u = (c + 0.5) / d.width, v = (r + 0.5) / d.height;
      d.at(r, c, 0) = amplitude * std::sin(3 * std::numbers::pi * u) *
                      std::sin(3 * std::numbers::pi * v);
    }
  }
  return d;
}

int run_synth(const Common& common, const SynthArgs& a) {
  ensure_dir(a.out);
  const FaceModel model = generate_toy_model(common.seed, a.grid, a.num_id, a.num_exp, a.num_tex);
  std::mt19937_64 rng(common.seed ^ 0x9e3779b97f4a7c15ull);
  const auto uniform = [&](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  };
  SceneParams gt = initial_params(model, a.image_size, a.image_size);
  gt.pose.rx += uniform(-0.1, 0.1);
  gt.pose.ry += uniform(-0.1, 0.1);
  gt.pose.rz += uniform(-0.1, 0.1);
  gt.pose.tx += uniform(-5.0, 5.0);
  gt.pose.ty += uniform(-5.0, 5.0);
  gt.pose.f *= uniform(0.9, 1.1);
  for (Eigen::VectorXd* v : {&gt.coeffs.id, &gt.coeffs.exp, &gt.coeffs.tex}) {
    for (Eigen::Index i = 0; i < v->size(); ++i) (*v)[i] = a.coeff_scale * uniform(-1.0, 1.0);
  }
  gt.lighting = synth_lighting();

  const FaceRender coarse = render_face(model, gt, a.image_size, a.image_size);
  ImageBuffer image = coarse.output.color;
  const DetailContext ctx = make_detail_context(model, gt, image, a.uv_res);
  const double amplitude = a.detail_amplitude * model_diameter(model) * gt.pose.f;
  const UvMap displacement = bump_field(ctx.coarse_view, amplitude);
  if (amplitude > 0.0) {
    image = render_from_uv(apply_displacement(ctx.coarse_view, displacement), ctx.albedo,
                           gt.lighting, a.image_size, a.image_size)
                .color;
  }
  const Points2 landmarks =
      project_landmarks(gt.pose, coarse.synth.vertices, model.landmark_indices);

  write_model(a.out / "model.fmm", model);
  write_params(a.out / "gt_params.json", gt,
               {model_fingerprint(model), {a.image_size, a.image_size}});
  write_png(a.out / "image.png", image);
  write_landmarks(a.out / "landmarks.txt", landmarks);
  write_obj(a.out / "gt_mesh.obj", model_mesh(model, coarse.synth.vertices));
  write_uvmap(a.out / "gt_displacement.uvm", displacement);
  return 0;
}

FaceModel load_model_checked(const fs::path& path, const ParamsFile* params) {
  FaceModel model = read_model(path);
  if (params != nullptr && params->meta.model_hash != 0 &&
      params->meta.model_hash != model_fingerprint(model)) {
    throw InvalidArgument(path.string() + ": model fingerprint differs from the one recorded "
                          "in the params file");
  }
  return model;
}

int run_fit_coarse(const FitArgs& a) {
  ensure_dir(a.out);
  const ImageBuffer image = read_png(a.image);
  const Points2 landmarks = read_landmarks(a.landmarks);
  const FaceModel model = load_model_checked(a.model, nullptr);
  FitConfig cfg = FitConfig::coarse_defaults();
  apply_fit_overrides(a, cfg);
  const SceneParams init = initial_params(model, image.width, image.height);
  const CoarseFit fit = fit_coarse(image, landmarks, model, init, cfg, a.coarse);

  write_params(a.out / "params.json", fit.params,
               {model_fingerprint(model), {image.width, image.height}});
  const FaceRender r = render_face(model, fit.params, image.width, image.height);
  ImageBuffer overlay = image;
  for (std::size_t p = 0; p < overlay.pixel_count(); ++p) {
    if (!r.output.mask[p]) continue;
    for (int ch = 0; ch < 3; ++ch) overlay.data[3 * p + ch] = r.output.color.data[3 * p + ch];
  }
  write_png(a.out / "overlay.png", overlay);
  write_trace(a.out / "loss.csv", fit.loss, fit.best_loss);
  write_obj(a.out / "coarse_mesh.obj", model_mesh(model, r.synth.vertices));
  return 0;
}

int run_fit_detail(const FitArgs& a) {
  ensure_dir(a.out);
  const ImageBuffer image = read_png(a.image);
  const ParamsFile params = read_params(a.params);
  const FaceModel model = load_model_checked(a.model, &params);
  FitConfig cfg = FitConfig::fine_defaults();
  apply_fit_overrides(a, cfg);
  DetailOptions opt;
  opt.uv_resolution = a.uv_res;
  opt.weights = a.fine;
  opt.mode = a.mode == "normal" ? DisplacementMode::Normal : DisplacementMode::ViewZ;
  const DetailFit fit = fit_detail(image, params.params, model, cfg, opt);

  write_uvmap(a.out / "displacement.uvm", fit.displacement);
  write_obj(a.out / "detail_mesh.obj", fit.detail_mesh);
  const DetailContext ctx = make_detail_context(model, params.params, image, a.uv_res, opt.mode);
  write_png(a.out / "detail_render.png",
            render_from_uv(fit.detail_view, ctx.albedo, params.params.lighting, image.width,
                           image.height)
                .color);
  write_trace(a.out / "loss.csv", fit.loss, fit.best_loss);
  return 0;
}

int run_render(const RenderArgs& a) {
  const ParamsFile params = read_params(a.params);
  const FaceModel model = load_model_checked(a.model, &params);
  const int w = a.width > 0 ? a.width : params.meta.image_size[0];
  const int h = a.height > 0 ? a.height : params.meta.image_size[1];
  if (w <= 0 || h <= 0) {
    throw InvalidArgument("no image size: pass --width/--height or record it in the params");
  }
  write_png(a.out, render_face(model, params.params, w, h).output.color);
  return 0;
}

// Vertex subset within the crop radius of the ground-truth nose tip.
std::vector<int> crop_indices(const Points3& vertices, const Vec3& center, double radius) {
  std::vector<int> keep;
  for (Eigen::Index i = 0; i < vertices.rows(); ++i) {
    if ((vertices.row(i).transpose() - center).norm() < radius) keep.push_back(static_cast<int>(i));
  }
  if (keep.empty()) throw EmptyResult("crop keeps no vertex");
  return keep;
}

Points3 select_rows(const Points3& p, const std::vector<int>& rows) {
  Points3 out(static_cast<Eigen::Index>(rows.size()), 3);
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = p.row(rows[i]);
  return out;
}

int run_eval(const EvalArgs& a) {
  nlohmann::json out;
  if (a.depth) {
    const DepthRead pred = read_depth(a.pred);
    const DepthRead gt = read_depth(a.gt);
    Mask mask(gt.mask.size());
    for (std::size_t i = 0; i < mask.size() && i < pred.mask.size(); ++i) {
      mask[i] = gt.mask[i] && pred.mask[i];
    }
    if (!a.mask.empty()) {
      const DepthRead m = read_depth(a.mask);
      if (m.mask.size() != mask.size()) throw DimensionError("mask size differs from the depth maps");
      for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = mask[i] && m.mask[i];
    }
    out["metric"] = "depth";
    out["value"] = depth_error(pred.depth, gt.depth, mask);
    std::cout << out.dump() << "\n";
    return 0;
  }

  Mesh pred = read_obj(a.pred);
  Mesh gt = read_obj(a.gt);
  if (a.align) {
    const IcpResult icp = icp_align(pred.vertices, gt.vertices);
    pred.vertices = icp.transform.apply(pred.vertices);
    out["icp_iterations"] = icp.iterations;
    out["icp_scale"] = icp.transform.scale;
  }
  if (a.crop_mm > 0.0) {
    int nose = a.nose_vertex;
    if (nose < 0 && !a.model.empty()) nose = read_model(a.model).landmark_indices[kNoseTipLandmark];
    if (nose < 0 || nose >= gt.vertices.rows()) {
      throw InvalidArgument("--crop-mm needs the nose tip: pass --model or --nose-vertex");
    }
    const Vec3 center = gt.vertices.row(nose).transpose();
    if (a.p2plane) {
      gt = crop_radius(gt, center, a.crop_mm);
      pred.vertices = select_rows(pred.vertices, crop_indices(pred.vertices, center, a.crop_mm));
    } else {
      const std::vector<int> keep = crop_indices(gt.vertices, center, a.crop_mm);
      if (pred.vertices.rows() != gt.vertices.rows()) {
        throw DimensionError("p2p needs corresponding vertices: " +
                             std::to_string(pred.vertices.rows()) + " vs " +
                             std::to_string(gt.vertices.rows()));
      }
      gt.vertices = select_rows(gt.vertices, keep);
      pred.vertices = select_rows(pred.vertices, keep);
    }
  }
  if (a.p2plane) {
    const PointToPlaneResult r = point_to_plane(pred.vertices, gt);
    out["metric"] = "p2plane";
    out["value"] = r.mean;
    out["points"] = r.distances.size();
  } else {
    out["metric"] = "p2p";
    out["value"] = point_to_point_rmse(pred.vertices, gt.vertices);
    out["points"] = pred.vertices.rows();
  }
  std::cout << out.dump() << "\n";
  return 0;
}

std::vector<double> load_weights(const fs::path& path, const UvMap& like) {
  if (path.empty()) return std::vector<double>(like.texel_count(), 1.0);
  const UvMap w = read_uvmap(path);
  if (w.space != UvSpace::Scalar || w.width != like.width || w.height != like.height) {
    throw DimensionError(path.string() + ": weights must be a scalar map of the same size");
  }
  return w.data;
}

int run_blend(const BlendArgs& a) {
  const UvMap ma = read_uvmap(a.a);
  const UvMap mb = read_uvmap(a.b);
  write_uvmap(a.out, blend_uv_maps(ma, mb, load_weights(a.weight_a, ma),
                                   load_weights(a.weight_b, mb)));
  return 0;
}

void add_fit_flags(CLI::App* cmd, FitArgs& a) {
  cmd->add_option("--steps", a.steps, "Maximum optimizer steps");
  cmd->add_option("--lr", a.lr, "Base learning rate");
  cmd->add_option("--decay-every", a.decay_every, "Learning-rate decay interval (steps)");
  cmd->add_option("--decay-rate", a.decay_rate, "Learning-rate decay factor");
  cmd->add_option("--tol", a.tol, "Relative plateau tolerance for early stopping");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"facefit: model-based face inverse rendering"};
  app.require_subcommand(1);
  Common common;
  const char* env_threads = std::getenv("FACEFIT_THREADS");
  if (env_threads != nullptr) common.threads = std::atoi(env_threads);
  app.add_option("--threads", common.threads, "Worker threads (default: FACEFIT_THREADS or all)");
  app.add_option("--seed", common.seed, "Seed for synthetic data");

  SynthArgs synth;
  CLI::App* c_synth = app.add_subcommand("synth", "Write a synthetic scene with ground truth");
  c_synth->add_option("--out", synth.out, "Output directory")->required();
  c_synth->add_option("--seed", common.seed, "Seed");
  c_synth->add_option("--grid", synth.grid, "Toy model grid size");
  c_synth->add_option("--image-size", synth.image_size, "Square image size in pixels");
  c_synth->add_option("--uv-res", synth.uv_res, "UV resolution of the displacement map");
  c_synth->add_option("--coeff-scale", synth.coeff_scale, "Range of the random coefficients");
  c_synth->add_option("--detail-amplitude", synth.detail_amplitude,
                      "Bump amplitude as a fraction of the model diameter (0 = none)");

  FitArgs coarse;
  CLI::App* c_coarse = app.add_subcommand("fit-coarse", "Fit scene parameters to an image");
  c_coarse->add_option("--image", coarse.image)->required()->check(CLI::ExistingFile);
  c_coarse->add_option("--landmarks", coarse.landmarks)->required()->check(CLI::ExistingFile);
  c_coarse->add_option("--model", coarse.model)->required()->check(CLI::ExistingFile);
  c_coarse->add_option("--out", coarse.out, "Output directory")->required();
  add_fit_flags(c_coarse, coarse);
  c_coarse->add_option("--w1", coarse.coarse.w1, "Photometric weight");
  c_coarse->add_option("--w2", coarse.coarse.w2, "Landmark weight");
  c_coarse->add_option("--w3", coarse.coarse.w3, "Identity (feature) weight");
  c_coarse->add_option("--w4", coarse.coarse.w4, "Regularizer weight");
  c_coarse->add_option("--omega-s", coarse.coarse.omega_s, "Shape coefficient weight");
  c_coarse->add_option("--omega-e", coarse.coarse.omega_e, "Expression coefficient weight");
  c_coarse->add_option("--omega-t", coarse.coarse.omega_t, "Texture coefficient weight");

  FitArgs detail;
  CLI::App* c_detail = app.add_subcommand("fit-detail", "Fit a displacement map");
  c_detail->add_option("--image", detail.image)->required()->check(CLI::ExistingFile);
  c_detail->add_option("--params", detail.params)->required()->check(CLI::ExistingFile);
  c_detail->add_option("--model", detail.model)->required()->check(CLI::ExistingFile);
  c_detail->add_option("--out", detail.out, "Output directory")->required();
  add_fit_flags(c_detail, detail);
  c_detail->add_option("--uv-res", detail.uv_res, "UV resolution");
  c_detail->add_option("--mode", detail.mode, "Displacement direction")
      ->check(CLI::IsMember({"view_z", "normal"}));
  c_detail->add_option("--omega-p", detail.fine.omega_p, "Photometric weight");
  c_detail->add_option("--omega-s-fine", detail.fine.omega_s_fine, "Smoothness weight");
  c_detail->add_option("--omega-d", detail.fine.omega_d, "Displacement regularizer weight");
  c_detail->add_option("--w-sn", detail.fine.w_sn, "Smoothness normal weight");
  c_detail->add_option("--w-sz", detail.fine.w_sz, "Smoothness depth weight");
  c_detail->add_option("--w-dn", detail.fine.w_dn, "Regularizer normal weight");
  c_detail->add_option("--w-dz", detail.fine.w_dz, "Regularizer depth weight");

  RenderArgs render;
  CLI::App* c_render = app.add_subcommand("render", "Render scene parameters to a PNG");
  c_render->add_option("--params", render.params)->required()->check(CLI::ExistingFile);
  c_render->add_option("--model", render.model)->required()->check(CLI::ExistingFile);
  c_render->add_option("--out", render.out, "Output PNG")->required();
  c_render->add_option("--width", render.width);
  c_render->add_option("--height", render.height);

  EvalArgs eval;
  CLI::App* c_eval = app.add_subcommand("eval", "Compare a prediction with ground truth");
  c_eval->add_option("--pred", eval.pred)->required()->check(CLI::ExistingFile);
  c_eval->add_option("--gt", eval.gt)->required()->check(CLI::ExistingFile);
  auto* f_p2p = c_eval->add_flag("--p2p", eval.p2p, "Point-to-point RMSE (default)");
  auto* f_p2plane = c_eval->add_flag("--p2plane", eval.p2plane, "Mean point-to-plane distance");
  auto* f_depth = c_eval->add_flag("--depth", eval.depth, "Depth error on depth images");
  f_p2p->excludes(f_p2plane)->excludes(f_depth);
  f_p2plane->excludes(f_depth);
  c_eval->add_option("--crop-mm", eval.crop_mm, "Crop radius around the nose tip");
  c_eval->add_option("--model", eval.model, "Model file naming the nose-tip vertex");
  c_eval->add_option("--nose-vertex", eval.nose_vertex, "Nose-tip vertex index");
  c_eval->add_option("--mask", eval.mask, "Depth validity mask (depth mode)");
  c_eval->add_flag("--align", eval.align, "Similarity ICP of pred onto gt first");

  BlendArgs blend;
  CLI::App* c_blend = app.add_subcommand("blend-uv", "Merge two UV maps");
  c_blend->add_option("--a", blend.a)->required()->check(CLI::ExistingFile);
  c_blend->add_option("--b", blend.b)->required()->check(CLI::ExistingFile);
  c_blend->add_option("--out", blend.out, "Output UVM1 file")->required();
  c_blend->add_option("--weights-a", blend.weight_a)->check(CLI::ExistingFile);
  c_blend->add_option("--weights-b", blend.weight_b)->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    if (e.get_exit_code() != 0) std::cerr << app.help();
    return 2;
  }

  if (common.threads > 0) omp_set_num_threads(common.threads);
  std::string joined;
  for (int i = 1; i < argc; ++i) (joined += argv[i]) += '\x1f';
  const std::string sub = app.get_subcommands().front()->get_name();
  std::fprintf(stderr, "facefit %s cmd=%s seed=%llu threads=%d eigen=%d.%d.%d config=%016llx\n",
               kVersion, sub.c_str(), static_cast<unsigned long long>(common.seed),
               omp_get_max_threads(), EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION,
               EIGEN_MINOR_VERSION, static_cast<unsigned long long>(fnv1a(joined)));

  try {
    if (*c_synth) return run_synth(common, synth);
    if (*c_coarse) return run_fit_coarse(coarse);
    if (*c_detail) return run_fit_detail(detail);
    if (*c_render) return run_render(render);
    if (*c_eval) return run_eval(eval);
    if (*c_blend) return run_blend(blend);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "facefit %s: error: %s\n", sub.c_str(), e.what());
    return 1;
  }
  return 2;
}
