// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <vector>

namespace facefit {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  int step = 0;   // number of updates applied so far

  AdamState() = default;
  explicit AdamState(Eigen::Index n) : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}
};

/// One bias-corrected Adam update of `params` in place.
void adam_step(AdamState& state, Eigen::VectorXd& params, const Eigen::VectorXd& grads,
               double learning_rate, const AdamOptions& options = {});

/// Staircase decay: base * rate^floor(step / every).
double scheduled_learning_rate(double base, double rate, int every, int step);

struct FitConfig {
  double learning_rate = 1e-2;
  int decay_every = 5000;
  double decay_rate = 0.9;
  int max_steps = 2000;
  int batch = 1;
  std::uint64_t seed = 0;
  double convergence_tol = 1e-7;
  int convergence_window = 200;

  static FitConfig coarse_defaults();
  static FitConfig fine_defaults();
  void validate() const;
};

/// Loss with optional gradient output.
using LossFunction = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

/// Fingerprint of whatever discrete state (e.g. triangle coverage) must not
/// change under a perturbation for the central difference to be meaningful.
using StabilityFunction = std::function<std::uint64_t(const Eigen::VectorXd& x)>;

struct GradientCheckOptions {
  double epsilon = 1e-4;
  double tolerance = 1e-3;         // per-coordinate relative error bound
  double worst_tolerance = 1e-2;   // bound on the worst included coordinate
  double pass_fraction = 0.95;     // share of included coordinates within `tolerance`
  std::vector<int> coordinates;    // empty = all
};

struct CoordinateCheck {
  int index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double relative_error = 0.0;
  bool excluded = false;
};

struct GradientCheckReport {
  std::vector<CoordinateCheck> coordinates;
  int included = 0;
  int excluded = 0;
  double fraction_within = 0.0;
  double worst = 0.0;
  bool passed = false;
};

/// Central-difference check of `loss`'s gradient at `x`. relative error is
/// |a - n| / max(|a|, |n|, 1e-6 * max|grad|). Coordinates whose +-epsilon
/// perturbation changes `stability` are excluded and counted separately.
GradientCheckReport gradient_check(const LossFunction& loss, const Eigen::VectorXd& x,
                                   const GradientCheckOptions& options = {},
                                   const StabilityFunction& stability = {});

}  // namespace facefit
