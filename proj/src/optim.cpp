// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#include "facefit/optim.hpp"

#include "facefit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace facefit {

void adam_step(AdamState& state, Eigen::VectorXd& params, const Eigen::VectorXd& grads,
               double learning_rate, const AdamOptions& options) {
  if (params.size() != grads.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw DimensionError("adam_step: parameter, gradient and state sizes differ (" +
                         std::to_string(params.size()) + ", " + std::to_string(grads.size()) +
                         ", " + std::to_string(state.m.size()) + ")");
  }
  state.step += 1;
  const double b1 = options.beta1, b2 = options.beta2;
  const double c1 = 1.0 - std::pow(b1, state.step);
  const double c2 = 1.0 - std::pow(b2, state.step);
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * grads[i];
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + options.epsilon);
  }
}

double scheduled_learning_rate(double base, double rate, int every, int step) {
  if (every <= 0) throw InvalidArgument("decay interval must be positive");
  return base * std::pow(rate, step / every);
}

FitConfig FitConfig::coarse_defaults() { return {}; }

FitConfig FitConfig::fine_defaults() {
  FitConfig c;
  c.learning_rate = 2e-3;
  c.decay_every = 5000;
  c.decay_rate = 0.98;
  return c;
}

void FitConfig::validate() const {
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning_rate must be > 0");
  if (!(decay_rate > 0.0 && decay_rate <= 1.0)) {
    throw InvalidArgument("decay_rate must lie in (0, 1]");
  }
  if (decay_every <= 0) throw InvalidArgument("decay_every must be > 0");
  if (max_steps < 0) throw InvalidArgument("max_steps must be >= 0");
  if (batch != 1) throw InvalidArgument("per-image fitting uses batch size 1");
  if (!(convergence_tol >= 0.0)) throw InvalidArgument("convergence_tol must be >= 0");
  if (convergence_window <= 0) throw InvalidArgument("convergence_window must be > 0");
}

GradientCheckReport gradient_check(const LossFunction& loss, const Eigen::VectorXd& x,
                                   const GradientCheckOptions& options,
                                   const StabilityFunction& stability) {
  Eigen::VectorXd grad(x.size());
  const double f0 = loss(x, &grad);
  if (!std::isfinite(f0) || !grad.allFinite()) {
    throw Diverged("gradient_check: non-finite loss or gradient at the base point");
  }
  std::vector<int> coords = options.coordinates;
  if (coords.empty()) {
    coords.resize(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) coords[i] = static_cast<int>(i);
  }
  const double floor = 1e-6 * grad.cwiseAbs().maxCoeff();
  const std::uint64_t base_sig = stability ? stability(x) : 0;

  GradientCheckReport report;
  int within = 0;
  for (int i : coords) {
    if (i < 0 || i >= x.size()) throw InvalidArgument("gradient_check: coordinate out of range");
    CoordinateCheck c;
    c.index = i;
    c.analytic = grad[i];
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += options.epsilon;
    xm[i] -= options.epsilon;
    if (stability && (stability(xp) != base_sig || stability(xm) != base_sig)) {
      c.excluded = true;
      ++report.excluded;
      report.coordinates.push_back(c);
      continue;
    }
    const double fp = loss(xp, nullptr), fm = loss(xm, nullptr);
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw Diverged("gradient_check: non-finite loss at coordinate " + std::to_string(i));
    }
    c.numeric = (fp - fm) / (2.0 * options.epsilon);
    const double denom = std::max({std::abs(c.analytic), std::abs(c.numeric), floor});
    c.relative_error = denom > 0.0 ? std::abs(c.analytic - c.numeric) / denom : 0.0;
    ++report.included;
    if (c.relative_error <= options.tolerance) ++within;
    report.worst = std::max(report.worst, c.relative_error);
    report.coordinates.push_back(c);
  }
  report.fraction_within =
      report.included > 0 ? static_cast<double>(within) / report.included : 0.0;
  report.passed = report.included > 0 && report.fraction_within >= options.pass_fraction &&
                  report.worst <= options.worst_tolerance;
  return report;
}

}  // namespace facefit
