// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "facefit/fitting.hpp"
#include "facefit/facemodel.hpp"
#include "facefit/lighting.hpp"

#include <omp.h>

#include <cstring>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace facefit::testing {

inline const FaceModel& toy_model() {
  static const FaceModel model = generate_toy_model(0, 32, 10, 5, 10);
  return model;
}

// Lighting whose channels vary along different normal directions.
inline ShLighting colored_lighting() {
  ShLighting l = ShLighting::ambient(1.0);
  l.coeffs(3, 0) = 0.5;
  l.coeffs(1, 1) = 0.5;
  l.coeffs(3, 2) = -0.35;
  l.coeffs(1, 2) = -0.35;
  for (int c = 0; c < 3; ++c) l.coeffs(2, c) = -0.3;
  return l;
}

inline SceneParams toy_scene(int size = 128) {
  SceneParams p = initial_params(toy_model(), size, size);
  p.lighting = colored_lighting();
  return p;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("facefit_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

template <class F>
auto with_threads(int n, F&& f) {
  const int saved = omp_get_max_threads();
  omp_set_num_threads(n);
  auto out = f();
  omp_set_num_threads(saved);
  return out;
}

template <class T>
bool bitwise_equal(const std::vector<T>& a, const std::vector<T>& b) {
  return a.size() == b.size() && (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0);
}

inline double central_difference(const std::function<double(double)>& f, double x,
                                 double eps = 1e-4) {
  return (f(x + eps) - f(x - eps)) / (2 * eps);
}

inline double relative_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-12});
  return std::abs(a - b) / scale;
}

}  // namespace facefit::testing
