// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "facefit/metrics.hpp"
#include "facefit/scene.hpp"
#include "facefit/types.hpp"
#include "facefit/uvspace.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

namespace facefit {

/// IEC 61966-2-1 transfer curve.
double srgb_to_linear(double encoded);
double linear_to_srgb(double linear);

/// 8-bit PNG (gray, RGB, with or without alpha, or palette) decoded to linear RGB.
ImageBuffer read_png(const std::filesystem::path& path);
/// 8-bit sRGB PNG; values are clamped to [0, 1] first.
void write_png(const std::filesystem::path& path, const ImageBuffer& image);

/// Millimetres are stored times this factor in 16-bit depth PNGs.
inline constexpr double kDepthPngScale = 10.0;

struct DepthRead {
  DepthImage depth;
  Mask mask;
};

/// 16-bit gray PNG; zero pixels are invalid.
DepthRead read_depth_png16(const std::filesystem::path& path);
void write_depth_png16(const std::filesystem::path& path, const DepthImage& depth);
/// Either a 16-bit PNG or a scalar UVM1 file, picked by the file's magic.
DepthRead read_depth(const std::filesystem::path& path);

/// Wavefront OBJ subset: v, vt and f records; polygons are fan-triangulated.
Mesh read_obj(const std::filesystem::path& path);
void write_obj(const std::filesystem::path& path, const Mesh& mesh);

/// One "x y" line per landmark.
Points2 read_landmarks(const std::filesystem::path& path, int expected = 68);
void write_landmarks(const std::filesystem::path& path, const Points2& landmarks);

UvMap read_uvmap(const std::filesystem::path& path);
void write_uvmap(const std::filesystem::path& path, const UvMap& map);

struct ParamsMeta {
  std::uint32_t model_hash = 0;
  std::array<int, 2> image_size = {0, 0};   // width, height
};

struct ParamsFile {
  SceneParams params;
  ParamsMeta meta;
};

std::string params_to_json(const SceneParams& params, const ParamsMeta& meta);
ParamsFile params_from_json(const std::string& text);
ParamsFile read_params(const std::filesystem::path& path);
void write_params(const std::filesystem::path& path, const SceneParams& params,
                  const ParamsMeta& meta);

}  // namespace facefit
