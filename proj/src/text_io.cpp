// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#include "facefit/errors.hpp"
#include "facefit/io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>

namespace facefit {

namespace {

using nlohmann::json;

constexpr const char* kParamsFormat = "FPJ1";

FormatError bad(const std::string& why) {
  return FormatError(FormatError::Kind::BadValue, "params: " + why);
}

const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw bad(std::string("missing key '") + key + "'");
  return j.at(key);
}

double number(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_number()) throw bad(std::string("'") + key + "' is not a number");
  return v.get<double>();
}

Eigen::VectorXd vector(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_array()) throw bad(std::string("'") + key + "' is not an array");
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw bad(std::string("'") + key + "' holds a non-number");
    out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
  }
  return out;
}

json to_array(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

std::string params_to_json(const SceneParams& params, const ParamsMeta& meta) {
  json j;
  j["format"] = kParamsFormat;
  j["x_id"] = to_array(params.coeffs.id);
  j["x_exp"] = to_array(params.coeffs.exp);
  j["x_tex"] = to_array(params.coeffs.tex);
  const Pose& p = params.pose;
  j["pose"] = {{"f", p.f}, {"rx", p.rx}, {"ry", p.ry}, {"rz", p.rz},
               {"tx", p.tx}, {"ty", p.ty}, {"tz", p.tz}};
  j["sh"] = to_array(lighting_to_vector(params.lighting));
  j["meta"] = {{"model_hash", meta.model_hash},
               {"image_size", {meta.image_size[0], meta.image_size[1]}}};
  return j.dump(2) + "\n";
}

ParamsFile params_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(FormatError::Kind::MalformedHeader,
                      std::string("params: invalid JSON (") + e.what() + ")");
  }
  if (!j.is_object()) throw FormatError(FormatError::Kind::MalformedHeader, "params: not an object");
  if (j.contains("format") && j["format"] != kParamsFormat) {
    throw FormatError(FormatError::Kind::MalformedHeader, "params: unknown format tag");
  }
  ParamsFile out;
  out.params.coeffs.id = vector(j, "x_id");
  out.params.coeffs.exp = vector(j, "x_exp");
  out.params.coeffs.tex = vector(j, "x_tex");
  const json& pose = require(j, "pose");
  Pose& p = out.params.pose;
  p.f = number(pose, "f");
  p.rx = number(pose, "rx");
  p.ry = number(pose, "ry");
  p.rz = number(pose, "rz");
  p.tx = number(pose, "tx");
  p.ty = number(pose, "ty");
  p.tz = number(pose, "tz");
  const Eigen::VectorXd sh = vector(j, "sh");
  if (sh.size() != 3 * kShCoeffs) {
    throw bad("'sh' must hold " + std::to_string(3 * kShCoeffs) + " values, found " +
              std::to_string(sh.size()));
  }
  out.params.lighting = lighting_from_vector(sh);
  const json& meta = require(j, "meta");
  const json& hash = require(meta, "model_hash");
  if (!hash.is_number_unsigned()) throw bad("'model_hash' must be an unsigned integer");
  out.meta.model_hash = hash.get<std::uint32_t>();
  const json& size = require(meta, "image_size");
  if (!size.is_array() || size.size() != 2 || !size[0].is_number_integer() ||
      !size[1].is_number_integer()) {
    throw bad("'image_size' must be [width, height]");
  }
  out.meta.image_size = {size[0].get<int>(), size[1].get<int>()};
  return out;
}

ParamsFile read_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(FormatError::Kind::Io, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return params_from_json(ss.str());
  } catch (const FormatError& e) {
    throw FormatError(e.kind(), path.string() + ": " + e.what());
  }
}

void write_params(const std::filesystem::path& path, const SceneParams& params,
                  const ParamsMeta& meta) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError(FormatError::Kind::Io, "cannot write " + path.string());
  f << params_to_json(params, meta);
  if (!f) throw FormatError(FormatError::Kind::Io, "short write to " + path.string());
}

}  // namespace facefit
