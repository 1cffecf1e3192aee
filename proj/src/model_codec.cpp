// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

// FMM1 layout:
//   "FACEMDL1"                        8-byte magic
//   uint32 n, n bytes of JSON         {V, T, K_id, K_exp, K_tex, landmark_count}
//   float32 mean_shape[3V]
//   float32 basis_id[3V * K_id]       column-major
//   float32 basis_exp[3V * K_exp]
//   float32 mean_albedo[3V]
//   float32 basis_tex[3V * K_tex]
//   float32 uv_coords[2V]             (u, v) per vertex
//   uint32 triangles[3T]
//   uint32 landmark_indices[landmark_count]
//   uint32 CRC32 of every byte between the magic and the checksum

#include "binary.hpp"
#include "facefit/errors.hpp"
#include "facefit/facemodel.hpp"

#include <json.hpp>

#include <string>

namespace facefit {

namespace {

constexpr char kMagic[8] = {'F', 'A', 'C', 'E', 'M', 'D', 'L', '1'};

using detail::ByteReader;
using detail::ByteWriter;

void put_floats(ByteWriter& w, const double* data, Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i) w.f32(data[i]);
}

void get_floats(ByteReader& r, double* data, Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i) data[i] = r.f32();
}

std::vector<std::uint8_t> serialize_payload(const FaceModel& m) {
  const nlohmann::json header = {{"V", m.num_vertices()},       {"T", m.num_triangles()},
                                 {"K_id", m.num_id()},           {"K_exp", m.num_exp()},
                                 {"K_tex", m.num_tex()},
                                 {"landmark_count", m.landmark_indices.size()}};
  const std::string text = header.dump();
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(text.size()));
  w.text(text);
  put_floats(w, m.mean_shape.data(), m.mean_shape.size());
  put_floats(w, m.basis_id.data(), m.basis_id.size());
  put_floats(w, m.basis_exp.data(), m.basis_exp.size());
  put_floats(w, m.mean_albedo.data(), m.mean_albedo.size());
  put_floats(w, m.basis_tex.data(), m.basis_tex.size());
  put_floats(w, m.uv_coords.data(), m.uv_coords.size());
  for (Eigen::Index i = 0; i < m.triangles.size(); ++i) {
    w.u32(static_cast<std::uint32_t>(m.triangles.data()[i]));
  }
  for (int idx : m.landmark_indices) w.u32(static_cast<std::uint32_t>(idx));
  return std::move(w.bytes());
}

int header_int(const nlohmann::json& h, const char* key) {
  if (!h.contains(key) || !h[key].is_number_integer() || h[key].get<long long>() < 0 ||
      h[key].get<long long>() > (1LL << 30)) {
    throw FormatError(FormatError::Kind::MalformedHeader,
                      std::string("malformed header: bad or missing '") + key + "'");
  }
  return h[key].get<int>();
}

}  // namespace

std::uint32_t model_fingerprint(const FaceModel& model) {
  return detail::crc32(serialize_payload(model));
}

void write_model(const std::filesystem::path& path, const FaceModel& model) {
  model.validate();
  ByteWriter out;
  out.raw(kMagic, sizeof kMagic);
  const auto payload = serialize_payload(model);
  out.raw(payload.data(), payload.size());
  out.u32(detail::crc32(payload));
  detail::write_file(path, out.bytes());
}

FaceModel read_model(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw FormatError(FormatError::Kind::MalformedHeader,
                      "malformed header: " + path.string() + " is not an FMM1 model");
  }
  ByteReader r{std::span<const std::uint8_t>(bytes).subspan(sizeof kMagic)};
  const std::uint32_t header_len = r.u32();
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(r.text(header_len));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(FormatError::Kind::MalformedHeader,
                      std::string("malformed header: ") + e.what());
  }
  const int v = header_int(h, "V"), t = header_int(h, "T");
  const int kid = header_int(h, "K_id"), kexp = header_int(h, "K_exp");
  const int ktex = header_int(h, "K_tex"), nl = header_int(h, "landmark_count");

  const std::size_t expected = static_cast<std::size_t>(4) *
      (3ull * v * (2 + kid + kexp + ktex) + 2ull * v + 3ull * t + nl + 1);
  if (r.remaining() < expected) {
    throw FormatError(FormatError::Kind::TruncatedPayload,
                      "truncated payload in " + path.string() + ": expected " +
                          std::to_string(expected) + " bytes after header, found " +
                          std::to_string(r.remaining()));
  }
  if (r.remaining() > expected) {
    throw FormatError(FormatError::Kind::MalformedHeader,
                      "malformed header: trailing bytes after payload in " + path.string());
  }

  FaceModel m;
  m.mean_shape.resize(3 * v);
  get_floats(r, m.mean_shape.data(), m.mean_shape.size());
  m.basis_id.resize(3 * v, kid);
  get_floats(r, m.basis_id.data(), m.basis_id.size());
  m.basis_exp.resize(3 * v, kexp);
  get_floats(r, m.basis_exp.data(), m.basis_exp.size());
  m.mean_albedo.resize(3 * v);
  get_floats(r, m.mean_albedo.data(), m.mean_albedo.size());
  m.basis_tex.resize(3 * v, ktex);
  get_floats(r, m.basis_tex.data(), m.basis_tex.size());
  m.uv_coords.resize(v, 2);
  get_floats(r, m.uv_coords.data(), m.uv_coords.size());
  m.triangles.resize(t, 3);
  for (Eigen::Index i = 0; i < m.triangles.size(); ++i) {
    m.triangles.data()[i] = static_cast<int>(r.u32());
  }
  m.landmark_indices.resize(nl);
  for (int& idx : m.landmark_indices) idx = static_cast<int>(r.u32());

  const std::size_t payload_end = sizeof kMagic + r.position();
  const std::uint32_t stored = r.u32();
  const std::uint32_t actual = detail::crc32(
      std::span(bytes).subspan(sizeof kMagic, payload_end - sizeof kMagic));
  if (stored != actual) {
    throw FormatError(FormatError::Kind::ChecksumMismatch,
                      "checksum mismatch in " + path.string());
  }
  m.validate();
  return m;
}

}  // namespace facefit
