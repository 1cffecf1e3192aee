// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#include "facefit/errors.hpp"
#include "facefit/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace facefit {

namespace {

FormatError bad_line(const std::filesystem::path& path, int line, const std::string& why) {
  return FormatError(FormatError::Kind::BadValue,
                     path.string() + ":" + std::to_string(line) + ": " + why);
}

bool parse_double(std::string_view s, double& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool parse_int(std::string_view s, int& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

// Resolves a 1-based (or negative, relative) OBJ index against `count`.
int resolve_index(int raw, int count) {
  if (raw > 0 && raw <= count) return raw - 1;
  if (raw < 0 && -raw <= count) return count + raw;
  return -1;
}

}  // namespace

Mesh read_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(FormatError::Kind::Io, "cannot open " + path.string());
  std::vector<double> verts, uvs;
  std::vector<int> tris, tri_uvs;
  bool all_faces_have_uv = true;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag[0] == '#') continue;
    if (tag == "v" || tag == "vt") {
      const int want = tag == "v" ? 3 : 2;
      std::string tok;
      for (int k = 0; k < want; ++k) {
        double x;
        if (!(ss >> tok) || !parse_double(tok, x)) {
          throw bad_line(path, line_no, "malformed " + tag + " record");
        }
        (tag == "v" ? verts : uvs).push_back(x);
      }
    } else if (tag == "f") {
      std::vector<int> fv, ft;
      std::string tok;
      while (ss >> tok) {
        const auto slash = tok.find('/');
        int vi, ti = 0;
        if (!parse_int(std::string_view(tok).substr(0, slash), vi)) {
          throw bad_line(path, line_no, "malformed face index '" + tok + "'");
        }
        const int v = resolve_index(vi, static_cast<int>(verts.size() / 3));
        if (v < 0) {
          throw bad_line(path, line_no, "vertex index " + std::to_string(vi) + " out of range");
        }
        fv.push_back(v);
        int t = -1;
        if (slash != std::string::npos) {
          const auto rest = std::string_view(tok).substr(slash + 1);
          const auto slash2 = rest.find('/');
          const auto uv_part = rest.substr(0, slash2);
          if (!uv_part.empty()) {
            if (!parse_int(uv_part, ti)) {
              throw bad_line(path, line_no, "malformed face index '" + tok + "'");
            }
            t = resolve_index(ti, static_cast<int>(uvs.size() / 2));
            if (t < 0) {
              throw bad_line(path, line_no,
                             "texture index " + std::to_string(ti) + " out of range");
            }
          }
        }
        ft.push_back(t);
      }
      if (fv.size() < 3) throw bad_line(path, line_no, "face with fewer than 3 vertices");
      for (std::size_t k = 1; k + 1 < fv.size(); ++k) {
        for (std::size_t idx : {std::size_t{0}, k, k + 1}) {
          tris.push_back(fv[idx]);
          tri_uvs.push_back(ft[idx]);
          all_faces_have_uv = all_faces_have_uv && ft[idx] >= 0;
        }
      }
    }
  }
  Mesh mesh;
  const auto nv = static_cast<Eigen::Index>(verts.size() / 3);
  mesh.vertices.resize(nv, 3);
  for (Eigen::Index i = 0; i < nv; ++i) {
    mesh.vertices.row(i) << verts[3 * i], verts[3 * i + 1], verts[3 * i + 2];
  }
  mesh.triangles.resize(static_cast<Eigen::Index>(tris.size() / 3), 3);
  for (std::size_t i = 0; i < tris.size(); ++i) mesh.triangles(i / 3, i % 3) = tris[i];

  // Per-vertex UVs only when every corner of a vertex names the same vt.
  if (!uvs.empty() && !tris.empty() && all_faces_have_uv) {
    std::vector<int> vt_of(nv, -1);
    bool consistent = true;
    for (std::size_t i = 0; i < tris.size() && consistent; ++i) {
      int& slot = vt_of[tris[i]];
      if (slot < 0) slot = tri_uvs[i];
      consistent = slot == tri_uvs[i];
    }
    for (int s : vt_of) consistent = consistent && s >= 0;
    if (consistent) {
      mesh.uvs.resize(nv, 2);
      for (Eigen::Index i = 0; i < nv; ++i) {
        mesh.uvs.row(i) << uvs[2 * vt_of[i]], uvs[2 * vt_of[i] + 1];
      }
    }
  }
  return mesh;
}

void write_obj(const std::filesystem::path& path, const Mesh& mesh) {
  const bool has_uv = mesh.uvs.rows() > 0;
  if (has_uv && mesh.uvs.rows() != mesh.vertices.rows()) {
    throw DimensionError("write_obj: UV count differs from vertex count");
  }
  std::string out;
  char buf[128];
  for (Eigen::Index i = 0; i < mesh.vertices.rows(); ++i) {
    std::snprintf(buf, sizeof(buf), "v %.9g %.9g %.9g\n", mesh.vertices(i, 0),
                  mesh.vertices(i, 1), mesh.vertices(i, 2));
    out += buf;
  }
  for (Eigen::Index i = 0; has_uv && i < mesh.uvs.rows(); ++i) {
    std::snprintf(buf, sizeof(buf), "vt %.9g %.9g\n", mesh.uvs(i, 0), mesh.uvs(i, 1));
    out += buf;
  }
  for (Eigen::Index t = 0; t < mesh.triangles.rows(); ++t) {
    const int a = mesh.triangles(t, 0) + 1, b = mesh.triangles(t, 1) + 1,
              c = mesh.triangles(t, 2) + 1;
    if (has_uv) {
      std::snprintf(buf, sizeof(buf), "f %d/%d %d/%d %d/%d\n", a, a, b, b, c, c);
    } else {
      std::snprintf(buf, sizeof(buf), "f %d %d %d\n", a, b, c);
    }
    out += buf;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError(FormatError::Kind::Io, "cannot write " + path.string());
  f << out;
  if (!f) throw FormatError(FormatError::Kind::Io, "short write to " + path.string());
}

Points2 read_landmarks(const std::filesystem::path& path, int expected) {
  std::ifstream in(path);
  if (!in) throw FormatError(FormatError::Kind::Io, "cannot open " + path.string());
  std::vector<Vec2> pts;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string a, b, extra;
    if (!(ss >> a)) continue;   // blank line
    double x, y;
    if (!(ss >> b) || (ss >> extra) || !parse_double(a, x) || !parse_double(b, y)) {
      throw bad_line(path, line_no, "expected two numbers \"x y\"");
    }
    pts.emplace_back(x, y);
  }
  if (static_cast<int>(pts.size()) != expected) {
    throw FormatError(FormatError::Kind::BadValue,
                      path.string() + ": expected " + std::to_string(expected) +
                          " landmarks, found " + std::to_string(pts.size()));
  }
  Points2 out(expected, 2);
  for (int i = 0; i < expected; ++i) out.row(i) = pts[i].transpose();
  return out;
}

void write_landmarks(const std::filesystem::path& path, const Points2& landmarks) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError(FormatError::Kind::Io, "cannot write " + path.string());
  char buf[64];
  for (Eigen::Index i = 0; i < landmarks.rows(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.9g %.9g\n", landmarks(i, 0), landmarks(i, 1));
    f << buf;
  }
  if (!f) throw FormatError(FormatError::Kind::Io, "short write to " + path.string());
}

}  // namespace facefit
