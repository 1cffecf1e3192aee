// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#include "binary.hpp"
#include "facefit/errors.hpp"
#include "facefit/io.hpp"

#include <cmath>
#include <string>

namespace facefit {

namespace {

constexpr char kMagic[8] = {'U', 'V', 'M', 'A', 'P', '1', '\0', '\0'};

}  // namespace

void write_uvmap(const std::filesystem::path& path, const UvMap& map) {
  map.validate();
  detail::ByteWriter w;
  w.raw(kMagic, sizeof(kMagic));
  w.u32(static_cast<std::uint32_t>(map.width));
  w.u32(static_cast<std::uint32_t>(map.height));
  w.u32(static_cast<std::uint32_t>(map.channels));
  w.u8(static_cast<std::uint8_t>(map.space));
  for (double v : map.data) w.f32(v);
  for (auto m : map.mask) w.u8(m ? 1 : 0);
  auto& bytes = w.bytes();
  const std::uint32_t crc = detail::crc32(std::span(bytes).subspan(sizeof(kMagic)));
  w.u32(crc);
  detail::write_file(path, bytes);
}

UvMap read_uvmap(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = detail::read_file(path);
  const std::string where = path.string() + ": ";
  try {
    detail::ByteReader r(bytes);
    if (r.text(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) {
      throw FormatError(FormatError::Kind::MalformedHeader, "not a UVM1 file");
    }
    const std::uint32_t w = r.u32(), h = r.u32(), c = r.u32();
    const std::uint8_t tag = r.u8();
    if (w == 0 || h == 0) throw FormatError(FormatError::Kind::MalformedHeader, "zero-size map");
    if (tag > static_cast<std::uint8_t>(UvSpace::Color)) {
      throw FormatError(FormatError::Kind::MalformedHeader,
                        "unknown space tag " + std::to_string(tag));
    }
    const auto space = static_cast<UvSpace>(tag);
    if (c != (space == UvSpace::Scalar ? 1u : 3u)) {
      throw FormatError(FormatError::Kind::MalformedHeader,
                        "channel count " + std::to_string(c) + " does not match space tag");
    }
    const std::uint64_t texels = static_cast<std::uint64_t>(w) * h;
    const std::uint64_t payload = texels * c * 4 + texels + 4;
    if (r.remaining() < payload) {
      throw FormatError(FormatError::Kind::TruncatedPayload, "file ends before the data does");
    }
    if (r.remaining() > payload) {
      throw FormatError(FormatError::Kind::MalformedHeader, "trailing bytes after checksum");
    }
    UvMap map(static_cast<int>(w), static_cast<int>(h), static_cast<int>(c), space);
    for (double& v : map.data) v = r.f32();
    for (auto& m : map.mask) {
      const std::uint8_t b = r.u8();
      if (b > 1) throw FormatError(FormatError::Kind::BadValue, "mask byte is not 0 or 1");
      m = b;
    }
    const std::size_t body_end = r.position();
    const std::uint32_t stored = r.u32();
    const std::uint32_t actual = detail::crc32(
        std::span(bytes).subspan(sizeof(kMagic), body_end - sizeof(kMagic)));
    if (stored != actual) {
      throw FormatError(FormatError::Kind::ChecksumMismatch, "CRC32 mismatch");
    }
    map.validate();
    return map;
  } catch (const FormatError& e) {
    throw FormatError(e.kind(), where + e.what());
  } catch (const Error& e) {
    throw FormatError(FormatError::Kind::BadValue, where + e.what());
  }
}

DepthRead read_depth(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> head = detail::read_file(path);
  if (head.size() >= sizeof(kMagic) &&
      std::equal(kMagic, kMagic + sizeof(kMagic), head.begin())) {
    const UvMap map = read_uvmap(path);
    if (map.space != UvSpace::Scalar) {
      throw FormatError(FormatError::Kind::BadValue,
                        path.string() + ": depth maps must be single-channel");
    }
    DepthRead out;
    out.depth.width = map.width;
    out.depth.height = map.height;
    out.depth.data = map.data;
    out.mask = map.mask;
    return out;
  }
  return read_depth_png16(path);
}

}  // namespace facefit
