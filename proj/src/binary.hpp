// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

// Little-endian byte buffers shared by the binary codecs.

#pragma once

#include "facefit/errors.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace facefit::detail {

static_assert(std::endian::native == std::endian::little,
              "binary codecs assume a little-endian host");

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

class ByteWriter {
 public:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  void u8(std::uint8_t x) { bytes_.push_back(x); }
  void u32(std::uint32_t x) { raw(&x, 4); }
  void f32(double x) {
    const float f = static_cast<float>(x);
    raw(&f, 4);
  }
  void text(std::string_view s) { raw(s.data(), s.size()); }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) {
      throw FormatError(FormatError::Kind::TruncatedPayload, "truncated payload");
    }
  }
  void raw(void* out, std::size_t n) {
    need(n);
    std::memcpy(out, bytes_.data() + pos_, n);
    pos_ += n;
  }
  std::uint8_t u8() {
    std::uint8_t x;
    raw(&x, 1);
    return x;
  }
  std::uint32_t u32() {
    std::uint32_t x;
    raw(&x, 4);
    return x;
  }
  double f32() {
    float f;
    raw(&f, 4);
    return static_cast<double>(f);
  }
  std::string text(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace facefit::detail
