// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#include "facefit/errors.hpp"
#include "facefit/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

namespace facefit {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// libpng reports errors through longjmp; the message is kept here so it can
// be rethrown as a FormatError once control is back in C++.
struct PngError {
  std::jmp_buf jump;
  char message[256] = "";
};

void on_png_error(png_structp png, png_const_charp msg) {
  auto* err = static_cast<PngError*>(png_get_error_ptr(png));
  std::snprintf(err->message, sizeof(err->message), "%s", msg);
  std::longjmp(err->jump, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) {
    throw FormatError(FormatError::Kind::Io,
                      std::string("cannot open ") + path.string() + (mode[0] == 'r' ? "" : " for writing"));
  }
  return f;
}

struct DecodedPng {
  int width = 0, height = 0, channels = 0, bit_depth = 0;
  std::vector<std::uint8_t> bytes;   // rows of width*channels samples, big-endian 16-bit
};

DecodedPng decode(const std::filesystem::path& path, bool want_16bit_gray) {
  FilePtr file = open_file(path, "rb");
  std::uint8_t sig[8] = {};
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw FormatError(FormatError::Kind::MalformedHeader, path.string() + ": not a PNG file");
  }
  PngError err;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, on_png_error,
                                           on_png_warning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(FormatError::Kind::Io, "libpng initialization failed");
  }
  DecodedPng out;
  std::vector<png_bytep> rows;
  std::string problem;
  if (setjmp(err.jump) != 0) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(FormatError::Kind::TruncatedPayload,
                      path.string() + ": corrupt PNG (" + err.message + ")");
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (want_16bit_gray) {
    if (depth != 16 || color != PNG_COLOR_TYPE_GRAY) {
      problem = "expected a 16-bit grayscale depth PNG";
    }
  } else if (depth != 8) {
    problem = "unsupported bit depth " + std::to_string(depth) + " (8-bit PNG expected)";
  }
  if (!problem.empty()) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(FormatError::Kind::BadValue, path.string() + ": " + problem);
  }
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_read_update_info(png, info);
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  out.bytes.resize(stride * out.height);
  rows.resize(out.height);
  for (int r = 0; r < out.height; ++r) rows[r] = out.bytes.data() + stride * r;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

void encode(const std::filesystem::path& path, int width, int height, int bit_depth,
            int color_type, const std::vector<std::uint8_t>& bytes) {
  FilePtr file = open_file(path, "wb");
  PngError err;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, on_png_error,
                                            on_png_warning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    png_destroy_write_struct(&png, &info);
    throw FormatError(FormatError::Kind::Io, "libpng initialization failed");
  }
  const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  const std::size_t stride = static_cast<std::size_t>(width) * channels * (bit_depth / 8);
  std::vector<png_const_bytep> rows(height);
  for (int r = 0; r < height; ++r) rows[r] = bytes.data() + stride * r;
  if (setjmp(err.jump) != 0) {
    png_destroy_write_struct(&png, &info);
    throw FormatError(FormatError::Kind::Io, path.string() + ": PNG encoding failed (" +
                                                 err.message + ")");
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_rows(png, const_cast<png_bytepp>(rows.data()), height);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

double srgb_to_linear(double e) {
  return e <= 0.04045 ? e / 12.92 : std::pow((e + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double l) {
  return l <= 0.0031308 ? 12.92 * l : 1.055 * std::pow(l, 1.0 / 2.4) - 0.055;
}

ImageBuffer read_png(const std::filesystem::path& path) {
  const DecodedPng d = decode(path, false);
  // Lookup table: 8-bit code value to linear light.
  double lut[256];
  for (int i = 0; i < 256; ++i) lut[i] = srgb_to_linear(i / 255.0);
  ImageBuffer img(d.width, d.height);
  const bool gray = d.channels <= 2;
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    const std::uint8_t* px = d.bytes.data() + p * d.channels;
    for (int ch = 0; ch < 3; ++ch) img.data[3 * p + ch] = lut[px[gray ? 0 : ch]];
  }
  return img;
}

void write_png(const std::filesystem::path& path, const ImageBuffer& image) {
  if (image.width <= 0 || image.height <= 0 || image.data.size() != image.pixel_count() * 3) {
    throw DimensionError("write_png: empty or inconsistent image");
  }
  std::vector<std::uint8_t> bytes(image.data.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const double v = std::isfinite(image.data[i]) ? std::clamp(image.data[i], 0.0, 1.0) : 0.0;
    bytes[i] = static_cast<std::uint8_t>(std::lround(linear_to_srgb(v) * 255.0));
  }
  encode(path, image.width, image.height, 8, PNG_COLOR_TYPE_RGB, bytes);
}

DepthRead read_depth_png16(const std::filesystem::path& path) {
  const DecodedPng d = decode(path, true);
  DepthRead out;
  out.depth.width = d.width;
  out.depth.height = d.height;
  out.depth.data.resize(static_cast<std::size_t>(d.width) * d.height);
  out.mask.resize(out.depth.data.size());
  for (std::size_t p = 0; p < out.depth.data.size(); ++p) {
    const unsigned v = (static_cast<unsigned>(d.bytes[2 * p]) << 8) | d.bytes[2 * p + 1];
    out.depth.data[p] = v / kDepthPngScale;
    out.mask[p] = v != 0;
  }
  return out;
}

void write_depth_png16(const std::filesystem::path& path, const DepthImage& depth) {
  if (depth.width <= 0 || depth.height <= 0 ||
      depth.data.size() != static_cast<std::size_t>(depth.width) * depth.height) {
    throw DimensionError("write_depth_png16: empty or inconsistent depth image");
  }
  std::vector<std::uint8_t> bytes(2 * depth.data.size());
  for (std::size_t p = 0; p < depth.data.size(); ++p) {
    const double v = std::isfinite(depth.data[p]) ? depth.data[p] * kDepthPngScale : 0.0;
    const auto q = static_cast<unsigned>(std::clamp(std::lround(v), 0L, 65535L));
    bytes[2 * p] = static_cast<std::uint8_t>(q >> 8);
    bytes[2 * p + 1] = static_cast<std::uint8_t>(q & 0xff);
  }
  encode(path, depth.width, depth.height, 16, PNG_COLOR_TYPE_GRAY, bytes);
}

}  // namespace facefit
