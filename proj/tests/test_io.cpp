// Copyright 2026 The facefit Authors
// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"

#include "facefit/errors.hpp"
#include "facefit/io.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>

namespace facefit {
namespace {

namespace fs = std::filesystem;

std::vector<char> slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  f << text;
}

void spit(const fs::path& p, const std::vector<char>& bytes) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

template <class F>
FormatError::Kind error_kind(F&& f) {
  try {
    f();
  } catch (const FormatError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no FormatError thrown";
  return FormatError::Kind::Io;
}

template <class F>
std::string error_message(F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  ADD_FAILURE() << "no exception thrown";
  return {};
}

TEST(Srgb, RoundTripAndKnots) {
  EXPECT_EQ(srgb_to_linear(0.0), 0.0);
  EXPECT_NEAR(srgb_to_linear(1.0), 1.0, 1e-15);
  EXPECT_NEAR(srgb_to_linear(0.04045), 0.04045 / 12.92, 1e-12);
  for (double x = 0.0; x <= 1.0; x += 0.01) EXPECT_NEAR(linear_to_srgb(srgb_to_linear(x)), x, 1e-12);
}

TEST(Png, MidGrayRoundTrip) {
  const auto dir = testing::temp_dir("png");
  ImageBuffer img(17, 9, 0.5);
  write_png(dir / "g.png", img);
  const ImageBuffer back = read_png(dir / "g.png");
  ASSERT_EQ(back.width, 17);
  ASSERT_EQ(back.height, 9);
  // The bound holds in the stored sRGB encoding.
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    EXPECT_LE(std::abs(linear_to_srgb(back.data[i]) - linear_to_srgb(img.data[i])), 1.0 / 255.0);
  }
}

TEST(Png, RandomRoundTripWithinQuantization) {
  const auto dir = testing::temp_dir("png_random");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ImageBuffer img(31, 20);
  for (double& v : img.data) v = u(rng);
  write_png(dir / "r.png", img);
  const ImageBuffer back = read_png(dir / "r.png");
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    EXPECT_LE(std::abs(linear_to_srgb(back.data[i]) - linear_to_srgb(img.data[i])), 0.5 / 255.0 + 1e-12);
  }
}

TEST(Png, OnePixelKeepsDimensions) {
  const auto dir = testing::temp_dir("png_1px");
  write_png(dir / "p.png", ImageBuffer(1, 1, 0.25));
  const ImageBuffer back = read_png(dir / "p.png");
  EXPECT_EQ(back.width, 1);
  EXPECT_EQ(back.height, 1);
}

TEST(Png, CorruptMagic) {
  const auto dir = testing::temp_dir("png_bad");
  write_png(dir / "p.png", ImageBuffer(4, 4, 0.25));
  auto bytes = slurp(dir / "p.png");
  bytes[1] = 'X';
  spit(dir / "p.png", bytes);
  EXPECT_EQ(error_kind([&] { read_png(dir / "p.png"); }), FormatError::Kind::MalformedHeader);
}

TEST(Png, SixteenBitColorRejected) {
  const auto dir = testing::temp_dir("png_16");
  DepthImage d{3, 2, {1, 2, 3, 4, 5, 6}};
  write_depth_png16(dir / "d.png", d);
  EXPECT_NE(error_message([&] { read_png(dir / "d.png"); }).find("bit depth"), std::string::npos);
}

TEST(DepthPng, RoundTripAndMask) {
  const auto dir = testing::temp_dir("depth_png");
  DepthImage d{3, 2, {0.0, 12.3, 100.0, 250.7, 0.0, 6553.5}};
  write_depth_png16(dir / "d.png", d);
  const DepthRead r = read_depth(dir / "d.png");
  ASSERT_EQ(r.depth.width, 3);
  for (std::size_t i = 0; i < d.data.size(); ++i) {
    EXPECT_NEAR(r.depth.data[i], d.data[i], 0.5 / kDepthPngScale);
    EXPECT_EQ(r.mask[i] != 0, d.data[i] != 0.0);
  }
}

TEST(DepthUvm, ReadsScalarMaps) {
  const auto dir = testing::temp_dir("depth_uvm");
  UvMap m(2, 2, 1, UvSpace::Scalar);
  m.data = {1, 2, 3, 4};
  m.mask = {1, 0, 1, 1};
  write_uvmap(dir / "d.uvm", m);
  const DepthRead r = read_depth(dir / "d.uvm");
  EXPECT_EQ(r.depth.data, m.data);
  EXPECT_EQ(r.mask, m.mask);
}

TEST(Obj, ToyRoundTrip) {
  const auto dir = testing::temp_dir("obj");
  const FaceModel& model = testing::toy_model();
  const Mesh m{synthesize(model, ShapeCoeffs::zeros(model)).vertices, model.triangles,
               model.uv_coords};
  write_obj(dir / "m.obj", m);
  const Mesh r = read_obj(dir / "m.obj");
  EXPECT_EQ(r.triangles, m.triangles);
  ASSERT_EQ(r.vertices.rows(), m.vertices.rows());
  for (Eigen::Index i = 0; i < m.vertices.size(); ++i) {
    EXPECT_NEAR(r.vertices.data()[i], m.vertices.data()[i], 1e-8 * std::max(1.0, std::abs(m.vertices.data()[i])));
  }
  ASSERT_EQ(r.uvs.rows(), m.uvs.rows());
  // Writing what was read reproduces the file byte for byte.
  write_obj(dir / "r.obj", r);
  EXPECT_EQ(slurp(dir / "m.obj"), slurp(dir / "r.obj"));
}

TEST(Obj, FaceWithUvSlots) {
  const auto dir = testing::temp_dir("obj_vt");
  spit(dir / "t.obj",
       "v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0.1 0.2\nvt 0.3 0.4\nvt 0.5 0.6\nvn 0 0 1\n"
       "f 1/1/1 2/2/1 3/3/1\n");
  const Mesh m = read_obj(dir / "t.obj");
  ASSERT_EQ(m.triangles.rows(), 1);
  ASSERT_EQ(m.uvs.rows(), 3);
  EXPECT_DOUBLE_EQ(m.uvs(1, 0), 0.3);
  EXPECT_DOUBLE_EQ(m.uvs(2, 1), 0.6);
  spit(dir / "u.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 0 1\nf 1/1 2/2 3/3\n");
  EXPECT_EQ(read_obj(dir / "u.obj").uvs.rows(), 3);
}

TEST(Obj, NegativeIndicesAndQuads) {
  const auto dir = testing::temp_dir("obj_neg");
  spit(dir / "q.obj", "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf -4 -3 -2 -1\n");
  const Mesh m = read_obj(dir / "q.obj");
  EXPECT_EQ(m.triangles.rows(), 2);
  EXPECT_EQ(m.triangles(0, 0), 0);
  EXPECT_EQ(m.triangles(1, 2), 3);
}

TEST(Obj, ZeroIndexRejectedWithLine) {
  const auto dir = testing::temp_dir("obj_zero");
  spit(dir / "z.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n");
  const std::string msg = error_message([&] { read_obj(dir / "z.obj"); });
  EXPECT_NE(msg.find("4"), std::string::npos) << msg;
  spit(dir / "o.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n");
  EXPECT_THROW(read_obj(dir / "o.obj"), FormatError);
  spit(dir / "m.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2\n");
  EXPECT_THROW(read_obj(dir / "m.obj"), FormatError);
}

Points2 sample_landmarks() {
  Points2 p(kLandmarkCount, 2);
  for (int i = 0; i < kLandmarkCount; ++i) p.row(i) << 1.0 / (i + 3), -12.5 * i + 0.1;
  return p;
}

TEST(Landmarks, RoundTrip) {
  const auto dir = testing::temp_dir("lm");
  const Points2 p = sample_landmarks();
  write_landmarks(dir / "l.txt", p);
  const Points2 r = read_landmarks(dir / "l.txt");
  char buf[32];
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.9g", p.data()[i]);
    EXPECT_EQ(r.data()[i], std::stod(buf)) << i;
  }
  write_landmarks(dir / "r.txt", r);
  EXPECT_EQ(slurp(dir / "l.txt"), slurp(dir / "r.txt"));
}

TEST(Landmarks, WrongCountNamesIt) {
  const auto dir = testing::temp_dir("lm_count");
  std::string text;
  for (int i = 0; i < 67; ++i) text += "1 2\n";
  spit(dir / "l.txt", text);
  EXPECT_NE(error_message([&] { read_landmarks(dir / "l.txt"); }).find("67"), std::string::npos);
}

TEST(Landmarks, BadTokenNamesLine) {
  const auto dir = testing::temp_dir("lm_token");
  std::string text;
  for (int i = 0; i < 68; ++i) text += i == 4 ? "1 abc\n" : "1 2\n";
  spit(dir / "l.txt", text);
  EXPECT_NE(error_message([&] { read_landmarks(dir / "l.txt"); }).find("5"), std::string::npos);
}

TEST(UvmCodec, RandomRoundTripBitIdentical) {
  const auto dir = testing::temp_dir("uvm");
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  for (UvSpace s : {UvSpace::Model, UvSpace::View, UvSpace::Scalar, UvSpace::Color}) {
    UvMap m(13, 7, s == UvSpace::Scalar ? 1 : 3, s);
    for (double& v : m.data) v = static_cast<float>(n(rng));
    for (auto& b : m.mask) b = rng() % 2;
    write_uvmap(dir / "m.uvm", m);
    const UvMap r = read_uvmap(dir / "m.uvm");
    EXPECT_EQ(r.space, s);
    EXPECT_TRUE(testing::bitwise_equal(r.data, m.data));
    EXPECT_EQ(r.mask, m.mask);
  }
}

TEST(UvmCodec, Errors) {
  const auto dir = testing::temp_dir("uvm_err");
  UvMap m(4, 3, 1, UvSpace::Scalar);
  write_uvmap(dir / "m.uvm", m);
  const auto good = slurp(dir / "m.uvm");

  auto bad = good;
  bad.back() ^= 0x01;
  spit(dir / "crc.uvm", bad);
  EXPECT_EQ(error_kind([&] { read_uvmap(dir / "crc.uvm"); }), FormatError::Kind::ChecksumMismatch);

  bad = good;
  bad[8] = bad[9] = bad[10] = bad[11] = 0;   // width
  spit(dir / "zero.uvm", bad);
  EXPECT_EQ(error_kind([&] { read_uvmap(dir / "zero.uvm"); }), FormatError::Kind::MalformedHeader);

  bad = good;
  bad.resize(bad.size() - 3);
  spit(dir / "short.uvm", bad);
  EXPECT_EQ(error_kind([&] { read_uvmap(dir / "short.uvm"); }), FormatError::Kind::TruncatedPayload);

  EXPECT_THROW(write_uvmap(dir / "x.uvm", UvMap()), Error);
}

SceneParams random_params(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  SceneParams p = SceneParams::zeros(testing::toy_model());
  Eigen::VectorXd v = p.to_vector();
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = n(rng) / 3.0;
  p = SceneParams::from_vector(v, p);
  p.pose.f = 0.5 + std::abs(n(rng));
  return p;
}

TEST(ParamsCodec, RoundTripExact) {
  const auto dir = testing::temp_dir("params");
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SceneParams p = random_params(seed);
    write_params(dir / "p.json", p, {0xdeadbeefu, {128, 96}});
    const ParamsFile r = read_params(dir / "p.json");
    const Eigen::VectorXd a = p.to_vector(), b = r.params.to_vector();
    ASSERT_EQ(a.size(), b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]) << i;
    EXPECT_EQ(r.meta.model_hash, 0xdeadbeefu);
    EXPECT_EQ(r.meta.image_size[0], 128);
    EXPECT_EQ(r.meta.image_size[1], 96);
  }
}

TEST(ParamsCodec, MissingShRejected) {
  std::string text = params_to_json(random_params(1), {});
  const auto pos = text.find("\"sh\"");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 4, "\"xx\"");
  EXPECT_THROW(params_from_json(text), FormatError);
}

TEST(ParamsCodec, ShorterShRejected) {
  const std::string text = params_to_json(random_params(2), {});
  const std::size_t open = text.find('[', text.find("\"sh\""));
  const std::size_t comma = text.find(',', open);
  std::string cut = text.substr(0, open + 1) + text.substr(comma + 1);
  EXPECT_THROW(params_from_json(cut), FormatError);
}

}  // namespace
}  // namespace facefit
