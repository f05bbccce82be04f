// Copyright 2026 The cenet Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "cenet/data.hpp"
#include "cenet/serialize.hpp"
#include "generators.hpp"

using namespace cenet;
using cenet::testing::Gen;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& leaf) {
  auto dir = fs::temp_directory_path() / "cenet_test_data" / leaf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

Sample random_sample(Gen& g, std::size_t h, std::size_t w) {
  return Sample{"s", g.tensor<float>({3, h, w}, 0.0, 1.0), g.labels(h, w, 2)};
}

/// Half-pixel bilinear resample of one channel.
double bilinear_at(const Tensor<float>& img, std::size_t ch, std::size_t out_h, std::size_t out_w, std::size_t r,
                   std::size_t c) {
  const std::size_t h = img.dim(1), w = img.dim(2);
  auto src = [](std::size_t i, std::size_t in, std::size_t out) {
    return std::max(0.0, (double(i) + 0.5) * double(in) / double(out) - 0.5);
  };
  const double sy = src(r, h, out_h), sx = src(c, w, out_w);
  const std::size_t y0 = std::min(std::size_t(sy), h - 1), x0 = std::min(std::size_t(sx), w - 1);
  const std::size_t y1 = std::min(y0 + 1, h - 1), x1 = std::min(x0 + 1, w - 1);
  const double fy = sy - double(y0), fx = sx - double(x0);
  auto px = [&](std::size_t y, std::size_t x) { return double(img[(ch * h + y) * w + x]); };
  return (1 - fy) * ((1 - fx) * px(y0, x0) + fx * px(y0, x1)) + fy * ((1 - fx) * px(y1, x0) + fx * px(y1, x1));
}

}  // namespace

TEST_CASE("P6 decode gives k/255") {
  std::string file = "P6\n# comment\n3 1\n255\n";
  const std::uint8_t px[9] = {0, 1, 2, 127, 128, 129, 253, 254, 255};
  file.append(reinterpret_cast<const char*>(px), 9);
  auto r = decode_pnm(bytes_of(file));
  CHECK(r.width == 3);
  CHECK(r.height == 1);
  CHECK(r.channels == 3);
  auto img = raster_to_image(r);
  REQUIRE(img.shape() == Shape{3, 1, 3});
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t x = 0; x < 3; ++x) CHECK(img[c * 3 + x] == float(px[x * 3 + c]) / 255.0f);
  CHECK(decode_pnm(encode_pnm(r)).pixels == r.pixels);
}

TEST_CASE("malformed PNM names a byte offset") {
  for (const std::string bad : {"P7\n1 1\n255\n\x01", "P5\n2 2\n255\n\x01", "P5\n1 1\n65535\n\x01\x01", "P5\nx"}) {
    try {
      decode_pnm(bytes_of(bad));
      FAIL("expected DataError for " << bad);
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("byte offset") != std::string::npos);
    }
  }
}

TEST_CASE("PNG decode") {
  if (!png_supported()) return;
  const std::vector<std::uint8_t> rgb{
      0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d, 0x49, 0x48, 0x44, 0x52, 0x00, 0x00,
      0x00, 0x02, 0x00, 0x00, 0x00, 0x02, 0x08, 0x02, 0x00, 0x00, 0x00, 0xfd, 0xd4, 0x9a, 0x73, 0x00, 0x00, 0x00,
      0x13, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9c, 0x63, 0xf8, 0xcf, 0xc0, 0xc0, 0x00, 0xc2, 0x0c, 0xff, 0xb9, 0x44,
      0xe4, 0x00, 0x1a, 0x58, 0x03, 0x3a, 0x56, 0x63, 0xa2, 0x3c, 0x00, 0x00, 0x00, 0x00, 0x49, 0x45, 0x4e, 0x44,
      0xae, 0x42, 0x60, 0x82};
  const std::vector<std::uint8_t> grey{
      0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d, 0x49, 0x48, 0x44, 0x52, 0x00, 0x00,
      0x00, 0x03, 0x00, 0x00, 0x00, 0x01, 0x08, 0x00, 0x00, 0x00, 0x00, 0x3e, 0x8b, 0x4b, 0x68, 0x00, 0x00, 0x00,
      0x0c, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9c, 0x63, 0x60, 0x60, 0xfc, 0x0f, 0x00, 0x01, 0x05, 0x01, 0x01, 0x8f,
      0x4c, 0xaa, 0xdb, 0x00, 0x00, 0x00, 0x00, 0x49, 0x45, 0x4e, 0x44, 0xae, 0x42, 0x60, 0x82};
  auto a = decode_png(rgb);
  CHECK(a.channels == 3);
  CHECK(a.pixels == std::vector<std::uint8_t>{255, 0, 0, 0, 255, 0, 0, 0, 255, 10, 20, 30});
  auto b = decode_png(grey);
  CHECK(b.channels == 1);
  CHECK(b.pixels == std::vector<std::uint8_t>{0, 1, 255});
  auto truncated = rgb;
  truncated.resize(40);
  CHECK_THROWS_AS(decode_png(truncated), DataError);
}

TEST_CASE("dataset loading") {
  SUBCASE("empty directory warns and yields nothing") {
    auto root = fresh_dir("empty");
    fs::create_directories(root / "images");
    fs::create_directories(root / "masks");
    std::vector<std::string> warnings;
    auto d = load_dataset(root, [&](const std::string& w) { warnings.push_back(w); });
    CHECK(d.empty());
    CHECK(warnings.size() == 1);
  }
  SUBCASE("round trip through files, sorted by stem") {
    auto root = fresh_dir("roundtrip");
    auto samples = make_synthetic({3, 32, 4, false});
    std::reverse(samples.begin(), samples.end());
    write_dataset(root, samples);
    auto back = load_dataset(root);
    REQUIRE(back.size() == 3);
    CHECK(back[0].id < back[1].id);
    CHECK(back[1].id < back[2].id);
    for (const auto& s : back) {
      auto it = std::find_if(samples.begin(), samples.end(), [&](const Sample& x) { return x.id == s.id; });
      REQUIRE(it != samples.end());
      CHECK(s.mask == it->mask);
      // Files hold 8-bit values.
      for (std::size_t i = 0; i < s.image.size(); ++i) CHECK(std::abs(s.image[i] - it->image[i]) <= 0.5f / 255.0f + 1e-6f);
    }
  }
  SUBCASE("size mismatch names the stem") {
    auto root = fresh_dir("mismatch");
    auto samples = make_synthetic({1, 32, 4, false});
    write_dataset(root, samples);
    write_pnm(root / "masks" / (samples[0].id + ".pgm"), mask_to_raster(LabelMap(16, 32)));
    try {
      load_dataset(root);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find(samples[0].id) != std::string::npos);
    }
  }
  SUBCASE("unmatched stems are listed") {
    auto root = fresh_dir("unmatched");
    write_dataset(root, make_synthetic({2, 32, 4, false}));
    write_pnm(root / "images" / "orphan.pgm", mask_to_raster(LabelMap(32, 32)));
    try {
      load_dataset(root);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("orphan") != std::string::npos);
    }
  }
}

TEST_CASE("D4: group table, inverses, and action on a grid") {
  const auto all = D4::all();
  std::set<unsigned> codes;
  for (const auto& g : all) codes.insert(g.code());
  CHECK(codes.size() == 8);
  for (const auto& a : all) {
    CHECK(a * a.inverse() == D4(0));
    for (const auto& b : all) {
      // Composition must agree with the product of the signed matrices.
      const auto& ma = a.matrix();
      const auto& mb = b.matrix();
      const std::array<int, 4> prod{ma[0] * mb[0] + ma[1] * mb[2], ma[0] * mb[1] + ma[1] * mb[3],
                                    ma[2] * mb[0] + ma[3] * mb[2], ma[2] * mb[1] + ma[3] * mb[3]};
      CHECK((a * b).matrix() == prod);
    }
  }
  // Flips and transposes are involutions.
  for (unsigned c : {1u, 2u, 4u, 3u}) CHECK(D4(c) * D4(c) == D4(0));

  Tensor<float> marker({1, 2, 2}, {1, 2, 3, 4});
  std::set<std::vector<float>> images;
  for (const auto& g : all) images.insert(d4_apply(marker, g).storage());
  CHECK(images.size() == 8);

  Tensor<float> sym({1, 4, 4}, 0.25f);
  for (const auto& g : all) CHECK(d4_apply(sym, g) == sym);

  Gen gen(3);
  auto x = gen.tensor<float>({2, 3, 5});
  for (const auto& a : all) {
    auto ax = d4_apply(x, a);
    CHECK(ax.dim(1) == (a.transposes() ? 5 : 3));
    CHECK(d4_apply(ax, a.inverse()) == x);
    for (const auto& b : all) CHECK(d4_apply(d4_apply(x, b), a) == d4_apply(x, a * b));
  }
}

TEST_CASE("flip_expand_8x is a closed orbit") {
  Gen g(4);
  Sample s = random_sample(g, 6, 6);
  auto eight = flip_expand_8x(s);
  REQUIRE(eight.size() == 8);
  for (const auto& a : D4::all()) {
    // Applying any element to the orbit permutes it.
    std::set<std::vector<float>> orbit, moved;
    for (const auto& e : eight) {
      orbit.insert(e.image.storage());
      moved.insert(d4_apply(e.image, a).storage());
    }
    CHECK(orbit == moved);
  }
  CHECK(eight[0].id == "s_d40");
  CHECK(eight[5].mask == d4_apply(s.mask, D4(5)));
  CHECK(flip_expand_8x(random_sample(g, 4, 7))[0].mask.width == 7);
}

TEST_CASE("HSV conversion") {
  auto red = rgb_to_hsv(Tensor<float>({3, 1, 1}, {1, 0, 0}));
  CHECK(red.storage() == std::vector<float>{0, 1, 1});
  auto grey = rgb_to_hsv(Tensor<float>({3, 1, 1}, {0.4f, 0.4f, 0.4f}));
  CHECK(grey[1] == 0.0f);
  CHECK(grey[2] == 0.4f);
  Gen g(5);
  auto x = g.tensor<float>({3, 16, 16}, 0.0, 1.0);
  auto back = hsv_to_rgb(rgb_to_hsv(x));
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(back[i] - x[i]) <= 1e-5f);
}

TEST_CASE("augmentation") {
  Gen g(6);
  Sample s = random_sample(g, 64, 64);
  SUBCASE("zero-width ranges are the identity") {
    AugmentConfig none{{1.0, 1.0}, 0.0, 0.0, 0.0, 0.0};
    Rng rng(1);
    auto out = random_augment(s, none, rng);
    CHECK(out.mask == s.mask);
    for (std::size_t i = 0; i < s.image.size(); ++i) CHECK(std::abs(out.image[i] - s.image[i]) <= 1e-6f);
  }
  SUBCASE("same seed, same output") {
    Rng a(9), b(9);
    auto x = random_augment(s, AugmentConfig{}, a), y = random_augment(s, AugmentConfig{}, b);
    CHECK(x.image == y.image);
    CHECK(x.mask == y.mask);
  }
  SUBCASE("draws respect the configured ranges") {
    Rng rng(2);
    for (int i = 0; i < 200; ++i) {
      auto d = draw_augment(AugmentConfig{}, 64, 64, rng);
      CHECK(d.scale >= 0.9);
      CHECK(d.scale <= 1.1);
      CHECK(std::abs(d.hue) <= 0.02);
      CHECK(std::labs(d.shift_rows) <= 6);
    }
  }
  SUBCASE("shift moves content and exposes ignore") {
    auto out = shift_sample(s, 2, -3);
    CHECK(out.mask.at(5, 5) == s.mask.at(3, 8));
    CHECK(out.image[(1 * 64 + 5) * 64 + 5] == s.image[(1 * 64 + 3) * 64 + 8]);
    CHECK(out.mask.at(0, 10) == kIgnoreLabel);
    CHECK(out.mask.at(10, 63) == kIgnoreLabel);
    CHECK(out.image[10 * 64 + 63] == 0.0f);
  }
}

TEST_CASE("scale 1.10 equals a 110x110 resample centre-cropped to 100x100") {
  Gen g(7);
  Sample s = random_sample(g, 100, 100);
  auto out = scale_sample(s, 1.10);
  REQUIRE(out.image.shape() == Shape{3, 100, 100});
  double worst = 0.0;
  for (std::size_t ch = 0; ch < 3; ++ch)
    for (std::size_t r = 0; r < 100; ++r)
      for (std::size_t c = 0; c < 100; ++c)
        worst = std::max(worst, std::abs(double(out.image[(ch * 100 + r) * 100 + c]) -
                                         bilinear_at(s.image, ch, 110, 110, r + 5, c + 5)));
  CHECK(worst <= 1e-5);
  for (std::size_t r = 0; r < 100; ++r)
    for (std::size_t c = 0; c < 100; ++c) {
      const std::size_t sr = std::size_t((double(r + 5) + 0.5) * 100.0 / 110.0);
      const std::size_t sc = std::size_t((double(c + 5) + 0.5) * 100.0 / 110.0);
      CHECK(out.mask.at(r, c) == s.mask.at(sr, sc));
    }
  auto small = scale_sample(s, 0.9);
  CHECK(small.mask.at(0, 0) == kIgnoreLabel);
  CHECK(small.mask.at(99, 99) == kIgnoreLabel);
}

TEST_CASE("padding and cropping helpers") {
  Gen g(8);
  Sample s = random_sample(g, 40, 70);
  auto p = pad_to_32(s);
  CHECK(p.image.shape() == Shape{3, 64, 96});
  CHECK(p.mask.at(39, 69) == s.mask.at(39, 69));
  CHECK(p.mask.at(40, 0) == kIgnoreLabel);
  CHECK(p.image[50 * 96 + 80] == 0.0f);
  CHECK(crop_tensor(pad_to_32(s.image), 40, 70) == s.image);
  CHECK(pad_to_square(s).mask.height == 70);
}

TEST_CASE("brightest point and crop") {
  Tensor<float> img({3, 100, 120});
  for (std::size_t ch = 0; ch < 3; ++ch)
    for (std::size_t r = 40; r < 51; ++r)
      for (std::size_t c = 60; c < 71; ++c) img[(ch * 100 + r) * 120 + c] = 1.0f;
  auto at = brightest_point(img, 11);
  CHECK(at == std::array<std::size_t, 2>{45, 65});
  Sample s{"x", img, LabelMap(100, 120)};
  auto crop = crop_around(s, 45, 65, 20);
  CHECK(crop.image.shape() == Shape{3, 20, 20});
  CHECK(crop.image[10 * 20 + 10] == 1.0f);
  auto edge = crop_around(s, 0, 0, 30);
  CHECK(edge.image.shape() == Shape{3, 30, 30});
}

TEST_CASE("synthetic data is seeded and binary") {
  auto a = make_synthetic({4, 64, 3, false}), b = make_synthetic({4, 64, 3, false});
  auto c = make_synthetic({4, 64, 4, false});
  REQUIRE(a.size() == 4);
  CHECK(a[0].id == "disc_0000");
  CHECK(a[2].image == b[2].image);
  CHECK(a[2].mask == b[2].mask);
  CHECK_FALSE(a[2].mask == c[2].mask);
  for (const auto& s : a) {
    std::size_t fg = 0;
    for (auto v : s.mask.labels) {
      CHECK(v <= 1);
      fg += v;
    }
    CHECK(fg > 0);
    CHECK(fg < s.mask.size());
  }
  auto m = make_synthetic({2, 64, 3, true});
  CHECK(m[0].id == "multi_0000");
}
