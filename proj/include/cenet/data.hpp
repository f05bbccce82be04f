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


#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "cenet/labels.hpp"
#include "cenet/rng.hpp"
#include "cenet/tensor.hpp"

namespace cenet {

/// One training or evaluation example. `image` is [3,H,W] in [0,1].
struct Sample {
  std::string id;
  Tensor<float> image;
  LabelMap mask;
};

// ---------------------------------------------------------------------------
// Image files

/// Decoded 8-bit raster, interleaved channels.
struct Raster {
  std::size_t width = 0, height = 0, channels = 0;
  std::vector<std::uint8_t> pixels;
};

/// Binary NetPBM (P5 grey, P6 RGB), maxval 255. Malformed input raises
/// DataError naming the byte offset.
Raster decode_pnm(const std::vector<std::uint8_t>& bytes, const std::string& source = "<memory>");
std::vector<std::uint8_t> encode_pnm(const Raster& raster);

bool png_supported();
/// 8-bit grey, grey+alpha, RGB, or RGBA PNG; alpha is dropped.
Raster decode_png(const std::vector<std::uint8_t>& bytes, const std::string& source = "<memory>");

/// Dispatches on the file signature.
Raster read_raster(const std::filesystem::path& path);
void write_pnm(const std::filesystem::path& path, const Raster& raster);

/// Grey rasters are replicated to three channels.
Tensor<float> raster_to_image(const Raster& raster);
Raster image_to_raster(const Tensor<float>& image);
LabelMap raster_to_mask(const Raster& raster, const std::string& source);
Raster mask_to_raster(const LabelMap& mask);

/// Pairs <root>/images/<stem>.{ppm,pgm,png} with <root>/masks/<stem>.{pgm,png},
/// sorted by stem. An empty image directory yields no samples and a warning.
std::vector<Sample> load_dataset(const std::filesystem::path& root,
                                 const std::function<void(const std::string&)>& warn = {});

/// Images only, for prediction.
std::vector<std::pair<std::string, Tensor<float>>> load_images(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Dihedral symmetries of the square

/// Element of D4 as a signed permutation matrix acting on centred (row, col)
/// coordinates. Code bits: 4 = transpose, 2 = vertical flip, 1 = horizontal
/// flip, applied in that order.
class D4 {
 public:
  static constexpr std::size_t kOrder = 8;

  explicit D4(unsigned code = 0);
  static std::array<D4, kOrder> all();

  unsigned code() const noexcept { return code_; }
  const std::array<int, 4>& matrix() const noexcept { return m_; }
  bool transposes() const noexcept { return m_[0] == 0; }

  /// (a * b) applies b first.
  D4 operator*(const D4& b) const;
  D4 inverse() const;
  bool operator==(const D4& o) const noexcept { return code_ == o.code_; }

  /// Destination of pixel (r, c) in an h x w grid.
  std::array<std::size_t, 2> map(std::size_t r, std::size_t c, std::size_t h, std::size_t w) const;

 private:
  static unsigned code_of(const std::array<int, 4>& m);
  unsigned code_;
  std::array<int, 4> m_;
};

/// Acts on the trailing two axes; transposing elements swap H and W.
template <typename T>
Tensor<T> d4_apply(const Tensor<T>& x, const D4& g);
LabelMap d4_apply(const LabelMap& m, const D4& g);

/// Pads image (zeros) and mask (ignore label) at the bottom/right.
Sample pad_sample(const Sample& s, std::size_t height, std::size_t width);
Sample pad_to_square(const Sample& s);

/// The eight D4 images of a sample, code order. Non-square samples are padded
/// to a square first.
std::vector<Sample> flip_expand_8x(const Sample& s);

// ---------------------------------------------------------------------------
// Colour, geometry, augmentation

/// Hexagonal HSV, all channels in [0,1]; hue is a fraction of the circle.
Tensor<float> rgb_to_hsv(const Tensor<float>& rgb);
Tensor<float> hsv_to_rgb(const Tensor<float>& hsv);

struct AugmentConfig {
  std::array<double, 2> scale_range{0.90, 1.10};
  double hue_jitter = 0.02;
  double saturation_jitter = 0.10;
  double value_jitter = 0.10;
  double shift_fraction = 0.10;
};

/// Parameters of one draw, in draw order.
struct AugmentDraw {
  double scale = 1.0;
  double hue = 0.0, saturation = 0.0, value = 0.0;
  long shift_rows = 0, shift_cols = 0;
};

AugmentDraw draw_augment(const AugmentConfig& cfg, std::size_t height, std::size_t width, Rng& rng);

/// Resizes by `scale` (bilinear image, nearest mask) and centre-crops or
/// centre-pads back to the original size.
Sample scale_sample(const Sample& s, double scale);
/// out[r][c] = in[r - dr][c - dc]; exposed image is zero, exposed mask ignored.
Sample shift_sample(const Sample& s, long rows, long cols);
Tensor<float> jitter_hsv(const Tensor<float>& rgb, double dh, double ds, double dv);

/// Scale, colour jitter, and shift, then padding to a multiple of 32.
Sample apply_augment(const Sample& s, const AugmentDraw& d);
Sample random_augment(const Sample& s, const AugmentConfig& cfg, Rng& rng);

inline constexpr std::size_t kSpatialMultiple = 32;
inline std::size_t round_up(std::size_t v, std::size_t m) { return (v + m - 1) / m * m; }

Sample pad_to_32(const Sample& s);
/// Zero-pads the trailing two axes at the bottom/right.
Tensor<float> pad_to_32(const Tensor<float>& image);
/// Top-left crop of the trailing two axes.
Tensor<float> crop_tensor(const Tensor<float>& x, std::size_t height, std::size_t width);

/// Centre of the brightest `window` x `window` box-filtered region.
std::array<std::size_t, 2> brightest_point(const Tensor<float>& image, std::size_t window = 51);
/// size x size window centred on (row, col), clamped inside the image.
Sample crop_around(const Sample& s, std::size_t row, std::size_t col, std::size_t size);

// ---------------------------------------------------------------------------
// Synthetic data

struct SyntheticConfig {
  std::size_t count = 8;
  std::size_t size = 64;
  std::uint64_t seed = 0;
  /// Several discs per image with radii drawn from [2, 20] instead of one
  /// large ellipse.
  bool multiscale = false;
};

std::vector<Sample> make_synthetic(const SyntheticConfig& cfg);
/// Writes images/<id>.ppm and masks/<id>.pgm under root.
void write_dataset(const std::filesystem::path& root, const std::vector<Sample>& samples);

}  // namespace cenet
