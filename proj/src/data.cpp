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


#include "cenet/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numbers>

#include "cenet/nn.hpp"
#include "cenet/serialize.hpp"

#ifdef CENET_HAVE_PNG
#include <png.h>
#endif

namespace cenet {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// NetPBM

namespace {

class PnmCursor {
 public:
  PnmCursor(const std::vector<std::uint8_t>& b, const std::string& src) : bytes_(b), source_(src) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError(source_ + ": " + what + " at byte offset " + std::to_string(pos_));
  }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = char(bytes_[pos_]);
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::size_t number(const char* field) {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) fail(std::string("expected ") + field);
    std::size_t v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + std::size_t(bytes_[pos_] - '0');
      if (v > (1u << 24)) fail(std::string(field) + " too large");
      ++pos_;
    }
    return v;
  }

  std::size_t pos_ = 0;
  const std::vector<std::uint8_t>& bytes_;
  const std::string& source_;
};

}  // namespace

Raster decode_pnm(const std::vector<std::uint8_t>& bytes, const std::string& source) {
  PnmCursor cur(bytes, source);
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    cur.fail("not a binary PGM/PPM (expected magic P5 or P6)");
  }
  Raster r;
  r.channels = bytes[1] == '6' ? 3 : 1;
  cur.pos_ = 2;
  r.width = cur.number("width");
  r.height = cur.number("height");
  const std::size_t maxval = cur.number("maxval");
  if (r.width == 0 || r.height == 0) cur.fail("zero image dimension");
  if (maxval != 255) cur.fail("unsupported maxval " + std::to_string(maxval) + " (only 255)");
  if (cur.pos_ >= bytes.size() || !std::isspace(bytes[cur.pos_])) cur.fail("expected whitespace after maxval");
  ++cur.pos_;
  const std::size_t need = r.width * r.height * r.channels;
  if (bytes.size() - cur.pos_ < need) {
    cur.fail("truncated pixel data (need " + std::to_string(need) + " bytes, have " +
             std::to_string(bytes.size() - cur.pos_) + ")");
  }
  r.pixels.assign(bytes.begin() + std::ptrdiff_t(cur.pos_), bytes.begin() + std::ptrdiff_t(cur.pos_ + need));
  return r;
}

std::vector<std::uint8_t> encode_pnm(const Raster& r) {
  if (r.channels != 1 && r.channels != 3) throw ContractError("PNM output needs 1 or 3 channels");
  const std::string header = std::string(r.channels == 3 ? "P6" : "P5") + "\n" + std::to_string(r.width) + " " +
                             std::to_string(r.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), r.pixels.begin(), r.pixels.end());
  return out;
}

#ifdef CENET_HAVE_PNG
bool png_supported() { return true; }

Raster decode_png(const std::vector<std::uint8_t>& bytes, const std::string& source) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw DataError(source + ": PNG header: " + img.message);
  }
  Raster r;
  const bool color = img.format & PNG_FORMAT_FLAG_COLOR;
  img.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  r.width = img.width;
  r.height = img.height;
  r.channels = color ? 3 : 1;
  r.pixels.resize(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, r.pixels.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw DataError(source + ": PNG data: " + msg);
  }
  return r;
}
#else
bool png_supported() { return false; }

Raster decode_png(const std::vector<std::uint8_t>&, const std::string& source) {
  throw DataError(source + ": PNG support was not compiled in; convert to PGM/PPM");
}
#endif

Raster read_raster(const fs::path& path) {
  const std::string raw = read_file_bytes(path);
  const std::vector<std::uint8_t> bytes(raw.begin(), raw.end());
  static constexpr std::uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::equal(kPngSig, kPngSig + 8, bytes.begin())) return decode_png(bytes, path.string());
  return decode_pnm(bytes, path.string());
}

void write_pnm(const fs::path& path, const Raster& raster) {
  const std::vector<std::uint8_t> bytes = encode_pnm(raster);
  write_file_bytes(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

Tensor<float> raster_to_image(const Raster& r) {
  const std::size_t hw = r.width * r.height;
  Tensor<float> img({3, r.height, r.width});
  for (std::size_t c = 0; c < 3; ++c) {
    const std::size_t src = r.channels == 3 ? c : 0;
    for (std::size_t i = 0; i < hw; ++i) img[c * hw + i] = float(r.pixels[i * r.channels + src]) / 255.0f;
  }
  return img;
}

Raster image_to_raster(const Tensor<float>& image) {
  if (image.rank() != 3 || (image.dim(0) != 3 && image.dim(0) != 1)) {
    throw DimensionError("image raster needs [3,H,W] or [1,H,W], got " + shape_str(image.shape()));
  }
  Raster r{image.dim(2), image.dim(1), image.dim(0), {}};
  const std::size_t hw = r.width * r.height;
  r.pixels.resize(hw * r.channels);
  for (std::size_t c = 0; c < r.channels; ++c) {
    for (std::size_t i = 0; i < hw; ++i) {
      const float v = std::clamp(image[c * hw + i], 0.0f, 1.0f);
      r.pixels[i * r.channels + c] = std::uint8_t(std::lround(v * 255.0f));
    }
  }
  return r;
}

LabelMap raster_to_mask(const Raster& r, const std::string& source) {
  if (r.channels != 1) throw DataError(source + ": masks must be single-channel class indices");
  LabelMap m(r.height, r.width);
  m.labels = r.pixels;
  return m;
}

Raster mask_to_raster(const LabelMap& m) { return Raster{m.width, m.height, 1, m.labels}; }

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return char(std::tolower(c)); });
  return s;
}

/// stem -> path for files with one of the extensions, sorted by stem.
std::map<std::string, fs::path> list_by_stem(const fs::path& dir, std::initializer_list<const char*> exts) {
  if (!fs::is_directory(dir)) throw DataError("missing directory " + dir.string());
  std::map<std::string, fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = lower(entry.path().extension().string());
    if (std::none_of(exts.begin(), exts.end(), [&](const char* e) { return ext == e; })) continue;
    const std::string stem = entry.path().stem().string();
    if (!out.emplace(stem, entry.path()).second) {
      throw DataError("ambiguous stem '" + stem + "' in " + dir.string() + " (several files share it)");
    }
  }
  return out;
}

std::string join_some(const std::vector<std::string>& items) {
  std::string s;
  for (std::size_t i = 0; i < items.size() && i < 10; ++i) s += (i ? ", " : "") + items[i];
  if (items.size() > 10) s += ", ... (" + std::to_string(items.size()) + " total)";
  return s;
}

}  // namespace

std::vector<Sample> load_dataset(const fs::path& root, const std::function<void(const std::string&)>& warn) {
  const auto images = list_by_stem(root / "images", {".ppm", ".pgm", ".png"});
  const auto masks = list_by_stem(root / "masks", {".pgm", ".png"});
  std::vector<std::string> no_mask, no_image;
  for (const auto& [stem, _] : images) {
    if (!masks.count(stem)) no_mask.push_back(stem);
  }
  for (const auto& [stem, _] : masks) {
    if (!images.count(stem)) no_image.push_back(stem);
  }
  if (!no_mask.empty() || !no_image.empty()) {
    std::string msg = "unmatched stems in " + root.string() + ":";
    if (!no_mask.empty()) msg += " images without masks [" + join_some(no_mask) + "]";
    if (!no_image.empty()) msg += " masks without images [" + join_some(no_image) + "]";
    throw DataError(msg);
  }
  if (images.empty() && warn) warn("dataset " + root.string() + " contains no images");
  std::vector<Sample> out;
  for (const auto& [stem, path] : images) {
    Sample s;
    s.id = stem;
    const Raster ir = read_raster(path);
    s.image = raster_to_image(ir);
    const fs::path mp = masks.at(stem);
    s.mask = raster_to_mask(read_raster(mp), mp.string());
    if (s.mask.height != ir.height || s.mask.width != ir.width) {
      throw DataError("sample '" + stem + "': image is " + std::to_string(ir.width) + "x" +
                      std::to_string(ir.height) + " but mask is " + std::to_string(s.mask.width) + "x" +
                      std::to_string(s.mask.height));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::pair<std::string, Tensor<float>>> load_images(const fs::path& dir) {
  std::vector<std::pair<std::string, Tensor<float>>> out;
  for (const auto& [stem, path] : list_by_stem(dir, {".ppm", ".pgm", ".png"})) {
    out.emplace_back(stem, raster_to_image(read_raster(path)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// D4

namespace {

using Mat = std::array<int, 4>;

Mat mat_mul(const Mat& a, const Mat& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
          a[2] * b[1] + a[3] * b[3]};
}

Mat mat_of(unsigned code) {
  Mat m{1, 0, 0, 1};
  if (code & 4) m = mat_mul({0, 1, 1, 0}, m);
  if (code & 2) m = mat_mul({-1, 0, 0, 1}, m);
  if (code & 1) m = mat_mul({1, 0, 0, -1}, m);
  return m;
}

}  // namespace

D4::D4(unsigned code) : code_(code), m_(mat_of(code)) {
  if (code >= kOrder) throw ContractError("D4 code must be < 8, got " + std::to_string(code));
}

std::array<D4, D4::kOrder> D4::all() {
  return {D4(0), D4(1), D4(2), D4(3), D4(4), D4(5), D4(6), D4(7)};
}

unsigned D4::code_of(const Mat& m) {
  for (unsigned c = 0; c < kOrder; ++c) {
    if (mat_of(c) == m) return c;
  }
  throw LifecycleError("matrix outside D4");
}

D4 D4::operator*(const D4& b) const { return D4(code_of(mat_mul(m_, b.m_))); }

D4 D4::inverse() const { return D4(code_of({m_[0], m_[2], m_[1], m_[3]})); }

std::array<std::size_t, 2> D4::map(std::size_t r, std::size_t c, std::size_t h, std::size_t w) const {
  // Doubled centred coordinates keep everything integral.
  const long y = 2 * long(r) - long(h - 1), x = 2 * long(c) - long(w - 1);
  const long y2 = m_[0] * y + m_[1] * x, x2 = m_[2] * y + m_[3] * x;
  const std::size_t oh = transposes() ? w : h, ow = transposes() ? h : w;
  return {std::size_t((y2 + long(oh - 1)) / 2), std::size_t((x2 + long(ow - 1)) / 2)};
}

template <typename T>
Tensor<T> d4_apply(const Tensor<T>& x, const D4& g) {
  if (x.rank() < 2) throw DimensionError("d4_apply needs rank >= 2, got " + shape_str(x.shape()));
  Shape os = x.shape();
  const std::size_t h = os[os.size() - 2], w = os[os.size() - 1];
  if (g.transposes()) std::swap(os[os.size() - 2], os[os.size() - 1]);
  const std::size_t ow = os.back();
  Tensor<T> out(os);
  const std::size_t planes = x.size() / (h * w);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const auto [r2, c2] = g.map(r, c, h, w);
      for (std::size_t p = 0; p < planes; ++p) out[p * h * w + r2 * ow + c2] = x[p * h * w + r * w + c];
    }
  }
  return out;
}

LabelMap d4_apply(const LabelMap& m, const D4& g) {
  LabelMap out = g.transposes() ? LabelMap(m.width, m.height) : LabelMap(m.height, m.width);
  for (std::size_t r = 0; r < m.height; ++r) {
    for (std::size_t c = 0; c < m.width; ++c) {
      const auto [r2, c2] = g.map(r, c, m.height, m.width);
      out.at(r2, c2) = m.at(r, c);
    }
  }
  return out;
}

Sample pad_sample(const Sample& s, std::size_t height, std::size_t width) {
  const std::size_t h = s.mask.height, w = s.mask.width;
  if (height < h || width < w) throw ContractError("pad_sample target smaller than the sample");
  if (height == h && width == w) return s;
  Sample out{s.id, Tensor<float>({s.image.dim(0), height, width}), LabelMap(height, width, kIgnoreLabel)};
  for (std::size_t c = 0; c < s.image.dim(0); ++c) {
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t x = 0; x < w; ++x) out.image[(c * height + r) * width + x] = s.image[(c * h + r) * w + x];
    }
  }
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t x = 0; x < w; ++x) out.mask.at(r, x) = s.mask.at(r, x);
  }
  return out;
}

Sample pad_to_square(const Sample& s) {
  const std::size_t n = std::max(s.mask.height, s.mask.width);
  return pad_sample(s, n, n);
}

std::vector<Sample> flip_expand_8x(const Sample& s) {
  const Sample sq = pad_to_square(s);
  std::vector<Sample> out;
  for (const D4& g : D4::all()) {
    out.push_back(Sample{s.id + "_d4" + std::to_string(g.code()), d4_apply(sq.image, g), d4_apply(sq.mask, g)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Colour

Tensor<float> rgb_to_hsv(const Tensor<float>& rgb) {
  if (rgb.rank() != 3 || rgb.dim(0) != 3) throw DimensionError("rgb_to_hsv needs [3,H,W], got " + shape_str(rgb.shape()));
  const std::size_t hw = rgb.dim(1) * rgb.dim(2);
  Tensor<float> out(rgb.shape());
  for (std::size_t i = 0; i < hw; ++i) {
    const double r = rgb[i], g = rgb[hw + i], b = rgb[2 * hw + i];
    const double mx = std::max({r, g, b}), mn = std::min({r, g, b}), d = mx - mn;
    double h = 0.0;
    if (d > 0.0) {
      if (mx == r) h = std::fmod((g - b) / d + 6.0, 6.0);
      else if (mx == g) h = (b - r) / d + 2.0;
      else h = (r - g) / d + 4.0;
      h /= 6.0;
      if (h >= 1.0) h -= 1.0;
    }
    out[i] = float(h);
    out[hw + i] = float(mx > 0.0 ? d / mx : 0.0);
    out[2 * hw + i] = float(mx);
  }
  return out;
}

Tensor<float> hsv_to_rgb(const Tensor<float>& hsv) {
  if (hsv.rank() != 3 || hsv.dim(0) != 3) throw DimensionError("hsv_to_rgb needs [3,H,W], got " + shape_str(hsv.shape()));
  const std::size_t hw = hsv.dim(1) * hsv.dim(2);
  Tensor<float> out(hsv.shape());
  for (std::size_t i = 0; i < hw; ++i) {
    const double h6 = double(hsv[i]) * 6.0, s = hsv[hw + i], v = hsv[2 * hw + i];
    const double fl = std::floor(h6), f = h6 - fl;
    const int sector = int(((long(fl) % 6) + 6) % 6);
    const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
    double r, g, b;
    switch (sector) {
      case 0: r = v, g = t, b = p; break;
      case 1: r = q, g = v, b = p; break;
      case 2: r = p, g = v, b = t; break;
      case 3: r = p, g = q, b = v; break;
      case 4: r = t, g = p, b = v; break;
      default: r = v, g = p, b = q; break;
    }
    out[i] = float(r);
    out[hw + i] = float(g);
    out[2 * hw + i] = float(b);
  }
  return out;
}

Tensor<float> jitter_hsv(const Tensor<float>& rgb, double dh, double ds, double dv) {
  if (dh == 0.0 && ds == 0.0 && dv == 0.0) return rgb;
  Tensor<float> hsv = rgb_to_hsv(rgb);
  const std::size_t hw = rgb.dim(1) * rgb.dim(2);
  for (std::size_t i = 0; i < hw; ++i) {
    double h = hsv[i] + dh;
    h -= std::floor(h);
    hsv[i] = float(h);
    hsv[hw + i] = float(std::clamp(hsv[hw + i] + ds, 0.0, 1.0));
    hsv[2 * hw + i] = float(std::clamp(hsv[2 * hw + i] + dv, 0.0, 1.0));
  }
  return hsv_to_rgb(hsv);
}

// ---------------------------------------------------------------------------
// Geometry

AugmentDraw draw_augment(const AugmentConfig& cfg, std::size_t height, std::size_t width, Rng& rng) {
  AugmentDraw d;
  d.scale = rng.uniform(cfg.scale_range[0], cfg.scale_range[1]);
  d.hue = rng.uniform(-cfg.hue_jitter, cfg.hue_jitter);
  d.saturation = rng.uniform(-cfg.saturation_jitter, cfg.saturation_jitter);
  d.value = rng.uniform(-cfg.value_jitter, cfg.value_jitter);
  d.shift_rows = std::lround(rng.uniform(-cfg.shift_fraction, cfg.shift_fraction) * double(height));
  d.shift_cols = std::lround(rng.uniform(-cfg.shift_fraction, cfg.shift_fraction) * double(width));
  return d;
}

namespace {

/// Copies the window of `src` starting at (r0, c0) (may be negative or run
/// past the edge) into an h x w result filled elsewhere.
Sample window(const Sample& s, long r0, long c0, std::size_t h, std::size_t w) {
  const std::size_t sh = s.mask.height, sw = s.mask.width, ch = s.image.dim(0);
  Sample out{s.id, Tensor<float>({ch, h, w}), LabelMap(h, w, kIgnoreLabel)};
  for (std::size_t r = 0; r < h; ++r) {
    const long sr = long(r) + r0;
    if (sr < 0 || sr >= long(sh)) continue;
    for (std::size_t c = 0; c < w; ++c) {
      const long sc = long(c) + c0;
      if (sc < 0 || sc >= long(sw)) continue;
      for (std::size_t k = 0; k < ch; ++k) out.image[(k * h + r) * w + c] = s.image[(k * sh + sr) * sw + sc];
      out.mask.at(r, c) = s.mask.at(std::size_t(sr), std::size_t(sc));
    }
  }
  return out;
}

std::size_t nearest_src(std::size_t i, std::size_t in, std::size_t out) {
  return std::min(in - 1, std::size_t(std::floor((double(i) + 0.5) * double(in) / double(out))));
}

}  // namespace

Sample scale_sample(const Sample& s, double scale) {
  const std::size_t h = s.mask.height, w = s.mask.width;
  const std::size_t nh = std::max<std::size_t>(1, std::size_t(std::lround(double(h) * scale)));
  const std::size_t nw = std::max<std::size_t>(1, std::size_t(std::lround(double(w) * scale)));
  if (nh == h && nw == w) return s;
  Sample big{s.id, resize_bilinear(s.image, nh, nw), LabelMap(nh, nw)};
  for (std::size_t r = 0; r < nh; ++r) {
    const std::size_t sr = nearest_src(r, h, nh);
    for (std::size_t c = 0; c < nw; ++c) big.mask.at(r, c) = s.mask.at(sr, nearest_src(c, w, nw));
  }
  // Centre crop (grown) or centre pad (shrunk) back to h x w.
  const long r0 = (long(nh) - long(h)) / 2, c0 = (long(nw) - long(w)) / 2;
  return window(big, r0, c0, h, w);
}

Sample shift_sample(const Sample& s, long rows, long cols) {
  if (rows == 0 && cols == 0) return s;
  return window(s, -rows, -cols, s.mask.height, s.mask.width);
}

Sample apply_augment(const Sample& s, const AugmentDraw& d) {
  Sample out = scale_sample(s, d.scale);
  out.image = jitter_hsv(out.image, d.hue, d.saturation, d.value);
  out = shift_sample(out, d.shift_rows, d.shift_cols);
  return pad_to_32(out);
}

Sample random_augment(const Sample& s, const AugmentConfig& cfg, Rng& rng) {
  return apply_augment(s, draw_augment(cfg, s.mask.height, s.mask.width, rng));
}

Sample pad_to_32(const Sample& s) {
  return pad_sample(s, round_up(s.mask.height, kSpatialMultiple), round_up(s.mask.width, kSpatialMultiple));
}

Tensor<float> pad_to_32(const Tensor<float>& image) {
  if (image.rank() < 2) throw DimensionError("pad_to_32 needs rank >= 2");
  Shape os = image.shape();
  const std::size_t h = os[os.size() - 2], w = os[os.size() - 1];
  const std::size_t ph = round_up(h, kSpatialMultiple), pw = round_up(w, kSpatialMultiple);
  if (ph == h && pw == w) return image;
  os[os.size() - 2] = ph;
  os[os.size() - 1] = pw;
  Tensor<float> out(os);
  const std::size_t planes = image.size() / (h * w);
  for (std::size_t p = 0; p < planes; ++p) {
    for (std::size_t r = 0; r < h; ++r) {
      std::copy_n(image.raw() + (p * h + r) * w, w, out.raw() + (p * ph + r) * pw);
    }
  }
  return out;
}

Tensor<float> crop_tensor(const Tensor<float>& x, std::size_t height, std::size_t width) {
  if (x.rank() < 2) throw DimensionError("crop_tensor needs rank >= 2");
  Shape os = x.shape();
  const std::size_t h = os[os.size() - 2], w = os[os.size() - 1];
  if (height > h || width > w) throw BoundsError("crop larger than tensor " + shape_str(x.shape()));
  if (height == h && width == w) return x;
  os[os.size() - 2] = height;
  os[os.size() - 1] = width;
  Tensor<float> out(os);
  const std::size_t planes = x.size() / (h * w);
  for (std::size_t p = 0; p < planes; ++p) {
    for (std::size_t r = 0; r < height; ++r) {
      std::copy_n(x.raw() + (p * h + r) * w, width, out.raw() + (p * height + r) * width);
    }
  }
  return out;
}

std::array<std::size_t, 2> brightest_point(const Tensor<float>& image, std::size_t window_size) {
  if (image.rank() != 3) throw DimensionError("brightest_point needs [C,H,W]");
  const std::size_t ch = image.dim(0), h = image.dim(1), w = image.dim(2);
  // Summed-area table of channel-mean intensity.
  std::vector<double> sat((h + 1) * (w + 1), 0.0);
  for (std::size_t r = 0; r < h; ++r) {
    double row = 0.0;
    for (std::size_t c = 0; c < w; ++c) {
      double v = 0.0;
      for (std::size_t k = 0; k < ch; ++k) v += image[(k * h + r) * w + c];
      row += v / double(ch);
      sat[(r + 1) * (w + 1) + c + 1] = sat[r * (w + 1) + c + 1] + row;
    }
  }
  const long half = long(window_size / 2);
  double best = -1.0;
  std::array<std::size_t, 2> at{0, 0};
  for (std::size_t r = 0; r < h; ++r) {
    const std::size_t r0 = std::size_t(std::max(0L, long(r) - half)), r1 = std::min(h, r + std::size_t(half) + 1);
    for (std::size_t c = 0; c < w; ++c) {
      const std::size_t c0 = std::size_t(std::max(0L, long(c) - half)), c1 = std::min(w, c + std::size_t(half) + 1);
      const double sum = sat[r1 * (w + 1) + c1] - sat[r0 * (w + 1) + c1] - sat[r1 * (w + 1) + c0] +
                         sat[r0 * (w + 1) + c0];
      const double mean = sum / double((r1 - r0) * (c1 - c0));
      if (mean > best) {
        best = mean;
        at = {r, c};
      }
    }
  }
  return at;
}

Sample crop_around(const Sample& s, std::size_t row, std::size_t col, std::size_t size) {
  auto origin = [&](std::size_t centre, std::size_t extent) {
    if (size >= extent) return -long(size - extent) / 2;
    return std::clamp(long(centre) - long(size / 2), 0L, long(extent - size));
  };
  return window(s, origin(row, s.mask.height), origin(col, s.mask.width), size, size);
}

// ---------------------------------------------------------------------------
// Synthetic discs

std::vector<Sample> make_synthetic(const SyntheticConfig& cfg) {
  if (cfg.count == 0 || cfg.size < 8) throw ConfigError("synthetic dataset needs count >= 1 and size >= 8");
  std::vector<Sample> out;
  const std::size_t n = cfg.size;
  const double sz = double(n);
  for (std::size_t i = 0; i < cfg.count; ++i) {
    Rng rng(derive_seed(cfg.seed, {i}));
    Sample s;
    char id[32];
    std::snprintf(id, sizeof id, "%s_%04zu", cfg.multiscale ? "multi" : "disc", i);
    s.id = id;
    s.image = Tensor<float>({3, n, n});
    s.mask = LabelMap(n, n);
    std::array<double, 3> bg, fg;
    for (auto& v : bg) v = rng.uniform(0.05, 0.45);
    for (auto& v : fg) v = rng.uniform(0.55, 0.95);

    struct Ellipse {
      double cy, cx, ry, rx, angle;
    };
    std::vector<Ellipse> shapes;
    if (cfg.multiscale) {
      const std::size_t k = 3 + std::size_t(rng.below(4));
      for (std::size_t j = 0; j < k; ++j) {
        const double rad = rng.uniform(2.0, 20.0);
        shapes.push_back({rng.uniform(0, sz), rng.uniform(0, sz), rad, rad, 0.0});
      }
    } else {
      shapes.push_back({rng.uniform(0.35, 0.65) * sz, rng.uniform(0.35, 0.65) * sz, rng.uniform(0.15, 0.3) * sz,
                        rng.uniform(0.15, 0.3) * sz, rng.uniform(0.0, std::numbers::pi)});
    }
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        bool inside = false;
        for (const auto& e : shapes) {
          const double dy = double(r) + 0.5 - e.cy, dx = double(c) + 0.5 - e.cx;
          const double u = dy * std::cos(e.angle) + dx * std::sin(e.angle);
          const double v = -dy * std::sin(e.angle) + dx * std::cos(e.angle);
          if ((u * u) / (e.ry * e.ry) + (v * v) / (e.rx * e.rx) <= 1.0) inside = true;
        }
        s.mask.at(r, c) = inside ? 1 : 0;
        for (std::size_t k = 0; k < 3; ++k) {
          const double base = inside ? fg[k] : bg[k];
          s.image[(k * n + r) * n + c] = float(std::clamp(base + 0.06 * rng.normal(), 0.0, 1.0));
        }
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_dataset(const fs::path& root, const std::vector<Sample>& samples) {
  std::error_code ec;
  fs::create_directories(root / "images", ec);
  fs::create_directories(root / "masks", ec);
  if (ec) throw IoError("cannot create dataset directories under " + root.string() + ": " + ec.message());
  for (const auto& s : samples) {
    write_pnm(root / "images" / (s.id + ".ppm"), image_to_raster(s.image));
    write_pnm(root / "masks" / (s.id + ".pgm"), mask_to_raster(s.mask));
  }
}

template Tensor<float> d4_apply<float>(const Tensor<float>&, const D4&);
template Tensor<double> d4_apply<double>(const Tensor<double>&, const D4&);

}  // namespace cenet
