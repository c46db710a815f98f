#pragma once

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "jpegcs/errors.hpp"
#include "jpegcs/image.hpp"

namespace jpegcs {

// ---------------------------------------------------------------------------
// Color conversion
// ---------------------------------------------------------------------------

/// BT.601 luma, applied to encoded (not linearized) channel values.
inline double luma(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

// ---------------------------------------------------------------------------
// File I/O
// ---------------------------------------------------------------------------

namespace detail {

inline std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

inline std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return bytes;
}

/// Reads one whitespace-delimited header token of a PNM file, skipping
/// '#' comments.
inline std::size_t pnm_header_value(const std::vector<unsigned char>& bytes, std::size_t& pos,
                                    const std::string& name) {
  for (;;) {
    while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
    if (pos < bytes.size() && bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  std::size_t value = 0;
  std::size_t digits = 0;
  while (pos < bytes.size() && std::isdigit(bytes[pos])) {
    value = value * 10 + static_cast<std::size_t>(bytes[pos] - '0');
    ++pos;
    if (++digits > 9) throw FormatError("PGM " + name + " too large");
  }
  if (digits == 0) throw FormatError("PGM header missing " + name);
  return value;
}

inline Image decode_pgm(const std::vector<unsigned char>& bytes, const std::string& label) {
  std::size_t pos = 2;
  const std::size_t width = pnm_header_value(bytes, pos, "width");
  const std::size_t height = pnm_header_value(bytes, pos, "height");
  const std::size_t maxval = pnm_header_value(bytes, pos, "maxval");
  if (width == 0 || height == 0) throw FormatError(label + ": zero image dimension");
  if (maxval == 0 || maxval > 255) throw FormatError(label + ": only 8-bit PGM is supported");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw FormatError(label + ": malformed PGM header");
  }
  ++pos;
  if (bytes.size() - pos < width * height) throw FormatError(label + ": truncated PGM data");
  std::vector<double> pixels(width * height);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    pixels[i] = std::min<double>(bytes[pos + i], static_cast<double>(maxval));
  }
  return Image(height, width, std::move(pixels), static_cast<double>(maxval));
}

inline Image decode_png(const std::filesystem::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.string().c_str())) {
    throw FormatError(path.string() + ": " + png.message);
  }
  if (png.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&png);
    throw FormatError(path.string() + ": only 8-bit PNG is supported");
  }
  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
    std::string message = png.message;
    png_image_free(&png);
    throw FormatError(path.string() + ": " + message);
  }
  const std::size_t rows = png.height;
  const std::size_t cols = png.width;
  std::vector<double> pixels(rows * cols);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    pixels[i] = color ? luma(buffer[3 * i], buffer[3 * i + 1], buffer[3 * i + 2])
                      : static_cast<double>(buffer[i]);
  }
  return Image(rows, cols, std::move(pixels), 255.0);
}

inline std::vector<std::uint8_t> to_bytes(const Image& img, double peak) {
  std::vector<std::uint8_t> out(img.size());
  const auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(std::clamp(round_half_away(px[i]), 0.0, peak));
  }
  return out;
}

}  // namespace detail

/// Loads a PGM (P5, maxval <= 255) or 8-bit PNG. The encoding is detected
/// from the file signature; color PNGs are reduced to luma.
inline Image load_image(const std::filesystem::path& path) {
  const auto bytes = detail::read_all(path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') {
    return detail::decode_pgm(bytes, path.string());
  }
  static constexpr std::array<unsigned char, 8> kPngSignature = {0x89, 'P', 'N', 'G',
                                                                 '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= kPngSignature.size() &&
      std::equal(kPngSignature.begin(), kPngSignature.end(), bytes.begin())) {
    return detail::decode_png(path);
  }
  throw FormatError(path.string() + ": not a binary PGM or PNG file");
}

/// Writes `img` as PGM or PNG depending on the file extension. Pixels are
/// rounded half away from zero and clamped to [0, min(q_max, 255)].
inline void save_image(const Image& img, const std::filesystem::path& path) {
  const std::string ext = detail::lower_extension(path);
  const double peak = std::min(255.0, std::floor(img.q_max()));
  const auto bytes = detail::to_bytes(img, peak);
  if (ext == ".pgm") {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "P5\n" << img.cols() << ' ' << img.rows() << '\n' << static_cast<int>(peak) << '\n';
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
  } else if (ext == ".png") {
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(img.cols());
    png.height = static_cast<png_uint_32>(img.rows());
    png.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&png, path.string().c_str(), 0, bytes.data(), 0, nullptr)) {
      throw IoError(path.string() + ": " + png.message);
    }
  } else {
    throw FormatError(path.string() + ": unsupported output extension '" + ext + "'");
  }
}

// ---------------------------------------------------------------------------
// Shepp-Logan phantom
// ---------------------------------------------------------------------------

/// One ellipse in the unit square [-1,1]^2, x to the right and y up.
struct Ellipse {
  double intensity;
  double semi_a;  // along the rotated x axis
  double semi_b;
  double center_x;
  double center_y;
  double rotation_deg;

  bool contains(double x, double y) const {
    const double phi = rotation_deg * std::numbers::pi / 180.0;
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    const double dx = x - center_x;
    const double dy = y - center_y;
    const double u = (dx * c + dy * s) / semi_a;
    const double v = (-dx * s + dy * c) / semi_b;
    return u * u + v * v <= 1.0;
  }
};

struct PhantomSpec {
  std::size_t size = 256;
  std::vector<Ellipse> ellipses;

  /// Ten-ellipse Shepp-Logan table with the higher-contrast intensities of
  /// Toft's modification (the variant produced by MATLAB's `phantom`).
  static PhantomSpec shepp_logan(std::size_t size = 256) {
    return {size,
            {
                {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
                {-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
                {-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0},
                {-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0},
                {0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0},
                {0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0},
                {0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0},
                {0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0},
                {0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0},
                {0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0},
            }};
  }

  /// Same geometry with the original low-contrast intensities.
  static PhantomSpec original_shepp_logan(std::size_t size = 256) {
    PhantomSpec spec = shepp_logan(size);
    constexpr std::array<double, 10> kIntensity = {2.0,  -0.98, -0.02, -0.02, 0.01,
                                                   0.01, 0.01,  0.01,  0.01,  0.01};
    for (std::size_t i = 0; i < spec.ellipses.size(); ++i) {
      spec.ellipses[i].intensity = kIntensity[i];
    }
    return spec;
  }

  void validate() const {
    if (size == 0) throw DomainError("phantom size must be positive");
    for (const auto& e : ellipses) {
      if (!(e.semi_a > 0.0) || !(e.semi_b > 0.0)) {
        throw DomainError("phantom ellipse semi-axes must be positive");
      }
    }
  }
};

/// Rasterizes the phantom by point-sampling pixel centers, then maps the
/// value range linearly onto [0, 255]. A flat raster maps to all zeros.
inline Image generate_phantom(const PhantomSpec& spec) {
  spec.validate();
  const std::size_t n = spec.size;
  const double nd = static_cast<double>(n);
  Image img(n, n, 255.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = 1.0 - static_cast<double>(2 * i + 1) / nd;
    for (std::size_t j = 0; j < n; ++j) {
      const double x = static_cast<double>(2 * j + 1) / nd - 1.0;
      double v = 0.0;
      for (const auto& e : spec.ellipses) {
        if (e.contains(x, y)) v += e.intensity;
      }
      img(i, j) = v;
    }
  }
  const auto [lo, hi] = std::minmax_element(img.pixels().begin(), img.pixels().end());
  const double min_v = *lo;
  const double range = *hi - *lo;
  for (double& v : img.pixels()) v = range > 0.0 ? (v - min_v) / range * 255.0 : 0.0;
  return img;
}

// ---------------------------------------------------------------------------
// Block padding
// ---------------------------------------------------------------------------

/// Image grown to a block multiple together with the size it came from.
struct PaddedImage {
  Image image;
  std::size_t original_rows;
  std::size_t original_cols;
};

inline PaddedImage pad_to_block_multiple(const Image& img, std::size_t block) {
  if (block == 0) throw DomainError("block size must be >= 1");
  const std::size_t rows = (img.rows() + block - 1) / block * block;
  const std::size_t cols = (img.cols() + block - 1) / block * block;
  if (rows == img.rows() && cols == img.cols()) return {img, img.rows(), img.cols()};
  Image out(rows, cols, img.q_max());
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t sr = std::min(r, img.rows() - 1);
    for (std::size_t c = 0; c < cols; ++c) {
      out(r, c) = img(sr, std::min(c, img.cols() - 1));
    }
  }
  return {std::move(out), img.rows(), img.cols()};
}

/// Top-left `rows` x `cols` window of `img`.
inline Image crop(const Image& img, std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0 || rows > img.rows() || cols > img.cols()) {
    throw DimensionError("crop window outside image");
  }
  if (rows == img.rows() && cols == img.cols()) return img;
  Image out(rows, cols, img.q_max());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = img(r, c);
  }
  return out;
}

inline Image crop_to_original(const PaddedImage& padded, const Image& processed) {
  return crop(processed, padded.original_rows, padded.original_cols);
}

}  // namespace jpegcs
