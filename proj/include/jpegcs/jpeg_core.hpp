#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jpegcs/errors.hpp"
#include "jpegcs/image.hpp"
#include "jpegcs/imageio.hpp"

namespace jpegcs {

inline constexpr std::size_t kBlockSize = 8;
inline constexpr std::size_t kBlockArea = kBlockSize * kBlockSize;

/// 8x8 real grid, row-major: element (r, c) at index 8r + c.
using Block = std::array<double, kBlockArea>;
/// 8x8 grid of quantized coefficient levels.
using QuantizedBlock = std::array<std::int32_t, kBlockArea>;

struct BlockPos {
  std::uint8_t row;
  std::uint8_t col;
  friend auto operator<=>(const BlockPos&, const BlockPos&) = default;
};

// ---------------------------------------------------------------------------
// 8x8 DCT-II
// ---------------------------------------------------------------------------

namespace detail {

/// basis[k][n] = C(k)/2 * cos((2n+1) k pi / 16), C(0) = 1/sqrt(2), else 1.
/// Rows are orthonormal, so the 2D transform is basis * a * basis^T.
inline const std::array<std::array<double, kBlockSize>, kBlockSize>& block_dct_basis() {
  static const auto table = [] {
    std::array<std::array<double, kBlockSize>, kBlockSize> t{};
    for (std::size_t k = 0; k < kBlockSize; ++k) {
      const double ck = k == 0 ? 1.0 / std::numbers::sqrt2 : 1.0;
      for (std::size_t n = 0; n < kBlockSize; ++n) {
        t[k][n] = ck / 2.0 *
                  std::cos(static_cast<double>((2 * n + 1) * k) * std::numbers::pi / 16.0);
      }
    }
    return t;
  }();
  return table;
}

inline Block checked_block(std::span<const double> values, const char* what) {
  if (values.size() != kBlockArea) {
    throw DimensionError(std::string(what) + ": expected 64 values, got " +
                         std::to_string(values.size()));
  }
  Block b;
  std::copy(values.begin(), values.end(), b.begin());
  return b;
}

}  // namespace detail

/// Forward 8x8 DCT-II with the orthonormal JPEG scaling.
inline Block dct2_block(const Block& a) {
  const auto& t = detail::block_dct_basis();
  Block tmp{};
  // Transform along columns: tmp(k1, j) = sum_i t[k1][i] a(i, j).
  for (std::size_t k1 = 0; k1 < kBlockSize; ++k1) {
    for (std::size_t i = 0; i < kBlockSize; ++i) {
      const double w = t[k1][i];
      for (std::size_t j = 0; j < kBlockSize; ++j) tmp[k1 * 8 + j] += w * a[i * 8 + j];
    }
  }
  Block out{};
  for (std::size_t k1 = 0; k1 < kBlockSize; ++k1) {
    for (std::size_t k2 = 0; k2 < kBlockSize; ++k2) {
      double s = 0.0;
      for (std::size_t j = 0; j < kBlockSize; ++j) s += t[k2][j] * tmp[k1 * 8 + j];
      out[k1 * 8 + k2] = s;
    }
  }
  return out;
}

/// Inverse of dct2_block (the transpose of the orthonormal basis).
inline Block idct2_block(const Block& spectrum) {
  const auto& t = detail::block_dct_basis();
  Block tmp{};
  for (std::size_t i = 0; i < kBlockSize; ++i) {
    for (std::size_t k1 = 0; k1 < kBlockSize; ++k1) {
      const double w = t[k1][i];
      for (std::size_t k2 = 0; k2 < kBlockSize; ++k2) {
        tmp[i * 8 + k2] += w * spectrum[k1 * 8 + k2];
      }
    }
  }
  Block out{};
  for (std::size_t i = 0; i < kBlockSize; ++i) {
    for (std::size_t j = 0; j < kBlockSize; ++j) {
      double s = 0.0;
      for (std::size_t k2 = 0; k2 < kBlockSize; ++k2) s += t[k2][j] * tmp[i * 8 + k2];
      out[i * 8 + j] = s;
    }
  }
  return out;
}

inline Block dct2_block(std::span<const double> values) {
  return dct2_block(detail::checked_block(values, "dct2_block"));
}

inline Block idct2_block(std::span<const double> values) {
  return idct2_block(detail::checked_block(values, "idct2_block"));
}

// ---------------------------------------------------------------------------
// Quantization
// ---------------------------------------------------------------------------

/// Standard JPEG luminance table used as the QF = 50 baseline.
inline constexpr std::array<std::int32_t, kBlockArea> kBaseQuantTable = {
    16, 11, 10, 16, 24,  40,  51,  61,   //
    12, 12, 14, 19, 26,  58,  60,  55,   //
    14, 13, 16, 24, 40,  57,  69,  56,   //
    14, 17, 22, 29, 51,  87,  80,  62,   //
    18, 22, 37, 56, 68,  109, 103, 77,   //
    24, 35, 55, 64, 81,  104, 113, 92,   //
    49, 64, 78, 87, 103, 121, 120, 101,  //
    72, 92, 95, 98, 112, 100, 103, 99,
};

inline void check_quality_factor(int qf) {
  if (qf < 1 || qf > 99) {
    throw DomainError("quality factor must be in [1, 99], got " + std::to_string(qf));
  }
}

/// Scale applied to the base table: 2 - 0.02 QF above 50, 50 / QF below.
inline double quality_scale(int qf) {
  check_quality_factor(qf);
  return qf >= 50 ? 2.0 - 0.02 * qf : 50.0 / qf;
}

class QuantMatrix {
 public:
  /// Entries are round(base * scale) clamped to [1, 255]. The product is
  /// evaluated as an exact rational so ties round away from zero reliably
  /// (2 - 0.02 * 75 is not exactly 0.5 in binary floating point).
  static QuantMatrix for_quality(int qf) {
    check_quality_factor(qf);
    QuantMatrix m;
    m.qf_ = qf;
    // scale = num / den with num, den positive integers.
    const std::int64_t num = qf >= 50 ? 200 - 2 * qf : 50;
    const std::int64_t den = qf >= 50 ? 100 : qf;
    for (std::size_t i = 0; i < kBlockArea; ++i) {
      const std::int64_t p = kBaseQuantTable[i] * num;
      const std::int64_t rounded = (2 * p + den) / (2 * den);
      m.entries_[i] = static_cast<std::int32_t>(std::clamp<std::int64_t>(rounded, 1, 255));
    }
    return m;
  }

  int quality() const { return qf_; }
  std::int32_t operator()(std::size_t row, std::size_t col) const {
    return entries_[row * kBlockSize + col];
  }
  std::int32_t operator[](std::size_t i) const { return entries_[i]; }
  const std::array<std::int32_t, kBlockArea>& entries() const { return entries_; }

 private:
  QuantMatrix() = default;
  int qf_ = 50;
  std::array<std::int32_t, kBlockArea> entries_{};
};

inline QuantMatrix quant_matrix_for_qf(int qf) { return QuantMatrix::for_quality(qf); }

inline QuantizedBlock quantize_block(const Block& spectrum, const QuantMatrix& q) {
  QuantizedBlock out;
  for (std::size_t i = 0; i < kBlockArea; ++i) {
    out[i] = static_cast<std::int32_t>(round_half_away(spectrum[i] / q[i]));
  }
  return out;
}

inline Block dequantize_block(const QuantizedBlock& levels, const QuantMatrix& q) {
  Block out;
  for (std::size_t i = 0; i < kBlockArea; ++i) {
    out[i] = static_cast<double>(levels[i]) * static_cast<double>(q[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Zigzag scan
// ---------------------------------------------------------------------------

/// JPEG zigzag scan: walk the anti-diagonals r + c = d, going up-right on
/// even d and down-left on odd d.
inline const std::array<BlockPos, kBlockArea>& zigzag_order() {
  static const auto order = [] {
    std::array<BlockPos, kBlockArea> o{};
    std::size_t n = 0;
    for (int d = 0; d <= 14; ++d) {
      const int lo = std::max(0, d - 7);
      const int hi = std::min(d, 7);
      for (int k = lo; k <= hi; ++k) {
        const int row = (d % 2 == 0) ? d - k : k;
        o[n++] = {static_cast<std::uint8_t>(row), static_cast<std::uint8_t>(d - row)};
      }
    }
    return o;
  }();
  return order;
}

/// Reorders a block's coefficients into scan order.
template <typename T>
std::array<T, kBlockArea> zigzag_scan(const std::array<T, kBlockArea>& block) {
  std::array<T, kBlockArea> out;
  const auto& order = zigzag_order();
  for (std::size_t n = 0; n < kBlockArea; ++n) {
    out[n] = block[order[n].row * kBlockSize + order[n].col];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Nonzero accounting
// ---------------------------------------------------------------------------

struct BlockStats {
  std::size_t total_coeffs = 0;
  std::size_t nonzero_coeffs = 0;
  double nonzero_fraction = 0.0;
};

inline BlockStats count_nonzero_fraction(std::span<const QuantizedBlock> blocks) {
  if (blocks.empty()) throw DomainError("count_nonzero_fraction: no blocks");
  BlockStats s;
  for (const auto& b : blocks) {
    for (auto v : b) s.nonzero_coeffs += v != 0;
  }
  s.total_coeffs = blocks.size() * kBlockArea;
  s.nonzero_fraction =
      static_cast<double>(s.nonzero_coeffs) / static_cast<double>(s.total_coeffs);
  return s;
}

// ---------------------------------------------------------------------------
// Lossy round trip
// ---------------------------------------------------------------------------

struct JpegOptions {
  /// Subtract the mid-gray level before the forward DCT and add it back
  /// after the inverse.
  bool level_shift = true;
};

struct JpegResult {
  Image image;
  BlockStats stats;
  std::vector<QuantizedBlock> blocks;  // raster order over the padded image
};

inline double level_shift_for(double q_max) { return (std::floor(q_max) + 1.0) / 2.0; }

/// DCT, quantization, dequantization and inverse DCT over every 8x8 block.
/// Images that are not a block multiple are edge-padded and the result is
/// cropped back; output pixels are clamped to [0, q_max].
inline JpegResult jpeg_lossy_roundtrip(const Image& img, int qf, JpegOptions opts = {}) {
  const QuantMatrix q = quant_matrix_for_qf(qf);
  const PaddedImage padded = pad_to_block_multiple(img, kBlockSize);
  const Image& src = padded.image;
  const double shift = opts.level_shift ? level_shift_for(img.q_max()) : 0.0;

  Image out(src.rows(), src.cols(), img.q_max());
  JpegResult result;
  result.blocks.reserve((src.rows() / kBlockSize) * (src.cols() / kBlockSize));
  for (std::size_t br = 0; br < src.rows(); br += kBlockSize) {
    for (std::size_t bc = 0; bc < src.cols(); bc += kBlockSize) {
      Block b;
      for (std::size_t i = 0; i < kBlockSize; ++i) {
        for (std::size_t j = 0; j < kBlockSize; ++j) b[i * 8 + j] = src(br + i, bc + j) - shift;
      }
      const QuantizedBlock levels = quantize_block(dct2_block(b), q);
      const Block rec = idct2_block(dequantize_block(levels, q));
      for (std::size_t i = 0; i < kBlockSize; ++i) {
        for (std::size_t j = 0; j < kBlockSize; ++j) out(br + i, bc + j) = rec[i * 8 + j] + shift;
      }
      result.blocks.push_back(levels);
    }
  }
  result.stats = count_nonzero_fraction(result.blocks);
  result.image = crop_to_original(padded, out).clamped();
  return result;
}

}  // namespace jpegcs
