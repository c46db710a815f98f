#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jpegcs/errors.hpp"

namespace jpegcs {

/// Round half away from zero. std::round already does this; the alias names
/// the convention at every quantization site.
inline double round_half_away(double v) { return std::round(v); }

/// Grayscale raster of real-valued pixels stored row-major.
///
/// Pixels are kept as doubles throughout the pipeline; rounding to integers
/// only happens when an image is written to disk. `q_max` is the nominal
/// peak brightness (255 for 8-bit data) and is used as the PSNR peak.
class Image {
 public:
  Image() = default;

  Image(std::size_t rows, std::size_t cols, double q_max = 255.0, double fill = 0.0)
      : rows_(rows), cols_(cols), q_max_(q_max), pixels_(rows * cols, fill) {
    validate_shape();
  }

  Image(std::size_t rows, std::size_t cols, std::vector<double> pixels, double q_max = 255.0)
      : rows_(rows), cols_(cols), q_max_(q_max), pixels_(std::move(pixels)) {
    validate_shape();
    if (pixels_.size() != rows_ * cols_) {
      throw DimensionError("pixel count " + std::to_string(pixels_.size()) + " != " +
                           std::to_string(rows_) + "x" + std::to_string(cols_));
    }
    for (double v : pixels_) {
      if (!std::isfinite(v)) throw DomainError("image pixels must be finite");
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return pixels_.size(); }
  double q_max() const { return q_max_; }
  bool empty() const { return pixels_.empty(); }

  double operator()(std::size_t r, std::size_t c) const { return pixels_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return pixels_[r * cols_ + c]; }

  std::span<const double> pixels() const { return pixels_; }
  std::span<double> pixels() { return pixels_; }

  bool same_shape(const Image& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  /// Copy with every pixel clamped to [0, q_max].
  Image clamped() const {
    Image out = *this;
    for (double& v : out.pixels_) v = std::clamp(v, 0.0, q_max_);
    return out;
  }

  friend bool operator==(const Image& a, const Image& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.q_max_ == b.q_max_ &&
           a.pixels_ == b.pixels_;
  }

 private:
  void validate_shape() const {
    if (rows_ == 0 || cols_ == 0) throw DimensionError("image dimensions must be positive");
    if (!(q_max_ > 0.0) || !std::isfinite(q_max_)) throw DomainError("q_max must be positive");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  double q_max_ = 255.0;
  std::vector<double> pixels_;
};

inline void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(what) + ": " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
}

}  // namespace jpegcs
