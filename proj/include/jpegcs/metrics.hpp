#pragma once

#include <cmath>
#include <limits>

#include "jpegcs/errors.hpp"
#include "jpegcs/image.hpp"

namespace jpegcs {

struct PsnrResult {
  double psnr_db;  // +infinity when the images are identical
  double mse;

  bool is_infinite() const { return std::isinf(psnr_db); }
};

inline double mse(const Image& a, const Image& b) {
  require_same_shape(a, b, "mse");
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  double sum = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const double d = pa[i] - pb[i];
    sum += d * d;
  }
  return sum / static_cast<double>(pa.size());
}

/// Conventional peak signal-to-noise ratio, 10 log10(q_max^2 / MSE).
inline PsnrResult psnr(const Image& a, const Image& b, double q_max) {
  if (!(q_max > 0.0)) throw DomainError("psnr: q_max must be positive");
  const double e = mse(a, b);
  if (e == 0.0) return {std::numeric_limits<double>::infinity(), 0.0};
  return {10.0 * std::log10(q_max * q_max / e), e};
}

inline PsnrResult psnr(const Image& reference, const Image& test) {
  return psnr(reference, test, reference.q_max());
}

}  // namespace jpegcs
