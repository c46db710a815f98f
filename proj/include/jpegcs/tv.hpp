#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "jpegcs/errors.hpp"
#include "jpegcs/image.hpp"

namespace jpegcs {

/// Forward differences with a replicate (Neumann) boundary: the vertical
/// difference on the last row and the horizontal one on the last column
/// are zero.
inline void forward_differences(std::span<const double> x, std::size_t rows, std::size_t cols,
                                std::span<double> dv, std::span<double> dh) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = x.data() + i * cols;
    const double* below = i + 1 < rows ? row + cols : row;
    for (std::size_t j = 0; j < cols; ++j) {
      dv[i * cols + j] = below[j] - row[j];
      dh[i * cols + j] = j + 1 < cols ? row[j + 1] - row[j] : 0.0;
    }
  }
}

/// Adjoint of forward_differences: out = D^T (pv, ph).
inline void difference_adjoint(std::span<const double> pv, std::span<const double> ph,
                               std::size_t rows, std::size_t cols, std::span<double> out) {
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const std::size_t k = i * cols + j;
      double v = 0.0;
      if (i + 1 < rows) v -= pv[k];
      if (i > 0) v += pv[k - cols];
      if (j + 1 < cols) v -= ph[k];
      if (j > 0) v += ph[k - 1];
      out[k] = v;
    }
  }
}

/// Isotropic total variation sum_ij sqrt(dv^2 + dh^2 + eps).
inline double tv_value(std::span<const double> x, std::size_t rows, std::size_t cols,
                       double eps) {
  double sum = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const std::size_t k = i * cols + j;
      const double dv = i + 1 < rows ? x[k + cols] - x[k] : 0.0;
      const double dh = j + 1 < cols ? x[k + 1] - x[k] : 0.0;
      sum += std::sqrt(dv * dv + dh * dh + eps);
    }
  }
  return sum;
}

inline double tv_value(const Image& img, double eps) {
  if (!(eps >= 0.0)) throw DomainError("tv_value: eps must be >= 0");
  return tv_value(img.pixels(), img.rows(), img.cols(), eps);
}

/// Gradient of the eps-smoothed TV. Each pixel appears in its own
/// difference pair and in the pairs of its upper and left neighbours.
inline void tv_gradient(std::span<const double> x, std::size_t rows, std::size_t cols,
                        double eps, std::span<double> grad) {
  std::vector<double> pv(x.size());
  std::vector<double> ph(x.size());
  forward_differences(x, rows, cols, pv, ph);
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double m = std::sqrt(pv[k] * pv[k] + ph[k] * ph[k] + eps);
    pv[k] /= m;
    ph[k] /= m;
  }
  difference_adjoint(pv, ph, rows, cols, grad);
}

inline std::vector<double> tv_gradient(const Image& img, double eps) {
  if (!(eps > 0.0)) throw DomainError("tv_gradient: eps must be > 0 (TV is not smooth at 0)");
  std::vector<double> g(img.size());
  tv_gradient(img.pixels(), img.rows(), img.cols(), eps, g);
  return g;
}

}  // namespace jpegcs
