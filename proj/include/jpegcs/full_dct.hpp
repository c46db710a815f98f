#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "jpegcs/errors.hpp"
#include "jpegcs/image.hpp"

namespace jpegcs {

/// Dense 2D coefficient array, row-major. Index k1 * cols + k2 holds the
/// coefficient of vertical frequency k1 and horizontal frequency k2.
struct SpectrumGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> coeffs;

  double operator()(std::size_t k1, std::size_t k2) const { return coeffs[k1 * cols + k2]; }
  double& operator()(std::size_t k1, std::size_t k2) { return coeffs[k1 * cols + k2]; }
  std::size_t size() const { return coeffs.size(); }
};

/// Orthonormal 1D DCT-II matrix: row k is s_k cos(pi (2n+1) k / 2N) with
/// s_0 = sqrt(1/N) and s_k = sqrt(2/N).
inline Eigen::MatrixXd dct_matrix(std::size_t n) {
  Eigen::MatrixXd m(n, n);
  const double nd = static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = k == 0 ? std::sqrt(1.0 / nd) : std::sqrt(2.0 / nd);
    for (std::size_t i = 0; i < n; ++i) {
      m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) =
          s * std::cos(std::numbers::pi * static_cast<double>((2 * i + 1) * k) / (2.0 * nd));
    }
  }
  return m;
}

/// Precomputed separable 2D DCT for a fixed raster shape. The solver loops
/// reuse one plan instead of rebuilding the basis on every transform.
class Dct2Plan {
 public:
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Dct2Plan(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), basis_rows_(dct_matrix(rows)), basis_cols_(dct_matrix(cols)) {
    if (rows == 0 || cols == 0) throw DimensionError("Dct2Plan: empty shape");
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return rows_ * cols_; }

  /// out = C_r * in * C_c^T, both buffers row-major rows x cols.
  void forward(std::span<const double> in, std::span<double> out) const {
    check(in.size(), out.size());
    Eigen::Map<const RowMajor> x(in.data(), rows_i(), cols_i());
    Eigen::Map<RowMajor> y(out.data(), rows_i(), cols_i());
    tmp_.noalias() = basis_rows_ * x;
    y.noalias() = tmp_ * basis_cols_.transpose();
  }

  /// out = C_r^T * in * C_c.
  void inverse(std::span<const double> in, std::span<double> out) const {
    check(in.size(), out.size());
    Eigen::Map<const RowMajor> x(in.data(), rows_i(), cols_i());
    Eigen::Map<RowMajor> y(out.data(), rows_i(), cols_i());
    tmp_.noalias() = basis_rows_.transpose() * x;
    y.noalias() = tmp_ * basis_cols_;
  }

 private:
  Eigen::Index rows_i() const { return static_cast<Eigen::Index>(rows_); }
  Eigen::Index cols_i() const { return static_cast<Eigen::Index>(cols_); }

  void check(std::size_t in, std::size_t out) const {
    if (in != size() || out != size()) throw DimensionError("Dct2Plan: buffer size mismatch");
  }

  std::size_t rows_;
  std::size_t cols_;
  Eigen::MatrixXd basis_rows_;
  Eigen::MatrixXd basis_cols_;
  // Scratch; makes a plan unsafe to share between threads.
  mutable RowMajor tmp_;
};

inline SpectrumGrid full_dct2(const Image& img) {
  Dct2Plan plan(img.rows(), img.cols());
  SpectrumGrid spec{img.rows(), img.cols(), std::vector<double>(img.size())};
  plan.forward(img.pixels(), spec.coeffs);
  return spec;
}

inline Image inverse_full_dct2(const SpectrumGrid& spec, double q_max = 255.0) {
  if (spec.coeffs.size() != spec.rows * spec.cols) {
    throw DimensionError("inverse_full_dct2: coefficient count does not match shape");
  }
  Dct2Plan plan(spec.rows, spec.cols);
  std::vector<double> px(spec.size());
  plan.inverse(spec.coeffs, px);
  return Image(spec.rows, spec.cols, std::move(px), q_max);
}

}  // namespace jpegcs
