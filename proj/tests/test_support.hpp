#pragma once

// Reference implementations used as oracles. None of these share code with
// the library paths they check.

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "jpegcs/image.hpp"

namespace jpegcs::testing {

inline std::filesystem::path data_dir() { return JPEGCS_TEST_DATA_DIR; }

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("jpegcs_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::vector<double> random_values(std::size_t n, double lo, double hi,
                                         std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = dist(gen);
  return v;
}

inline Image random_image(std::size_t rows, std::size_t cols, std::uint64_t seed,
                          double lo = 0.0, double hi = 255.0) {
  return Image(rows, cols, random_values(rows * cols, lo, hi, seed));
}

/// Direct 64-term evaluation of the 8x8 DCT-II definition.
inline std::array<double, 64> brute_force_dct8(const std::array<double, 64>& a) {
  std::array<double, 64> out{};
  for (int k1 = 0; k1 < 8; ++k1) {
    for (int k2 = 0; k2 < 8; ++k2) {
      const double c1 = k1 == 0 ? 1.0 / std::sqrt(2.0) : 1.0;
      const double c2 = k2 == 0 ? 1.0 / std::sqrt(2.0) : 1.0;
      double s = 0.0;
      for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
          s += a[i * 8 + j] * std::cos((2 * i + 1) * k1 * std::numbers::pi / 16.0) *
               std::cos((2 * j + 1) * k2 * std::numbers::pi / 16.0);
        }
      }
      out[k1 * 8 + k2] = c1 / 2.0 * c2 / 2.0 * s;
    }
  }
  return out;
}

/// Unnormalized cosine products cos((2i+1)k1 pi/16) cos((2j+1)k2 pi/16),
/// orthonormalized by modified Gram-Schmidt. Vector k1*8+k2 is returned at
/// index k1*8+k2.
inline std::vector<std::array<double, 64>> gram_schmidt_dct8_basis() {
  std::vector<std::array<double, 64>> basis(64);
  for (int k1 = 0; k1 < 8; ++k1) {
    for (int k2 = 0; k2 < 8; ++k2) {
      auto& v = basis[k1 * 8 + k2];
      for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
          v[i * 8 + j] = std::cos((2 * i + 1) * k1 * std::numbers::pi / 16.0) *
                         std::cos((2 * j + 1) * k2 * std::numbers::pi / 16.0);
        }
      }
    }
  }
  for (std::size_t a = 0; a < basis.size(); ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      double dot = 0.0;
      for (int t = 0; t < 64; ++t) dot += basis[a][t] * basis[b][t];
      for (int t = 0; t < 64; ++t) basis[a][t] -= dot * basis[b][t];
    }
    double norm = 0.0;
    for (double x : basis[a]) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : basis[a]) x /= norm;
  }
  return basis;
}

/// Direct double sum for the orthonormal N x M DCT-II at one frequency.
inline double brute_force_full_dct(const Image& img, std::size_t k1, std::size_t k2) {
  const double n = static_cast<double>(img.rows());
  const double m = static_cast<double>(img.cols());
  const double s1 = k1 == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
  const double s2 = k2 == 0 ? std::sqrt(1.0 / m) : std::sqrt(2.0 / m);
  double s = 0.0;
  for (std::size_t i = 0; i < img.rows(); ++i) {
    for (std::size_t j = 0; j < img.cols(); ++j) {
      s += img(i, j) * std::cos(std::numbers::pi * (2 * i + 1) * k1 / (2 * n)) *
           std::cos(std::numbers::pi * (2 * j + 1) * k2 / (2 * m));
    }
  }
  return s1 * s2 * s;
}

/// Isotropic TV computed straight from the per-pixel gradient definition.
inline double reference_tv(const Image& img, double eps) {
  double s = 0.0;
  for (std::size_t i = 0; i < img.rows(); ++i) {
    for (std::size_t j = 0; j < img.cols(); ++j) {
      const double dv = i + 1 < img.rows() ? img(i + 1, j) - img(i, j) : 0.0;
      const double dh = j + 1 < img.cols() ? img(i, j + 1) - img(i, j) : 0.0;
      s += std::sqrt(dv * dv + dh * dh + eps);
    }
  }
  return s;
}

}  // namespace jpegcs::testing
