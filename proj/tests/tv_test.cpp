#include <gtest/gtest.h>

#include "jpegcs/tv.hpp"
#include "test_support.hpp"

namespace jpegcs {
namespace {

TEST(TvValue, SmallExamples) {
  EXPECT_EQ(tv_value(Image(5, 5, 255.0, 17.0), 0.0), 0.0);
  const Image step(2, 2, {0.0, 1.0, 0.0, 1.0});
  EXPECT_DOUBLE_EQ(tv_value(step, 0.0), 2.0);
  EXPECT_THROW(tv_value(step, -1.0), DomainError);
}

TEST(TvValue, MatchesReferenceAndIsShiftInvariant) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Image img = testing::random_image(7 + seed % 3, 9, seed);
    const double eps = seed % 2 ? 0.0 : 1e-8;
    const double tv = tv_value(img, eps);
    EXPECT_NEAR(tv, testing::reference_tv(img, eps), 1e-9 * tv);
    EXPECT_GT(tv, 0.0);
    Image shifted = img;
    for (double& v : shifted.pixels()) v += 40.0;
    EXPECT_NEAR(tv_value(shifted, eps), tv, 1e-9 * tv);
  }
}

TEST(TvValue, ZeroOnlyForConstantImages) {
  Image img(6, 6, 255.0, 3.0);
  EXPECT_EQ(tv_value(img, 0.0), 0.0);
  img(5, 5) = 3.0001;
  EXPECT_GT(tv_value(img, 0.0), 0.0);
}

TEST(TvGradient, ConstantImageHasZeroGradient) {
  for (double g : tv_gradient(Image(4, 6, 255.0, 99.0), 1e-8)) EXPECT_EQ(g, 0.0);
  EXPECT_THROW(tv_gradient(Image(2, 2), 0.0), DomainError);
}

TEST(TvGradient, MatchesCentralDifferences) {
  const double eps = 1e-8, h = 1e-5;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    Image img = testing::random_image(8, 8, seed * 31 + 1);
    const auto g = tv_gradient(img, eps);
    for (std::size_t k = 0; k < img.size(); ++k) {
      const double orig = img.pixels()[k];
      img.pixels()[k] = orig + h;
      const double up = tv_value(img, eps);
      img.pixels()[k] = orig - h;
      const double down = tv_value(img, eps);
      img.pixels()[k] = orig;
      EXPECT_NEAR(g[k], (up - down) / (2 * h), 1e-5) << "seed " << seed << " pixel " << k;
    }
  }
}

TEST(TvGradient, SumsToZero) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = tv_gradient(testing::random_image(11, 5, seed), 1e-8);
    double s = 0.0, scale = 0.0;
    for (double v : g) {
      s += v;
      scale += std::abs(v);
    }
    EXPECT_NEAR(s, 0.0, 1e-12 * scale);
  }
}

TEST(Differences, AdjointIdentity) {
  // <D x, p> == <x, D^T p>
  const std::size_t r = 9, c = 6;
  const auto x = testing::random_values(r * c, -1, 1, 1);
  const auto pv = testing::random_values(r * c, -1, 1, 2);
  const auto ph = testing::random_values(r * c, -1, 1, 3);
  std::vector<double> dv(r * c), dh(r * c), adj(r * c);
  forward_differences(x, r, c, dv, dh);
  difference_adjoint(pv, ph, r, c, adj);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t k = 0; k < r * c; ++k) {
    lhs += dv[k] * pv[k] + dh[k] * ph[k];
    rhs += x[k] * adj[k];
  }
  EXPECT_NEAR(lhs, rhs, 1e-12);
}

}  // namespace
}  // namespace jpegcs
