#include <gtest/gtest.h>

#include <cmath>

#include "jpegcs/metrics.hpp"
#include "test_support.hpp"

namespace jpegcs {
namespace {

TEST(Mse, Examples) {
  const Image a = testing::random_image(4, 4, 1);
  EXPECT_EQ(mse(a, a), 0.0);
  EXPECT_EQ(mse(Image(3, 3, 255.0, 0.0), Image(3, 3, 255.0, 255.0)), 65025.0);
  EXPECT_EQ(mse(Image(1, 2, {0.0, 0.0}), Image(1, 2, {3.0, 4.0})), 12.5);
  EXPECT_THROW(mse(Image(2, 3), Image(3, 2)), DimensionError);
}

TEST(Psnr, Examples) {
  const Image a = testing::random_image(8, 8, 2);
  const PsnrResult same = psnr(a, a, 255.0);
  EXPECT_TRUE(same.is_infinite());
  EXPECT_EQ(same.mse, 0.0);
  EXPECT_GT(same.psnr_db, 0.0);

  Image b = a;
  for (double& v : b.pixels()) v += 1.0;
  EXPECT_NEAR(psnr(a, b, 255.0).psnr_db, 10.0 * std::log10(65025.0), 1e-12);
  EXPECT_NEAR(psnr(a, b, 255.0).psnr_db, 48.13, 0.005);

  EXPECT_NEAR(psnr(Image(2, 2, 255.0, 0.0), Image(2, 2, 255.0, 255.0), 255.0).psnr_db, 0.0,
              1e-12);
  EXPECT_THROW(psnr(a, Image(8, 7), 255.0), DimensionError);
  EXPECT_THROW(psnr(a, b, 0.0), DomainError);
}

TEST(Psnr, Properties) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Image a = testing::random_image(6, 9, seed);
    const Image b = testing::random_image(6, 9, seed + 1000);
    EXPECT_EQ(psnr(a, b, 255.0).psnr_db, psnr(b, a, 255.0).psnr_db);

    Image a2 = a, b2 = b;
    for (double& v : a2.pixels()) v += 13.25;
    for (double& v : b2.pixels()) v += 13.25;
    EXPECT_NEAR(mse(a2, b2), mse(a, b), 1e-9 * mse(a, b));

    // b = a + e; scaling e by s > 1 lowers PSNR.
    Image scaled = a;
    for (std::size_t k = 0; k < a.size(); ++k)
      scaled.pixels()[k] = a.pixels()[k] + 1.5 * (b.pixels()[k] - a.pixels()[k]);
    EXPECT_LT(psnr(a, scaled, 255.0).psnr_db, psnr(a, b, 255.0).psnr_db);
  }
}

TEST(Psnr, DefaultPeakComesFromReference) {
  const Image a(2, 2, 100.0, 10.0);
  const Image b(2, 2, 100.0, 11.0);
  EXPECT_NEAR(psnr(a, b).psnr_db, 40.0, 1e-12);
}

}  // namespace
}  // namespace jpegcs
