#include <gtest/gtest.h>

#include <cmath>

#include "sparseview/metrics.h"
#include "sparseview/rng.h"

namespace sparseview {
namespace {

// Direct per-window evaluation of SSIM, written independently of the library.
double reference_ssim(const ImageBuffer& a, const ImageBuffer& b) {
  double g[11][11];
  double norm = 0.0;
  for (int i = 0; i < 11; ++i) {
    for (int j = 0; j < 11; ++j) {
      g[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2 * 1.5 * 1.5));
      norm += g[i][j];
    }
  }
  const double c1 = 1e-4, c2 = 9e-4;
  double total = 0.0;
  int windows = 0;
  for (int ch = 0; ch < 3; ++ch) {
    for (int y = 0; y + 11 <= a.height(); ++y) {
      for (int x = 0; x + 11 <= a.width(); ++x) {
        double mx = 0, my = 0;
        for (int i = 0; i < 11; ++i) {
          for (int j = 0; j < 11; ++j) {
            mx += g[i][j] / norm * a.at(x + j, y + i)[ch];
            my += g[i][j] / norm * b.at(x + j, y + i)[ch];
          }
        }
        double vx = 0, vy = 0, cov = 0;
        for (int i = 0; i < 11; ++i) {
          for (int j = 0; j < 11; ++j) {
            const double dx = a.at(x + j, y + i)[ch] - mx;
            const double dy = b.at(x + j, y + i)[ch] - my;
            vx += g[i][j] / norm * dx * dx;
            vy += g[i][j] / norm * dy * dy;
            cov += g[i][j] / norm * dx * dy;
          }
        }
        total += ((2 * mx * my + c1) * (2 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
        ++windows;
      }
    }
  }
  return total / windows;
}

ImageBuffer test_image(std::uint64_t seed, int side = 16) {
  Rng rng(seed);
  ImageBuffer img(side, side);
  // No mid-gray: every value is in [0, 0.35] or [0.65, 1].
  for (double& v : img.values()) v = rng.uniform() < 0.5 ? rng.uniform(0, 0.35) : rng.uniform(0.65, 1);
  return img;
}

ImageBuffer negative(const ImageBuffer& img) {
  ImageBuffer out = img;
  for (double& v : out.values()) v = 1.0 - v;
  return out;
}

TEST(PsnrTest, Examples) {
  const ImageBuffer a(8, 8, {0.3, 0.3, 0.3});
  EXPECT_EQ(psnr(a, a), kPsnrCap);
  EXPECT_NEAR(psnr(ImageBuffer(8, 8, {0, 0, 0}), ImageBuffer(8, 8, {0.1, 0.1, 0.1})), 20.0, 1e-9);
  EXPECT_NEAR(psnr(ImageBuffer(8, 8, {0, 0, 0}), ImageBuffer(8, 8, {std::sqrt(0.001), std::sqrt(0.001), std::sqrt(0.001)})),
              30.0, 1e-9);
  EXPECT_THROW(psnr(ImageBuffer(8, 8), ImageBuffer(8, 9)), std::invalid_argument);
}

TEST(PsnrTest, SymmetricAndDecreasingInNoise) {
  const ImageBuffer a = test_image(1);
  Rng rng(2);
  ImageBuffer eps(16, 16);
  for (double& v : eps.values()) v = rng.uniform(-1, 1);
  double prev = kPsnrCap;
  for (double amp : {0.01, 0.05, 0.2}) {
    ImageBuffer b = a;
    for (std::size_t i = 0; i < b.values().size(); ++i) b.values()[i] += amp * eps.values()[i];
    EXPECT_EQ(psnr(a, b), psnr(b, a));
    EXPECT_LT(psnr(a, b), prev);
    prev = psnr(a, b);
  }
}

TEST(SsimTest, IdenticalAndConstantImages) {
  const ImageBuffer a = test_image(3);
  EXPECT_NEAR(ssim(a, a), 1.0, 1e-9);
  const ImageBuffer c(12, 12, {0.4, 0.4, 0.4});
  EXPECT_NEAR(ssim(c, c), 1.0, 1e-9);
}

TEST(SsimTest, NegativeScoresLow) {
  const ImageBuffer a = test_image(4);
  EXPECT_LT(ssim(a, negative(a)), 0.5);
}

TEST(SsimTest, MatchesReferenceAndIsSymmetric) {
  const ImageBuffer a = test_image(5, 19);
  ImageBuffer b = test_image(6, 19);
  for (std::size_t i = 0; i < b.values().size(); ++i) {
    b.values()[i] = 0.5 * b.values()[i] + 0.5 * a.values()[i];
  }
  EXPECT_NEAR(ssim(a, b), reference_ssim(a, b), 1e-12);
  EXPECT_EQ(ssim(a, b), ssim(b, a));
  EXPECT_NEAR(ssim(a, negative(a)), reference_ssim(a, negative(a)), 1e-12);
}

TEST(SsimTest, RejectsSmallOrMismatchedImages) {
  EXPECT_THROW(ssim(ImageBuffer(10, 20), ImageBuffer(10, 20)), std::invalid_argument);
  EXPECT_THROW(ssim(ImageBuffer(11, 11), ImageBuffer(12, 11)), std::invalid_argument);
}

}  // namespace
}  // namespace sparseview
