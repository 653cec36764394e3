#include "sparseview/metrics.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sparseview {
namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

void check_dims(const ImageBuffer& a, const ImageBuffer& b, const char* what) {
  if (!a.same_dims(b) || a.pixel_count() == 0) {
    throw std::invalid_argument(std::string(what) + ": image dims differ (" +
                                std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                                " vs " + std::to_string(b.width()) + "x" +
                                std::to_string(b.height()) + ")");
  }
}

std::array<double, kWindow> gaussian_taps() {
  std::array<double, kWindow> taps{};
  double total = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    taps[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    total += taps[i];
  }
  for (double& t : taps) t /= total;
  return taps;
}

}  // namespace

double mean_squared_error(const ImageBuffer& a, const ImageBuffer& b) {
  check_dims(a, b, "mean_squared_error");
  const auto va = a.values(), vb = b.values();
  double total = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    const double d = va[i] - vb[i];
    total += d * d;
  }
  return total / static_cast<double>(va.size());
}

double psnr(const ImageBuffer& a, const ImageBuffer& b) {
  check_dims(a, b, "psnr");
  const double mse = mean_squared_error(a, b);
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double ssim(const ImageBuffer& a, const ImageBuffer& b) {
  check_dims(a, b, "ssim");
  if (a.width() < kWindow || a.height() < kWindow) {
    throw std::invalid_argument("ssim: images must be at least 11x11");
  }
  const auto taps = gaussian_taps();
  const int w = a.width(), h = a.height();
  const int ow = w - kWindow + 1, oh = h - kWindow + 1;
  const auto va = a.values(), vb = b.values();
  double total = 0.0;
  for (int c = 0; c < 3; ++c) {
    double channel = 0.0;
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        double mx = 0.0, my = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
        for (int j = 0; j < kWindow; ++j) {
          for (int i = 0; i < kWindow; ++i) {
            const double g = taps[j] * taps[i];
            const std::size_t idx = 3 * (static_cast<std::size_t>(y + j) * w + (x + i)) + c;
            const double p = va[idx], q = vb[idx];
            mx += g * p;
            my += g * q;
            sxx += g * (p * p);
            syy += g * (q * q);
            sxy += g * (p * q);
          }
        }
        const double vx = sxx - mx * mx, vy = syy - my * my, cxy = sxy - mx * my;
        channel += ((2.0 * mx * my + kC1) * (2.0 * cxy + kC2)) /
                   ((mx * mx + my * my + kC1) * (vx + vy + kC2));
      }
    }
    total += channel / (static_cast<double>(ow) * oh);
  }
  return total / 3.0;
}

}  // namespace sparseview
