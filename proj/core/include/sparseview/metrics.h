#pragma once

#include "sparseview/image.h"

namespace sparseview {

inline constexpr double kPsnrCap = 99.0;

double mean_squared_error(const ImageBuffer& a, const ImageBuffer& b);

// 10 log10(1 / MSE) with peak 1; identical images give kPsnrCap.
double psnr(const ImageBuffer& a, const ImageBuffer& b);

// Windowed SSIM: 11x11 Gaussian window (sigma 1.5) over every fully inside
// position, C1 = 0.01^2, C2 = 0.03^2, computed per channel and averaged.
// Both dims must be >= 11.
double ssim(const ImageBuffer& a, const ImageBuffer& b);

}  // namespace sparseview
