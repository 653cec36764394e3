#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sparseview/camera.h"
#include "sparseview/image.h"
#include "sparseview/radiance.h"
#include "sparseview/renderer.h"

namespace sparseview {

struct RobustnessRow {
  double clean_psnr = 0.0;
  double noisy_psnr = 0.0;
};

struct RobustnessReport {
  double amplitude = 0.0;
  std::vector<RobustnessRow> views;
  double mean_clean = 0.0;
  double mean_noisy = 0.0;

  // Mean clean minus mean noisy PSNR.
  double drop() const { return mean_clean - mean_noisy; }
};

// Renders every camera clean and with uniform density noise of the given
// amplitude (sigma' = max(0, sigma + u), u ~ U(-a, a) per sample) and scores
// both against the reference images.
RobustnessReport robustness_report(const RadianceSource& field, std::span<const Camera> cameras,
                                   std::span<const ImageBuffer> references, double amplitude,
                                   const RenderConfig& render, std::uint64_t noise_seed);

}  // namespace sparseview
