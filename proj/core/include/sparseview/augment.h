#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sparseview/camera.h"
#include "sparseview/image.h"
#include "sparseview/rng.h"

namespace sparseview {

// Linear ramp of the augmentation weight from 0 to max_weight over
// warmup_steps, constant afterwards.
struct NoiseSchedule {
  double max_weight = 0.0;
  std::int64_t warmup_steps = 0;
  std::int64_t total_steps = 0;

  void validate() const;
};

double noise_weight(const NoiseSchedule& schedule, std::int64_t step);

struct PatchSpec {
  int side = 8;
  int window = 3;  // odd, <= side

  void validate() const;
};

// Square patch at a uniformly drawn top-left corner, pixels in row-major order.
std::vector<Pixel> sample_patch(int width, int height, const PatchSpec& spec, Rng& rng);

// For every pixel of a row-major width x height grid, the index of the
// brightest pixel (HSV value = max channel) within the odd window centred on
// it, clipped at the grid border. Ties go to the first in row-major order.
std::vector<std::size_t> brightest_sources(std::span<const Rgb> grid, int width, int height,
                                           int window);

// Each output pixel takes the whole color of its brightest neighbor.
std::vector<Rgb> brightest_dilate(std::span<const Rgb> grid, int width, int height, int window);

}  // namespace sparseview
