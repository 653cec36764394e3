#include "sparseview/augment.h"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace sparseview {

void NoiseSchedule::validate() const {
  if (!(max_weight >= 0.0)) throw std::invalid_argument("NoiseSchedule: max weight must be >= 0");
  if (warmup_steps < 0 || total_steps < 0) {
    throw std::invalid_argument("NoiseSchedule: step counts must be >= 0");
  }
}

double noise_weight(const NoiseSchedule& schedule, std::int64_t step) {
  schedule.validate();
  if (step < 0) throw std::invalid_argument("noise_weight: step must be >= 0");
  if (step >= schedule.warmup_steps) return schedule.max_weight;
  return schedule.max_weight * static_cast<double>(step) /
         static_cast<double>(schedule.warmup_steps);
}

void PatchSpec::validate() const {
  if (side < 1) throw std::invalid_argument("PatchSpec: side must be >= 1");
  if (window < 1 || window % 2 == 0) throw std::invalid_argument("PatchSpec: window must be odd");
  if (window > side) throw std::invalid_argument("PatchSpec: window larger than patch");
}

std::vector<Pixel> sample_patch(int width, int height, const PatchSpec& spec, Rng& rng) {
  spec.validate();
  if (spec.side > width || spec.side > height) {
    throw std::invalid_argument("sample_patch: patch side " + std::to_string(spec.side) +
                                " does not fit a " + std::to_string(width) + "x" +
                                std::to_string(height) + " image");
  }
  const int x0 = static_cast<int>(rng.below(static_cast<std::size_t>(width - spec.side + 1)));
  const int y0 = static_cast<int>(rng.below(static_cast<std::size_t>(height - spec.side + 1)));
  std::vector<Pixel> out;
  out.reserve(static_cast<std::size_t>(spec.side) * spec.side);
  for (int y = y0; y < y0 + spec.side; ++y) {
    for (int x = x0; x < x0 + spec.side; ++x) out.push_back({x, y});
  }
  return out;
}

std::vector<std::size_t> brightest_sources(std::span<const Rgb> grid, int width, int height,
                                           int window) {
  if (width < 1 || height < 1 ||
      grid.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw std::invalid_argument("brightest_dilate: grid size does not match dims");
  }
  if (window < 1 || window % 2 == 0) throw std::invalid_argument("brightest_dilate: window must be odd");
  const int r = window / 2;
  std::vector<double> value(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    value[i] = std::max({grid[i][0], grid[i][1], grid[i][2]});
  }
  std::vector<std::size_t> out(grid.size());
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      std::size_t best = 0;
      double best_value = 0.0;
      bool found = false;
      for (int yy = std::max(0, y - r); yy <= std::min(height - 1, y + r); ++yy) {
        for (int xx = std::max(0, x - r); xx <= std::min(width - 1, x + r); ++xx) {
          const std::size_t j = static_cast<std::size_t>(yy) * width + xx;
          if (!found || value[j] > best_value) {
            best = j;
            best_value = value[j];
            found = true;
          }
        }
      }
      out[static_cast<std::size_t>(y) * width + x] = best;
    }
  }
  return out;
}

std::vector<Rgb> brightest_dilate(std::span<const Rgb> grid, int width, int height, int window) {
  const auto sources = brightest_sources(grid, width, height, window);
  std::vector<Rgb> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = grid[sources[i]];
  return out;
}

}  // namespace sparseview
