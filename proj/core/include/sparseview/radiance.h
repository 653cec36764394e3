#pragma once

#include <cstdint>
#include <span>

namespace sparseview {

// Something that can be queried for color and density at sample points.
// Implemented by the learned field and by analytic scenes.
class RadianceSource {
 public:
  virtual ~RadianceSource() = default;

  // points and dirs are [P x 3] row-major; keys give each sample a stable
  // identity for seeded augmentations. Writes rgb [P x 3] and sigma [P].
  virtual void evaluate(std::span<const double> points, std::span<const double> dirs,
                        std::span<const std::uint64_t> keys, std::span<double> rgb,
                        std::span<double> sigma) const = 0;
};

// Deterministic keyed noise: the same key always fills the same values.
class NoiseSource {
 public:
  virtual ~NoiseSource() = default;
  virtual void fill(std::uint64_t key, std::span<double> out) const = 0;
};

}  // namespace sparseview
