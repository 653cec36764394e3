#pragma once

#include <cstdint>
#include <span>

#include "sparseview/radiance.h"
#include "sparseview/rng.h"

namespace sparseview {

// Unnormalized tau-noise density
//   P(x) = e^{e^{-x^2}} / (e^{e^{x^2}} + e^{e^{-x^2}}) = 1 / (e^{e^{x^2} - e^{-x^2}} + 1),
// evaluated in the second form so it stays finite for any x.
// P(0) = 1/2, P is even and decreasing in |x|.
double tau_pdf(double x);

// The first form, evaluated literally. Overflows for |x| beyond ~2.6.
double tau_pdf_direct(double x);

// Draws from tau_pdf restricted to [-bound, bound] by rejection against a
// uniform envelope of height 1/2 (the density's maximum).
class TauNoiseSampler {
 public:
  explicit TauNoiseSampler(double bound = 3.0);

  double bound() const noexcept { return bound_; }
  // Integral of tau_pdf over [-bound, bound] (composite Simpson, 1e5 intervals).
  double normalization() const noexcept { return normalization_; }
  double density(double x) const;  // normalized pdf on the support

  double sample(Rng& rng) const;

 private:
  double bound_;
  double normalization_;
};

// Keyed tau-noise stream: fill(key, out) draws out.size() values from a
// generator seeded by (seed, key).
class TauNoiseStream final : public NoiseSource {
 public:
  TauNoiseStream(TauNoiseSampler sampler, std::uint64_t seed) : sampler_(sampler), seed_(seed) {}

  void fill(std::uint64_t key, std::span<double> out) const override;

 private:
  TauNoiseSampler sampler_;
  std::uint64_t seed_;
};

}  // namespace sparseview
