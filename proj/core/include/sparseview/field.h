#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sparseview/radiance.h"
#include "sparseview/tape.h"
#include "sparseview/tensor.h"

namespace sparseview {

using Rgb = std::array<double, 3>;
using Vec3 = std::array<double, 3>;

struct FieldArchitecture {
  int trunk_layers = 4;
  int trunk_width = 64;
  int position_frequencies = 6;
  int direction_frequencies = 2;
  // Positions are multiplied by this before encoding so the render volume
  // falls inside one period of the lowest frequency.
  double position_scale = 0.5;

  std::size_t encoded_position_width() const { return 3 + 6 * static_cast<std::size_t>(position_frequencies); }
  std::size_t encoded_direction_width() const { return 3 + 6 * static_cast<std::size_t>(direction_frequencies); }
  void validate() const;

  friend bool operator==(const FieldArchitecture&, const FieldArchitecture&) = default;
};

// (x, sin(2^0 pi x), cos(2^0 pi x), ..., sin(2^{L-1} pi x), cos(2^{L-1} pi x)),
// each term applied to all three components. Output length 3 + 6L.
std::vector<double> positional_encode(const Vec3& x, int frequencies);
void positional_encode(const double* x, int frequencies, double* out);

// Radiance field MLP weights. Layers: trunk.0..trunk.{k-1} (relu), head.sigma
// (softplus, fed by the trunk), head.rgb (sigmoid, fed by trunk ++ encoded dir).
class FieldParams {
 public:
  FieldParams(FieldArchitecture arch, ParameterStore store);

  static FieldParams initialize(const FieldArchitecture& arch, std::uint64_t seed);

  static std::string weight_name(const std::string& layer) { return layer + ".weight"; }
  static std::string bias_name(const std::string& layer) { return layer + ".bias"; }

  const FieldArchitecture& architecture() const noexcept { return arch_; }
  const ParameterStore& store() const noexcept { return store_; }
  ParameterStore& store() noexcept { return store_; }
  std::vector<std::string> layer_names() const;
  bool same_architecture(const FieldParams& other) const;

  friend bool operator==(const FieldParams&, const FieldParams&) = default;

 private:
  FieldArchitecture arch_;
  ParameterStore store_;
};

std::vector<std::string> layer_names_for(const FieldArchitecture& arch);

// Inverted dropout on trunk activations. Masks are derived from (seed, sample
// key, layer), so they do not depend on how samples are batched.
struct DropoutSpec {
  double ratio = 0.0;
  std::uint64_t seed = 0;
};

// Adds weight * eps to the input features of each target layer, eps drawn
// per feature element from `noise`, keyed per sample point.
struct LayerNoiseSpec {
  std::vector<std::string> targets{"head.rgb", "head.sigma"};
  double weight = 0.0;
  const NoiseSource* noise = nullptr;
};

struct FieldAugment {
  std::optional<DropoutSpec> dropout;
  std::optional<LayerNoiseSpec> layer_noise;
};

struct FieldQuery {
  std::span<const double> points;  // [P x 3]
  std::span<const double> dirs;    // [P x 3], unit length
  std::span<const std::uint64_t> keys;
};

struct FieldVars {
  Var rgb;    // [P x 3]
  Var sigma;  // [P x 1]
};

// Records the field on `tape`. With trainable set, weights become named
// parameter leaves; otherwise they are constants.
FieldVars record_field(Tape& tape, const FieldParams& params, const FieldQuery& query,
                       const FieldAugment& augment, bool trainable);

struct FieldSample {
  Rgb rgb{};
  double sigma = 0.0;
};

// Single point query. Rejects directions that are not unit length.
FieldSample evaluate_field(const FieldParams& params, const Vec3& point, const Vec3& dir,
                           const FieldAugment& augment = {}, std::uint64_t key = 0);

// Adapts a frozen field (plus optional augmentation) to the renderer.
class FieldSource final : public RadianceSource {
 public:
  explicit FieldSource(const FieldParams& params, FieldAugment augment = {})
      : params_(&params), augment_(std::move(augment)) {}

  void evaluate(std::span<const double> points, std::span<const double> dirs,
                std::span<const std::uint64_t> keys, std::span<double> rgb,
                std::span<double> sigma) const override;

 private:
  const FieldParams* params_;
  FieldAugment augment_;
};

struct SensitivityReport {
  std::vector<std::string> layers;  // architecture order
  std::vector<double> scores;       // parallel to layers
  std::vector<std::string> ranking;  // descending score, ties in layer order

  double score(const std::string& layer) const;
};

// Per layer: mean over that layer's parameters of the population variance
// across the given settings.
SensitivityReport layer_sensitivity(std::span<const FieldParams> settings);

// teacher <- m * teacher + (1 - m) * student, for every parameter.
void ema_update(FieldParams& teacher, const FieldParams& student, double momentum);

}  // namespace sparseview
