#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sparseview/camera.h"
#include "sparseview/field.h"
#include "sparseview/image.h"
#include "sparseview/renderer.h"

namespace sparseview {

struct EnsembleConfig {
  std::vector<double> ratios{0.0, 0.05, 0.15, 0.20};
  std::uint64_t dropout_seed = 0;

  // Ratios must be distinct and inside [0, 1).
  void validate() const;
};

// One teacher render per dropout ratio, all with the same ray samples. The
// ratio-0 entry is the plain teacher render.
std::vector<ImageBuffer> render_ensemble(const FieldParams& teacher, const Camera& camera,
                                         const EnsembleConfig& config,
                                         const RenderConfig& render);

// Per pixel: population variance across the stack per channel, averaged over
// channels and negated, so larger means more confident. Needs >= 2 images.
std::vector<double> epistemic_map(std::span<const ImageBuffer> stack);

// Per-pixel mean of the stack.
ImageBuffer ensemble_mean(std::span<const ImageBuffer> stack);

struct HsvThresholds {
  double v_lower = 0.2;
  double s_lower = 0.2;

  void validate() const;
};

// 1 where v >= v_lower and s >= s_lower; 0 marks the dark or washed-out
// low-contrast region.
std::vector<std::uint8_t> hsv_mask(const ImageBuffer& image, const HsvThresholds& thresholds);

struct ConfidenceMap {
  int width = 0;
  int height = 0;
  std::vector<double> epistemic;
  std::vector<std::uint8_t> hsv_pass;
};

struct PseudoLabel {
  Pixel pixel;
  Rgb rgb{};
};

struct PseudoLabelSet {
  Camera camera;
  std::vector<PseudoLabel> labels;  // row-major pixel order, no duplicates
  double kappa = 0.1;

  bool contains(const Pixel& p) const;
  std::vector<std::size_t> pixel_indices() const;
};

// Top ceil((1 - share) * kappa * P) pixels by score over the whole image,
// united with the top ceil(share * kappa * P) among hsv-failing pixels. With
// no failing pixel the global top ceil(kappa * P) is used. Ties go to the
// lower row-major index; labels come from `render`.
PseudoLabelSet select_pseudo(std::span<const double> scores, std::span<const std::uint8_t> hsv_pass,
                             const ImageBuffer& render, const Camera& camera, double kappa,
                             double low_contrast_share = 0.5);

// |A n B| / |A u B| over pixel indices; 1 for two empty sets.
double map_similarity(std::span<const std::size_t> a, std::span<const std::size_t> b);

// "# format_version=1" header, then one "x y r g b" row per label.
void write_pseudo_labels(const std::filesystem::path& path, const PseudoLabelSet& set);
std::vector<PseudoLabel> read_pseudo_labels(const std::filesystem::path& path);

}  // namespace sparseview
