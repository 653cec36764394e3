#include "sparseview/confidence.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

#include "sparseview/color.h"
#include "sparseview/rng.h"

namespace sparseview {
namespace {

// ceil(fraction * total) with a small guard so that e.g. 0.05 * 100 is 5.
std::size_t fraction_count(double fraction, std::size_t total) {
  const double raw = fraction * static_cast<double>(total);
  const double c = std::ceil(raw - 1e-9 * std::max(1.0, raw));
  return std::min(total, static_cast<std::size_t>(std::max(0.0, c)));
}

// Indices sorted by descending score; stable, so ties keep row-major order.
std::vector<std::size_t> rank_by_score(std::span<const double> scores,
                                       std::vector<std::size_t> candidates) {
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return candidates;
}

}  // namespace

void EnsembleConfig::validate() const {
  if (ratios.empty()) throw std::invalid_argument("EnsembleConfig: no dropout ratios");
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (!(ratios[i] >= 0.0 && ratios[i] < 1.0)) {
      throw std::invalid_argument("EnsembleConfig: dropout ratio outside [0, 1)");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (ratios[i] == ratios[j]) {
        throw std::invalid_argument("EnsembleConfig: dropout ratios must be distinct");
      }
    }
  }
}

std::vector<ImageBuffer> render_ensemble(const FieldParams& teacher, const Camera& camera,
                                         const EnsembleConfig& config,
                                         const RenderConfig& render) {
  config.validate();
  std::vector<ImageBuffer> stack;
  stack.reserve(config.ratios.size());
  for (std::size_t i = 0; i < config.ratios.size(); ++i) {
    FieldAugment augment;
    if (config.ratios[i] > 0.0) {
      augment.dropout = DropoutSpec{config.ratios[i], mix_seed({config.dropout_seed, i})};
    }
    stack.push_back(render_image(FieldSource(teacher, augment), camera, render).image);
  }
  return stack;
}

std::vector<double> epistemic_map(std::span<const ImageBuffer> stack) {
  if (stack.size() < 2) throw std::invalid_argument("epistemic_map: need at least two renders");
  for (const auto& img : stack) {
    if (!img.same_dims(stack[0])) throw std::invalid_argument("epistemic_map: dims differ");
  }
  const std::size_t pixels = stack[0].pixel_count();
  const double n = static_cast<double>(stack.size());
  std::vector<double> scores(pixels);
  std::vector<double> column(stack.size());
  for (std::size_t p = 0; p < pixels; ++p) {
    double channel_total = 0.0;
    for (int c = 0; c < 3; ++c) {
      for (std::size_t k = 0; k < stack.size(); ++k) column[k] = stack[k].values()[3 * p + c];
      // Sorting first makes the result independent of stack order.
      std::sort(column.begin(), column.end());
      // Deviations from the smallest value keep an all-equal column exactly 0.
      double mean = 0.0;
      for (double v : column) mean += v - column[0];
      mean /= n;
      double var = 0.0;
      for (double v : column) var += (v - column[0] - mean) * (v - column[0] - mean);
      channel_total += var / n;
    }
    scores[p] = -(channel_total / 3.0);
  }
  return scores;
}

ImageBuffer ensemble_mean(std::span<const ImageBuffer> stack) {
  if (stack.empty()) throw std::invalid_argument("ensemble_mean: empty stack");
  ImageBuffer out(stack[0].width(), stack[0].height());
  for (const auto& img : stack) {
    if (!img.same_dims(out)) throw std::invalid_argument("ensemble_mean: dims differ");
    for (std::size_t i = 0; i < out.values().size(); ++i) out.values()[i] += img.values()[i];
  }
  for (double& v : out.values()) v /= static_cast<double>(stack.size());
  return out;
}

void HsvThresholds::validate() const {
  if (!(v_lower >= 0.0 && v_lower <= 1.0 && s_lower >= 0.0 && s_lower <= 1.0)) {
    throw std::invalid_argument("HsvThresholds: thresholds must lie in [0, 1]");
  }
}

std::vector<std::uint8_t> hsv_mask(const ImageBuffer& image, const HsvThresholds& thresholds) {
  thresholds.validate();
  std::vector<std::uint8_t> mask(image.pixel_count());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    Rgb c = image.pixel(i);
    for (double& v : c) v = std::clamp(v, 0.0, 1.0);
    const Hsv hsv = rgb_to_hsv(c);
    mask[i] = hsv.v >= thresholds.v_lower && hsv.s >= thresholds.s_lower;
  }
  return mask;
}

bool PseudoLabelSet::contains(const Pixel& p) const {
  return std::any_of(labels.begin(), labels.end(), [&](const PseudoLabel& l) { return l.pixel == p; });
}

std::vector<std::size_t> PseudoLabelSet::pixel_indices() const {
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (const auto& l : labels) {
    out.push_back(static_cast<std::size_t>(l.pixel.y) * camera.width + l.pixel.x);
  }
  return out;
}

PseudoLabelSet select_pseudo(std::span<const double> scores, std::span<const std::uint8_t> hsv_pass,
                             const ImageBuffer& render, const Camera& camera, double kappa,
                             double low_contrast_share) {
  if (!(kappa > 0.0 && kappa <= 1.0)) throw std::invalid_argument("select_pseudo: kappa must lie in (0, 1]");
  if (!(low_contrast_share >= 0.0 && low_contrast_share <= 1.0)) {
    throw std::invalid_argument("select_pseudo: low-contrast share must lie in [0, 1]");
  }
  const std::size_t total = scores.size();
  if (hsv_pass.size() != total || render.pixel_count() != total ||
      static_cast<std::size_t>(camera.width) * camera.height != total) {
    throw std::invalid_argument("select_pseudo: scores, mask, render and camera dims disagree");
  }

  std::vector<std::size_t> all(total), failing;
  std::iota(all.begin(), all.end(), std::size_t{0});
  for (std::size_t i = 0; i < total; ++i) {
    if (!hsv_pass[i]) failing.push_back(i);
  }

  std::vector<std::uint8_t> chosen(total, 0);
  if (failing.empty()) {
    const auto ranked = rank_by_score(scores, all);
    for (std::size_t k = 0; k < fraction_count(kappa, total); ++k) chosen[ranked[k]] = 1;
  } else {
    const std::size_t global = fraction_count((1.0 - low_contrast_share) * kappa, total);
    const std::size_t low = std::min(failing.size(), fraction_count(low_contrast_share * kappa, total));
    const auto ranked = rank_by_score(scores, all);
    for (std::size_t k = 0; k < global; ++k) chosen[ranked[k]] = 1;
    const auto ranked_low = rank_by_score(scores, failing);
    for (std::size_t k = 0; k < low; ++k) chosen[ranked_low[k]] = 1;
  }

  PseudoLabelSet set;
  set.camera = camera;
  set.kappa = kappa;
  for (std::size_t i = 0; i < total; ++i) {
    if (!chosen[i]) continue;
    const int x = static_cast<int>(i % static_cast<std::size_t>(camera.width));
    const int y = static_cast<int>(i / static_cast<std::size_t>(camera.width));
    set.labels.push_back({{x, y}, render.pixel(i)});
  }
  return set;
}

double map_similarity(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  std::vector<std::size_t> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  sa.erase(std::unique(sa.begin(), sa.end()), sa.end());
  std::sort(sb.begin(), sb.end());
  sb.erase(std::unique(sb.begin(), sb.end()), sb.end());
  if (sa.empty() && sb.empty()) return 1.0;
  std::vector<std::size_t> common;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(common));
  const std::size_t uni = sa.size() + sb.size() - common.size();
  return static_cast<double>(common.size()) / static_cast<double>(uni);
}

void write_pseudo_labels(const std::filesystem::path& path, const PseudoLabelSet& set) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << "# format_version=1\n";
  out << std::setprecision(17);
  for (const auto& l : set.labels) {
    out << l.pixel.x << ' ' << l.pixel.y << ' ' << l.rgb[0] << ' ' << l.rgb[1] << ' ' << l.rgb[2]
        << '\n';
  }
}

std::vector<PseudoLabel> read_pseudo_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != "# format_version=1") {
    throw std::runtime_error("pseudo labels: missing or unsupported format version");
  }
  std::vector<PseudoLabel> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    PseudoLabel l;
    if (!(row >> l.pixel.x >> l.pixel.y >> l.rgb[0] >> l.rgb[1] >> l.rgb[2])) {
      throw std::runtime_error("pseudo labels: malformed row '" + line + "'");
    }
    out.push_back(l);
  }
  return out;
}

}  // namespace sparseview
