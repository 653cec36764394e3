#include "sparseview/robustness.h"

#include <stdexcept>

#include "sparseview/metrics.h"

namespace sparseview {

RobustnessReport robustness_report(const RadianceSource& field, std::span<const Camera> cameras,
                                   std::span<const ImageBuffer> references, double amplitude,
                                   const RenderConfig& render, std::uint64_t noise_seed) {
  if (!(amplitude >= 0.0)) throw std::invalid_argument("robustness_report: amplitude must be >= 0");
  if (cameras.size() != references.size() || cameras.empty()) {
    throw std::invalid_argument("robustness_report: need one reference image per camera");
  }
  RobustnessReport report;
  report.amplitude = amplitude;
  for (std::size_t i = 0; i < cameras.size(); ++i) {
    const ImageBuffer clean = render_image(field, cameras[i], render).image;
    RobustnessRow row;
    row.clean_psnr = psnr(clean, references[i]);
    if (amplitude == 0.0) {
      row.noisy_psnr = row.clean_psnr;
    } else {
      RenderAugment augment;
      augment.density = {amplitude, mix_seed({noise_seed, i})};
      row.noisy_psnr = psnr(render_image(field, cameras[i], render, augment).image, references[i]);
    }
    report.views.push_back(row);
    report.mean_clean += row.clean_psnr;
    report.mean_noisy += row.noisy_psnr;
  }
  report.mean_clean /= static_cast<double>(cameras.size());
  report.mean_noisy /= static_cast<double>(cameras.size());
  return report;
}

}  // namespace sparseview
