#include "sparseview/renderer.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

#include "sparseview/parallel.h"

namespace sparseview {
namespace {

constexpr std::uint64_t kWeightNoiseTag = 0x77656967687473ULL;
constexpr std::uint64_t kDensityNoiseTag = 0x64656e73697479ULL;

// Fused volume compositing over R rays of N samples each.
// Inputs: rgb [R*N x 3], sigma [R*N x 1]. Output: [R x 3].
class CompositeOp final : public Op {
 public:
  CompositeOp(std::size_t rays, std::size_t samples, std::vector<double> deltas,
              std::vector<double> weight_noise, bool clamp, Rgb background)
      : rays_(rays),
        samples_(samples),
        deltas_(std::move(deltas)),
        weight_noise_(std::move(weight_noise)),
        clamp_(clamp),
        background_(background) {}

  std::string_view kind() const override { return "composite"; }

  NumericArray forward(std::span<const NumericArray* const> in) const override {
    const NumericArray& rgb = *in[0];
    const NumericArray& sigma = *in[1];
    NumericArray out({rays_, 3});
    for (std::size_t r = 0; r < rays_; ++r) {
      double acc = 0.0;
      double c[3] = {0.0, 0.0, 0.0};
      for (std::size_t i = 0; i < samples_; ++i) {
        const std::size_t k = r * samples_ + i;
        const double optical = sigma[k] * deltas_[k];
        const double w = std::exp(-acc) * (1.0 - std::exp(-optical));
        const double wp = perturbed(w, k);
        for (int ch = 0; ch < 3; ++ch) c[ch] += wp * rgb(k, ch);
        acc += optical;
      }
      const double t_final = std::exp(-acc);
      for (int ch = 0; ch < 3; ++ch) out(r, ch) = c[ch] + t_final * background_[ch];
    }
    return out;
  }

  void backward(std::span<const NumericArray* const> in, const NumericArray&,
                const NumericArray& dy, std::span<NumericArray* const> grads) const override {
    const NumericArray& rgb = *in[0];
    const NumericArray& sigma = *in[1];
    std::vector<double> w(samples_), t_next(samples_), gw(samples_);
    for (std::size_t r = 0; r < rays_; ++r) {
      const double g[3] = {dy(r, 0), dy(r, 1), dy(r, 2)};
      double acc = 0.0;
      for (std::size_t i = 0; i < samples_; ++i) {
        const std::size_t k = r * samples_ + i;
        const double optical = sigma[k] * deltas_[k];
        w[i] = std::exp(-acc) * (1.0 - std::exp(-optical));
        acc += optical;
        t_next[i] = std::exp(-acc);
        const double raw = noisy(w[i], k);
        const bool active = !clamp_ || raw >= 0.0;
        const double wp = clamp_ ? std::max(0.0, raw) : raw;
        gw[i] = active ? g[0] * rgb(k, 0) + g[1] * rgb(k, 1) + g[2] * rgb(k, 2) : 0.0;
        if (grads[0]) {
          for (int ch = 0; ch < 3; ++ch) (*grads[0])(k, ch) += g[ch] * wp;
        }
      }
      if (!grads[1]) continue;
      const double g_background =
          t_next[samples_ - 1] * (g[0] * background_[0] + g[1] * background_[1] + g[2] * background_[2]);
      double later = 0.0;  // sum_{i>k} w_i G_i
      for (std::size_t i = samples_; i-- > 0;) {
        const std::size_t k = r * samples_ + i;
        (*grads[1])[k] += deltas_[k] * (t_next[i] * gw[i] - later - g_background);
        later += w[i] * gw[i];
      }
    }
  }

 private:
  double noisy(double w, std::size_t k) const {
    return weight_noise_.empty() ? w : w + weight_noise_[k];
  }
  double perturbed(double w, std::size_t k) const {
    const double raw = noisy(w, k);
    return clamp_ && !weight_noise_.empty() ? std::max(0.0, raw) : raw;
  }

  std::size_t rays_;
  std::size_t samples_;
  std::vector<double> deltas_;
  std::vector<double> weight_noise_;  // omega * eps, or empty
  bool clamp_;
  Rgb background_;
};

struct ChunkSamples {
  std::vector<double> points;
  std::vector<double> dirs;
  std::vector<std::uint64_t> keys;
  std::vector<double> deltas;
  std::vector<double> depths;
};

ChunkSamples sample_chunk(std::span<const Ray> rays, const RenderConfig& config) {
  const auto n = static_cast<std::size_t>(config.samples);
  ChunkSamples s;
  s.points.resize(rays.size() * n * 3);
  s.dirs.resize(rays.size() * n * 3);
  s.keys.resize(rays.size() * n);
  s.deltas.resize(rays.size() * n);
  s.depths.resize(rays.size() * n);
  for (std::size_t r = 0; r < rays.size(); ++r) {
    const Ray& ray = rays[r];
    Rng rng(mix_seed({config.seed, ray.id}));
    const SampleDepths d =
        stratified_sample(config.near, config.far, config.samples, config.jitter ? &rng : nullptr);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = r * n + i;
      for (int c = 0; c < 3; ++c) {
        s.points[3 * k + c] = ray.origin[c] + d.depths[i] * ray.direction[c];
        s.dirs[3 * k + c] = ray.direction[c];
      }
      s.keys[k] = sample_key(ray.id, static_cast<int>(i));
      s.deltas[k] = d.deltas[i];
      s.depths[k] = d.depths[i];
    }
  }
  return s;
}

}  // namespace

std::uint64_t weight_noise_key(std::uint64_t ray_id) { return mix_seed({ray_id, kWeightNoiseTag}); }

std::uint64_t sample_key(std::uint64_t ray_id, int sample) {
  return mix_seed({ray_id, static_cast<std::uint64_t>(sample)});
}

void RenderConfig::validate() const {
  if (samples < 1) throw std::invalid_argument("RenderConfig: need at least one sample per ray");
  if (!(near >= 0.0) || !(near < far)) {
    throw std::invalid_argument("RenderConfig: require 0 <= near < far, got near=" +
                                std::to_string(near) + " far=" + std::to_string(far));
  }
  if (rays_per_chunk == 0) throw std::invalid_argument("RenderConfig: rays_per_chunk must be > 0");
}

SampleDepths stratified_sample(double near, double far, int count, Rng* jitter) {
  if (count < 1) throw std::invalid_argument("stratified_sample: count must be >= 1");
  if (!(near >= 0.0) || !(near < far)) {
    throw std::invalid_argument("stratified_sample: require 0 <= near < far");
  }
  const auto n = static_cast<std::size_t>(count);
  const double width = (far - near) / static_cast<double>(count);
  SampleDepths out;
  out.depths.resize(n);
  out.deltas.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = jitter ? jitter->uniform() : 0.5;
    out.depths[i] = near + (static_cast<double>(i) + u) * width;
  }
  for (std::size_t i = 0; i + 1 < n; ++i) out.deltas[i] = out.depths[i + 1] - out.depths[i];
  out.deltas[n - 1] = far - out.depths[n - 1];
  return out;
}

CompositeWeights compute_weights(std::span<const double> sigmas, std::span<const double> deltas) {
  if (sigmas.size() != deltas.size()) {
    throw std::invalid_argument("compute_weights: sigma and delta counts differ");
  }
  CompositeWeights out;
  out.transmittance.resize(sigmas.size());
  out.weights.resize(sigmas.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    if (!(sigmas[i] >= 0.0)) {
      throw std::invalid_argument("compute_weights: negative density at sample " +
                                  std::to_string(i));
    }
    if (!(deltas[i] > 0.0)) {
      throw std::invalid_argument("compute_weights: non-positive spacing at sample " +
                                  std::to_string(i));
    }
    const double optical = sigmas[i] * deltas[i];
    out.transmittance[i] = std::exp(-acc);
    out.weights[i] = out.transmittance[i] * (1.0 - std::exp(-optical));
    acc += optical;
  }
  out.final_transmittance = std::exp(-acc);
  return out;
}

Rgb composite(const RaySampleBatch& batch, const Rgb& background, const WeightPerturbSpec* perturb,
              std::uint64_t noise_key) {
  const std::size_t n = batch.weights.size();
  if (batch.colors.size() != n) throw std::invalid_argument("composite: colors/weights mismatch");
  std::vector<double> eps;
  const bool noisy = perturb && perturb->omega != 0.0;
  if (noisy) {
    if (!perturb->noise) throw std::invalid_argument("composite: weight perturbation has no source");
    eps.resize(n);
    perturb->noise->fill(noise_key, eps);
  }
  Rgb c{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    double w = batch.weights[i];
    if (noisy) {
      w += perturb->omega * eps[i];
      if (perturb->clamp) w = std::max(0.0, w);
    }
    for (int ch = 0; ch < 3; ++ch) c[ch] += w * batch.colors[i][ch];
  }
  for (int ch = 0; ch < 3; ++ch) c[ch] += batch.final_transmittance * background[ch];
  return c;
}

RayColors render_rays(const RadianceSource& source, std::span<const Ray> rays,
                      const RenderConfig& config, const RenderAugment& augment) {
  config.validate();
  if (augment.density.amplitude < 0.0) {
    throw std::invalid_argument("render_rays: density noise amplitude must be >= 0");
  }
  RayColors out;
  out.colors.resize(rays.size());
  out.summary.resize(rays.size());
  const std::size_t chunk = config.rays_per_chunk;
  const std::size_t chunks = (rays.size() + chunk - 1) / chunk;
  const auto n = static_cast<std::size_t>(config.samples);

  parallel_for(chunks, [&](std::size_t c) {
    const auto part = rays.subspan(c * chunk, std::min(chunk, rays.size() - c * chunk));
    const ChunkSamples s = sample_chunk(part, config);
    std::vector<double> rgb(s.keys.size() * 3), sigma(s.keys.size());
    source.evaluate(s.points, s.dirs, s.keys, rgb, sigma);

    RaySampleBatch batch;
    for (std::size_t r = 0; r < part.size(); ++r) {
      const Ray& ray = part[r];
      const std::size_t base = r * n;
      batch.depths.assign(s.depths.begin() + base, s.depths.begin() + base + n);
      batch.deltas.assign(s.deltas.begin() + base, s.deltas.begin() + base + n);
      batch.sigmas.assign(sigma.begin() + base, sigma.begin() + base + n);
      batch.colors.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        batch.colors[i] = {rgb[3 * (base + i)], rgb[3 * (base + i) + 1], rgb[3 * (base + i) + 2]};
      }
      if (augment.density.amplitude > 0.0) {
        Rng noise(mix_seed({augment.density.seed, ray.id, kDensityNoiseTag}));
        const double a = augment.density.amplitude;
        for (double& sg : batch.sigmas) sg = std::max(0.0, sg + noise.uniform(-a, a));
      }
      const CompositeWeights w = compute_weights(batch.sigmas, batch.deltas);
      batch.transmittance = w.transmittance;
      batch.weights = w.weights;
      batch.final_transmittance = w.final_transmittance;

      const std::size_t index = c * chunk + r;
      out.colors[index] =
          composite(batch, config.background, &augment.weight, weight_noise_key(ray.id));
      RaySummary& summary = out.summary[index];
      summary.final_transmittance = w.final_transmittance;
      for (std::size_t i = 0; i < n; ++i) {
        summary.weight_sum += w.weights[i];
        summary.expected_depth += w.weights[i] * batch.depths[i];
      }
    }
  });
  return out;
}

RenderResult render_image(const RadianceSource& source, const Camera& camera,
                          const RenderConfig& config, const RenderAugment& augment) {
  const std::vector<Ray> rays = generate_rays(camera);
  RayColors colors = render_rays(source, rays, config, augment);
  RenderResult result;
  result.raw = ImageBuffer(camera.width, camera.height);
  result.image = ImageBuffer(camera.width, camera.height);
  for (std::size_t i = 0; i < rays.size(); ++i) {
    const Rgb& c = colors.colors[i];
    result.raw.set_pixel(i, c);
    result.image.set_pixel(i, {std::clamp(c[0], 0.0, 1.0), std::clamp(c[1], 0.0, 1.0),
                               std::clamp(c[2], 0.0, 1.0)});
  }
  result.summary = std::move(colors.summary);
  return result;
}

Var record_rays(Tape& tape, const FieldParams& params, std::span<const Ray> rays,
                const RenderConfig& config, const FieldAugment& field_augment,
                const WeightPerturbSpec& weight_perturb, bool trainable) {
  config.validate();
  const ChunkSamples s = sample_chunk(rays, config);
  const FieldVars field = record_field(tape, params, {s.points, s.dirs, s.keys}, field_augment,
                                       trainable);
  const auto n = static_cast<std::size_t>(config.samples);
  std::vector<double> noise;
  if (weight_perturb.omega != 0.0) {
    if (!weight_perturb.noise) throw std::invalid_argument("record_rays: weight noise has no source");
    noise.resize(rays.size() * n);
    for (std::size_t r = 0; r < rays.size(); ++r) {
      std::span<double> row(noise.data() + r * n, n);
      weight_perturb.noise->fill(weight_noise_key(rays[r].id), row);
      for (double& e : row) e *= weight_perturb.omega;
    }
  }
  return tape.record(std::make_unique<CompositeOp>(rays.size(), n, s.deltas, std::move(noise),
                                                   weight_perturb.clamp, config.background),
                     {field.rgb, field.sigma});
}

}  // namespace sparseview
