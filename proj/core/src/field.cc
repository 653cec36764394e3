#include "sparseview/field.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sparseview/rng.h"

namespace sparseview {
namespace {

struct LayerShape {
  std::string name;
  std::size_t in;
  std::size_t out;
};

std::vector<LayerShape> layer_shapes(const FieldArchitecture& arch) {
  std::vector<LayerShape> out;
  const auto width = static_cast<std::size_t>(arch.trunk_width);
  for (int i = 0; i < arch.trunk_layers; ++i) {
    out.push_back({"trunk." + std::to_string(i), i == 0 ? arch.encoded_position_width() : width,
                   width});
  }
  out.push_back({"head.sigma", width, 1});
  out.push_back({"head.rgb", width + arch.encoded_direction_width(), 3});
  return out;
}

NumericArray noise_features(const NoiseSource& noise, double weight, std::uint64_t layer_tag,
                            std::span<const std::uint64_t> keys, std::size_t width) {
  NumericArray out({keys.size(), width});
  for (std::size_t p = 0; p < keys.size(); ++p) {
    std::span<double> row(out.data() + p * width, width);
    noise.fill(mix_seed({keys[p], layer_tag}), row);
    for (double& v : row) v *= weight;
  }
  return out;
}

NumericArray dropout_mask(const DropoutSpec& spec, std::uint64_t layer,
                          std::span<const std::uint64_t> keys, std::size_t width) {
  NumericArray mask({keys.size(), width});
  const double keep_scale = 1.0 / (1.0 - spec.ratio);
  for (std::size_t p = 0; p < keys.size(); ++p) {
    Rng rng(mix_seed({spec.seed, keys[p], layer}));
    for (std::size_t u = 0; u < width; ++u) {
      mask(p, u) = rng.uniform() < spec.ratio ? 0.0 : keep_scale;
    }
  }
  return mask;
}

}  // namespace

void FieldArchitecture::validate() const {
  if (trunk_layers < 1 || trunk_width < 1 || position_frequencies < 0 ||
      direction_frequencies < 0 || !(position_scale > 0.0)) {
    throw std::invalid_argument("invalid field architecture");
  }
}

void positional_encode(const double* x, int frequencies, double* out) {
  if (frequencies < 0) throw std::invalid_argument("positional_encode: negative frequency count");
  out[0] = x[0];
  out[1] = x[1];
  out[2] = x[2];
  double scale = std::numbers::pi;
  for (int l = 0; l < frequencies; ++l) {
    double* s = out + 3 + 6 * l;
    for (int c = 0; c < 3; ++c) {
      s[c] = std::sin(scale * x[c]);
      s[3 + c] = std::cos(scale * x[c]);
    }
    scale *= 2.0;
  }
}

std::vector<double> positional_encode(const Vec3& x, int frequencies) {
  if (frequencies < 0) throw std::invalid_argument("positional_encode: negative frequency count");
  std::vector<double> out(3 + 6 * static_cast<std::size_t>(frequencies));
  positional_encode(x.data(), frequencies, out.data());
  return out;
}

std::vector<std::string> layer_names_for(const FieldArchitecture& arch) {
  std::vector<std::string> names;
  for (const auto& layer : layer_shapes(arch)) names.push_back(layer.name);
  return names;
}

FieldParams::FieldParams(FieldArchitecture arch, ParameterStore store)
    : arch_(arch), store_(std::move(store)) {
  arch_.validate();
  const auto shapes = layer_shapes(arch_);
  if (store_.size() != 2 * shapes.size()) {
    throw std::invalid_argument("FieldParams: expected " + std::to_string(2 * shapes.size()) +
                                " arrays, got " + std::to_string(store_.size()));
  }
  for (const auto& layer : shapes) {
    const std::string w = weight_name(layer.name), b = bias_name(layer.name);
    if (!store_.contains(w) || !store_.contains(b)) {
      throw std::invalid_argument("FieldParams: missing arrays for layer '" + layer.name + "'");
    }
    const auto& wa = store_.at(w);
    const auto& ba = store_.at(b);
    if (wa.shape() != std::vector<std::size_t>{layer.out, layer.in} ||
        ba.shape() != std::vector<std::size_t>{layer.out}) {
      throw std::invalid_argument("FieldParams: layer '" + layer.name + "' has weight " +
                                  wa.shape_string() + " bias " + ba.shape_string());
    }
  }
}

FieldParams FieldParams::initialize(const FieldArchitecture& arch, std::uint64_t seed) {
  arch.validate();
  ParameterStore store;
  Rng rng(mix_seed({seed, 0x6669656c64ULL}));
  for (const auto& layer : layer_shapes(arch)) {
    const bool trunk = layer.name.starts_with("trunk.");
    // He-uniform for relu layers, Glorot-uniform for the heads.
    const double limit = trunk ? std::sqrt(6.0 / static_cast<double>(layer.in))
                               : std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
    NumericArray w({layer.out, layer.in});
    for (double& v : w.values()) v = rng.uniform(-limit, limit);
    store.add(weight_name(layer.name), std::move(w));
    store.add(bias_name(layer.name), NumericArray({layer.out}, 0.0));
  }
  return FieldParams(arch, std::move(store));
}

std::vector<std::string> FieldParams::layer_names() const { return layer_names_for(arch_); }

bool FieldParams::same_architecture(const FieldParams& other) const {
  return arch_ == other.arch_ && store_.same_layout(other.store_);
}

FieldVars record_field(Tape& tape, const FieldParams& params, const FieldQuery& query,
                       const FieldAugment& augment, bool trainable) {
  const FieldArchitecture& arch = params.architecture();
  const std::size_t count = query.keys.size();
  if (query.points.size() != 3 * count || query.dirs.size() != 3 * count) {
    throw std::invalid_argument("record_field: points/dirs/keys sizes disagree");
  }
  if (augment.dropout && !(augment.dropout->ratio >= 0.0 && augment.dropout->ratio < 1.0)) {
    throw std::invalid_argument("record_field: dropout ratio must lie in [0, 1)");
  }
  const LayerNoiseSpec* noise = nullptr;
  if (augment.layer_noise && augment.layer_noise->weight != 0.0) {
    noise = &*augment.layer_noise;
    if (noise->weight < 0.0) throw std::invalid_argument("record_field: negative noise weight");
    if (!noise->noise) throw std::invalid_argument("record_field: layer noise has no source");
    const auto names = params.layer_names();
    for (const auto& t : noise->targets) {
      if (std::find(names.begin(), names.end(), t) == names.end()) {
        throw std::invalid_argument("record_field: unknown noise target layer '" + t + "'");
      }
    }
  }

  const std::size_t pos_width = arch.encoded_position_width();
  const std::size_t dir_width = arch.encoded_direction_width();
  NumericArray pos_enc({count, pos_width});
  NumericArray dir_enc({count, dir_width});
  for (std::size_t p = 0; p < count; ++p) {
    const double scaled[3] = {query.points[3 * p] * arch.position_scale,
                              query.points[3 * p + 1] * arch.position_scale,
                              query.points[3 * p + 2] * arch.position_scale};
    positional_encode(scaled, arch.position_frequencies, pos_enc.data() + p * pos_width);
    positional_encode(query.dirs.data() + 3 * p, arch.direction_frequencies,
                      dir_enc.data() + p * dir_width);
  }

  auto leaf = [&](const std::string& name) {
    const NumericArray& v = params.store().at(name);
    return trainable ? tape.parameter(name, v) : tape.constant(v);
  };
  auto layer_input = [&](Var x, const std::string& layer, std::uint64_t tag) {
    if (!noise) return x;
    if (std::find(noise->targets.begin(), noise->targets.end(), layer) == noise->targets.end()) {
      return x;
    }
    const std::size_t width = tape.value(x).cols();
    return add(tape, x, tape.constant(noise_features(*noise->noise, noise->weight, tag,
                                                     query.keys, width)));
  };
  auto dense = [&](Var x, const std::string& layer, std::uint64_t tag) {
    x = layer_input(x, layer, tag);
    return affine(tape, x, leaf(FieldParams::weight_name(layer)),
                  leaf(FieldParams::bias_name(layer)));
  };

  Var h = tape.constant(std::move(pos_enc));
  for (int l = 0; l < arch.trunk_layers; ++l) {
    h = activate(tape, dense(h, "trunk." + std::to_string(l), static_cast<std::uint64_t>(l)),
                 Activation::kRelu);
    if (augment.dropout && augment.dropout->ratio > 0.0) {
      h = multiply(tape, h,
                   tape.constant(dropout_mask(*augment.dropout, static_cast<std::uint64_t>(l),
                                              query.keys, static_cast<std::size_t>(arch.trunk_width))));
    }
  }
  const auto head_tag = static_cast<std::uint64_t>(arch.trunk_layers);
  Var sigma = activate(tape, dense(h, "head.sigma", head_tag), Activation::kSoftplus);
  Var rgb_in = concat_columns(tape, h, tape.constant(std::move(dir_enc)));
  Var rgb = activate(tape, dense(rgb_in, "head.rgb", head_tag + 1), Activation::kSigmoid);
  return {rgb, sigma};
}

void FieldSource::evaluate(std::span<const double> points, std::span<const double> dirs,
                           std::span<const std::uint64_t> keys, std::span<double> rgb,
                           std::span<double> sigma) const {
  Tape tape;
  FieldVars vars = record_field(tape, *params_, {points, dirs, keys}, augment_, false);
  const NumericArray& c = tape.value(vars.rgb);
  const NumericArray& s = tape.value(vars.sigma);
  std::copy(c.values().begin(), c.values().end(), rgb.begin());
  std::copy(s.values().begin(), s.values().end(), sigma.begin());
}

FieldSample evaluate_field(const FieldParams& params, const Vec3& point, const Vec3& dir,
                           const FieldAugment& augment, std::uint64_t key) {
  const double norm = std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]);
  if (std::abs(norm - 1.0) > 1e-9) {
    throw std::invalid_argument("evaluate_field: direction is not unit length (norm " +
                                std::to_string(norm) + ")");
  }
  FieldSample out;
  FieldSource(params, augment)
      .evaluate(point, dir, std::span<const std::uint64_t>(&key, 1), out.rgb,
                std::span<double>(&out.sigma, 1));
  return out;
}

double SensitivityReport::score(const std::string& layer) const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i] == layer) return scores[i];
  }
  throw std::out_of_range("SensitivityReport: no layer '" + layer + "'");
}

SensitivityReport layer_sensitivity(std::span<const FieldParams> settings) {
  if (settings.size() < 2) {
    throw std::invalid_argument("layer_sensitivity: need at least two parameter sets");
  }
  for (const auto& s : settings.subspan(1)) {
    if (!s.same_architecture(settings[0])) {
      throw std::invalid_argument("layer_sensitivity: architecture mismatch between settings");
    }
  }
  SensitivityReport report;
  report.layers = settings[0].layer_names();
  const double n = static_cast<double>(settings.size());
  for (const auto& layer : report.layers) {
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& name : {FieldParams::weight_name(layer), FieldParams::bias_name(layer)}) {
      std::vector<const NumericArray*> arrays;
      for (const auto& s : settings) arrays.push_back(&s.store().at(name));
      const std::size_t size = arrays[0]->size();
      for (std::size_t i = 0; i < size; ++i) {
        const double shift = (*arrays[0])[i];
        double mean = 0.0;
        for (const NumericArray* a : arrays) mean += (*a)[i] - shift;
        mean /= n;
        double var = 0.0;
        for (const NumericArray* a : arrays) {
          const double d = (*a)[i] - shift - mean;
          var += d * d;
        }
        total += var / n;
      }
      count += size;
    }
    report.scores.push_back(total / static_cast<double>(count));
  }
  std::vector<std::size_t> order(report.layers.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return report.scores[a] > report.scores[b];
  });
  for (std::size_t i : order) report.ranking.push_back(report.layers[i]);
  return report;
}

void ema_update(FieldParams& teacher, const FieldParams& student, double momentum) {
  if (!(momentum >= 0.0 && momentum <= 1.0)) {
    throw std::invalid_argument("ema_update: momentum must lie in [0, 1]");
  }
  if (!teacher.same_architecture(student)) {
    throw std::invalid_argument("ema_update: teacher and student architectures differ");
  }
  auto s = student.store().begin();
  for (auto& [name, array] : teacher.store()) {
    auto dst = array.values();
    auto src = s->second.values();
    for (std::size_t i = 0; i < dst.size(); ++i) {
      dst[i] = momentum * dst[i] + (1.0 - momentum) * src[i];
    }
    ++s;
  }
}

}  // namespace sparseview
