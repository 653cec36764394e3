#include "sparseview/config.h"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace sparseview {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(d)) {
    throw std::invalid_argument("config: key '" + key + "' expects a number, got '" + v + "'");
  }
  return d;
}

long long to_integer(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const long long n = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) {
    throw std::invalid_argument("config: key '" + key + "' expects an integer, got '" + v + "'");
  }
  return n;
}

int to_int(const std::string& key, const std::string& v) {
  const long long n = to_integer(key, v);
  if (n < std::numeric_limits<int>::min() || n > std::numeric_limits<int>::max()) {
    throw std::invalid_argument("config: key '" + key + "' is out of range");
  }
  return static_cast<int>(n);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("config: key '" + key + "' expects true or false, got '" + v + "'");
}

std::string format_double(double d) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", d);
  return buf;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

struct Key {
  std::string name;
  std::string description;
  std::function<void(RunConfig&, const std::string&)> parse;
  std::function<std::string(const RunConfig&)> format;
};

Key double_key(std::string name, std::string doc, double RunConfig::*field) {
  const std::string n = name;
  return {std::move(name), std::move(doc),
          [n, field](RunConfig& c, const std::string& v) { c.*field = to_double(n, v); },
          [field](const RunConfig& c) { return format_double(c.*field); }};
}

Key int_key(std::string name, std::string doc, int RunConfig::*field) {
  const std::string n = name;
  return {std::move(name), std::move(doc),
          [n, field](RunConfig& c, const std::string& v) { c.*field = to_int(n, v); },
          [field](const RunConfig& c) { return std::to_string(c.*field); }};
}

Key bool_key(std::string name, std::string doc, bool RunConfig::*field) {
  const std::string n = name;
  return {std::move(name), std::move(doc),
          [n, field](RunConfig& c, const std::string& v) { c.*field = to_bool(n, v); },
          [field](const RunConfig& c) { return std::string(c.*field ? "true" : "false"); }};
}

Key string_key(std::string name, std::string doc, std::string RunConfig::*field) {
  return {std::move(name), std::move(doc),
          [field](RunConfig& c, const std::string& v) { c.*field = v; },
          [field](const RunConfig& c) { return c.*field; }};
}

const std::vector<Key>& registry() {
  static const std::vector<Key> keys = [] {
    std::vector<Key> k;
    k.push_back(string_key("scene", "synthetic scene: default (two spheres and a thin box) or empty",
                           &RunConfig::scene));
    k.push_back(int_key("width", "image width in pixels", &RunConfig::width));
    k.push_back(int_key("height", "image height in pixels", &RunConfig::height));
    k.push_back(int_key("train_views", "number of training views", &RunConfig::train_views));
    k.push_back(int_key("heldout_views", "number of held-out views", &RunConfig::heldout_views));
    k.push_back(int_key("oracle_samples", "samples per ray for ground-truth renders",
                        &RunConfig::oracle_samples));
    k.push_back({"background", "background color r,g,b in [0, 1]",
                 [](RunConfig& c, const std::string& v) {
                   const auto parts = split_list(v);
                   if (parts.size() != 3) {
                     throw std::invalid_argument("config: key 'background' expects r,g,b");
                   }
                   for (int i = 0; i < 3; ++i) c.background[i] = to_double("background", parts[i]);
                 },
                 [](const RunConfig& c) {
                   return format_double(c.background[0]) + "," + format_double(c.background[1]) +
                          "," + format_double(c.background[2]);
                 }});
    k.push_back(double_key("rig_radius", "camera distance from the target", &RunConfig::rig_radius));
    k.push_back(double_key("rig_elevation", "camera elevation in degrees", &RunConfig::rig_elevation));
    k.push_back(double_key("rig_fov", "horizontal field of view in degrees", &RunConfig::rig_fov));
    k.push_back(double_key("rig_azimuth_span",
                           "views spread over [-span, span] degrees of azimuth",
                           &RunConfig::rig_azimuth_span));
    k.push_back(int_key("samples", "samples per ray", &RunConfig::samples));
    k.push_back(double_key("near", "near bound along each ray", &RunConfig::near));
    k.push_back(double_key("far", "far bound along each ray", &RunConfig::far));
    k.push_back(int_key("rays_per_chunk", "rays evaluated together; does not change results",
                        &RunConfig::rays_per_chunk));
    k.push_back(int_key("trunk_layers", "number of relu trunk layers", &RunConfig::trunk_layers));
    k.push_back(int_key("trunk_width", "width of each trunk layer", &RunConfig::trunk_width));
    k.push_back(int_key("position_frequencies", "positional encoding frequencies for points",
                        &RunConfig::position_frequencies));
    k.push_back(int_key("direction_frequencies", "positional encoding frequencies for directions",
                        &RunConfig::direction_frequencies));
    k.push_back(double_key("position_scale", "points are scaled by this before encoding",
                           &RunConfig::position_scale));
    k.push_back(double_key("adam_beta1", "first moment decay", &RunConfig::adam_beta1));
    k.push_back(double_key("adam_beta2", "second moment decay", &RunConfig::adam_beta2));
    k.push_back(double_key("adam_epsilon", "optimizer epsilon", &RunConfig::adam_epsilon));
    k.push_back(int_key("pretrain_steps", "supervised pretraining steps", &RunConfig::pretrain_steps));
    k.push_back(int_key("pretrain_rays", "rays per pretraining step", &RunConfig::pretrain_rays));
    k.push_back(double_key("pretrain_lr", "pretraining learning rate", &RunConfig::pretrain_lr));
    k.push_back(int_key("finetune_steps", "semi-supervised steps", &RunConfig::finetune_steps));
    k.push_back(int_key("finetune_real_rays", "real rays per semi-supervised step",
                        &RunConfig::finetune_real_rays));
    k.push_back(double_key("finetune_lr", "semi-supervised learning rate", &RunConfig::finetune_lr));
    k.push_back(double_key("mix", "weight of the pseudo term; real rays get 1 - mix", &RunConfig::mix));
    k.push_back(double_key("ema_momentum", "teacher <- m * teacher + (1 - m) * student",
                           &RunConfig::ema_momentum));
    k.push_back(int_key("refresh_period", "steps between pseudo-label refreshes",
                        &RunConfig::refresh_period));
    k.push_back(double_key("weight_noise_max", "final omega for compositing-weight noise",
                           &RunConfig::weight_noise_max));
    k.push_back(double_key("layer_noise_max", "final omega for head-input feature noise",
                           &RunConfig::layer_noise_max));
    k.push_back(double_key("noise_warmup_fraction",
                           "fraction of finetune steps over which omega ramps up linearly",
                           &RunConfig::noise_warmup_fraction));
    k.push_back({"noise_targets", "comma-separated layers whose inputs receive feature noise",
                 [](RunConfig& c, const std::string& v) { c.noise_targets = split_list(v); },
                 [](const RunConfig& c) { return join(c.noise_targets); }});
    k.push_back(double_key("tau_bound", "support bound of the tau-noise sampler", &RunConfig::tau_bound));
    k.push_back(bool_key("clamp_weights", "clamp perturbed compositing weights at 0",
                         &RunConfig::clamp_weights));
    k.push_back(int_key("patch_side", "side of the pseudo-label patch", &RunConfig::patch_side));
    k.push_back(int_key("dilation_window", "odd window of the brightest-color dilation; 1 disables",
                        &RunConfig::dilation_window));
    k.push_back({"dropout_ratios", "comma-separated dropout ratios of the teacher ensemble",
                 [](RunConfig& c, const std::string& v) {
                   c.dropout_ratios.clear();
                   for (const auto& p : split_list(v)) c.dropout_ratios.push_back(to_double("dropout_ratios", p));
                 },
                 [](const RunConfig& c) {
                   std::vector<std::string> parts;
                   for (double r : c.dropout_ratios) parts.push_back(format_double(r));
                   return join(parts);
                 }});
    k.push_back(double_key("kappa", "fraction of novel-view pixels used as pseudo labels",
                           &RunConfig::kappa));
    k.push_back(double_key("low_contrast_share",
                           "share of kappa reserved for the low-contrast region",
                           &RunConfig::low_contrast_share));
    k.push_back(double_key("hsv_v_lower", "minimum HSV value to pass the contrast mask",
                           &RunConfig::hsv_v_lower));
    k.push_back(double_key("hsv_s_lower", "minimum HSV saturation to pass the contrast mask",
                           &RunConfig::hsv_s_lower));
    k.push_back(int_key("eval_interval", "steps between held-out PSNR log entries; 0 disables",
                        &RunConfig::eval_interval));
    k.push_back(int_key("checkpoint_interval", "steps between checkpoints; 0 keeps only the final one",
                        &RunConfig::checkpoint_interval));
    k.push_back(double_key("robustness_amplitude", "amplitude of uniform density noise in evaluate",
                           &RunConfig::robustness_amplitude));
    k.push_back(int_key("sweep_frames", "frames of the interpolated sweep used for flicker",
                        &RunConfig::sweep_frames));
    k.push_back(string_key("output_dir", "directory for checkpoints, metrics and images",
                           &RunConfig::output_dir));
    k.push_back({"seed", "global seed; every random stream derives from it",
                 [](RunConfig& c, const std::string& v) {
                   if (!v.empty() && v[0] == '-') {
                     throw std::invalid_argument("config: key 'seed' must be non-negative");
                   }
                   errno = 0;
                   char* end = nullptr;
                   const unsigned long long s = std::strtoull(v.c_str(), &end, 10);
                   if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) {
                     throw std::invalid_argument("config: key 'seed' expects an integer, got '" + v + "'");
                   }
                   c.seed = s;
                 },
                 [](const RunConfig& c) { return std::to_string(c.seed); }});
    return k;
  }();
  return keys;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument("config: " + message);
}

}  // namespace

void RunConfig::validate() const {
  require(scene == "default" || scene == "empty", "scene must be 'default' or 'empty'");
  require(pretrain_steps >= 0 && finetune_steps >= 0, "step counts must be >= 0");
  require(pretrain_rays >= 1 && finetune_real_rays >= 1, "ray counts must be >= 1");
  require(rays_per_chunk >= 1, "rays_per_chunk must be >= 1");
  require(samples >= 1, "samples must be >= 1");
  require(near >= 0.0 && near < far, "require 0 <= near < far");
  require(pretrain_lr > 0.0 && finetune_lr > 0.0, "learning rates must be > 0");
  require(mix >= 0.0 && mix <= 1.0, "mix must lie in [0, 1]");
  require(ema_momentum >= 0.0 && ema_momentum <= 1.0, "ema_momentum must lie in [0, 1]");
  require(refresh_period >= 1, "refresh_period must be >= 1");
  require(weight_noise_max >= 0.0 && layer_noise_max >= 0.0, "noise weights must be >= 0");
  require(noise_warmup_fraction >= 0.0 && noise_warmup_fraction <= 1.0,
          "noise_warmup_fraction must lie in [0, 1]");
  require(tau_bound > 0.0, "tau_bound must be > 0");
  require(kappa > 0.0 && kappa <= 1.0, "kappa must lie in (0, 1]");
  require(low_contrast_share >= 0.0 && low_contrast_share <= 1.0,
          "low_contrast_share must lie in [0, 1]");
  require(eval_interval >= 0 && checkpoint_interval >= 0, "intervals must be >= 0");
  require(robustness_amplitude >= 0.0, "robustness_amplitude must be >= 0");
  require(sweep_frames >= 2, "sweep_frames must be >= 2");
  require(!output_dir.empty(), "output_dir must not be empty");
  scene_spec(*this).validate();
  render_config(*this).validate();
  field_architecture(*this).validate();
  pretrain_adam(*this).validate();
  finetune_adam(*this).validate();
  semi_supervised_config(*this).validate();
  const auto layers = layer_names_for(field_architecture(*this));
  for (const auto& t : noise_targets) {
    require(std::find(layers.begin(), layers.end(), t) != layers.end(),
            "noise target '" + t + "' is not a layer of the model");
  }
  require(patch_side <= width && patch_side <= height, "patch_side must fit the image");
}

std::vector<ConfigKeyInfo> config_keys() {
  std::vector<ConfigKeyInfo> out{{"format_version", "config format version, must be 1"}};
  for (const auto& k : registry()) out.push_back({k.name, k.description});
  return out;
}

RunConfig parse_config(const std::string& text) {
  RunConfig config;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  bool have_version = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "config line " + std::to_string(line_no) + ": ";
    if (eq == std::string::npos) throw std::invalid_argument(where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw std::invalid_argument(where + "duplicate key '" + key + "'");
    if (!have_version) {
      if (key != "format_version") {
        throw std::invalid_argument(where + "the first key must be format_version");
      }
      if (value != std::to_string(kConfigFormatVersion)) {
        throw std::invalid_argument(where + "unsupported format_version '" + value + "'");
      }
      have_version = true;
      continue;
    }
    const auto& keys = registry();
    const auto it = std::find_if(keys.begin(), keys.end(), [&](const Key& k) { return k.name == key; });
    if (it == keys.end()) throw std::invalid_argument(where + "unknown key '" + key + "'");
    try {
      it->parse(config, value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(where + e.what());
    }
  }
  if (!have_version) throw std::invalid_argument("config: missing format_version");
  config.validate();
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& config) {
  std::string out = "format_version = " + std::to_string(kConfigFormatVersion) + "\n";
  for (const auto& k : registry()) {
    out += "# " + k.description + "\n";
    out += k.name + " = " + k.format(config) + "\n";
  }
  return out;
}

void save_config(const std::filesystem::path& path, const RunConfig& config) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write config '" + path.string() + "'");
  out << serialize_config(config);
}

SceneSpec scene_spec(const RunConfig& c) {
  SceneSpec spec = c.scene == "empty" ? SceneSpec{} : default_scene_spec();
  spec.background = c.background;
  spec.rig.radius = c.rig_radius;
  spec.rig.elevation_degrees = c.rig_elevation;
  spec.rig.fov_degrees = c.rig_fov;
  spec.rig.azimuth_span = c.rig_azimuth_span;
  spec.width = c.width;
  spec.height = c.height;
  spec.train_views = c.train_views;
  spec.heldout_views = c.heldout_views;
  spec.oracle_samples = c.oracle_samples;
  return spec;
}

RenderConfig render_config(const RunConfig& c) {
  RenderConfig r;
  r.samples = c.samples;
  r.near = c.near;
  r.far = c.far;
  r.background = c.background;
  r.rays_per_chunk = static_cast<std::size_t>(std::max(1, c.rays_per_chunk));
  r.jitter = false;
  r.seed = mix_seed({c.seed, 0x72656e64ULL});
  return r;
}

FieldArchitecture field_architecture(const RunConfig& c) {
  FieldArchitecture a;
  a.trunk_layers = c.trunk_layers;
  a.trunk_width = c.trunk_width;
  a.position_frequencies = c.position_frequencies;
  a.direction_frequencies = c.direction_frequencies;
  a.position_scale = c.position_scale;
  return a;
}

AdamConfig pretrain_adam(const RunConfig& c) {
  return {c.pretrain_lr, c.adam_beta1, c.adam_beta2, c.adam_epsilon};
}

AdamConfig finetune_adam(const RunConfig& c) {
  return {c.finetune_lr, c.adam_beta1, c.adam_beta2, c.adam_epsilon};
}

NoiseSchedule weight_noise_schedule(const RunConfig& c) {
  return {c.weight_noise_max,
          static_cast<std::int64_t>(std::llround(c.noise_warmup_fraction * c.finetune_steps)),
          c.finetune_steps};
}

NoiseSchedule layer_noise_schedule(const RunConfig& c) {
  return {c.layer_noise_max,
          static_cast<std::int64_t>(std::llround(c.noise_warmup_fraction * c.finetune_steps)),
          c.finetune_steps};
}

SemiSupervisedConfig semi_supervised_config(const RunConfig& c) {
  SemiSupervisedConfig s;
  s.student.render = render_config(c);
  s.student.render.jitter = true;
  s.student.loss.mix = c.mix;
  s.student.patch = {c.patch_side, c.dilation_window};
  s.student.noise_targets = c.noise_targets;
  s.student.tau_bound = c.tau_bound;
  s.student.clamp_weights = c.clamp_weights;
  s.student.noise_seed = mix_seed({c.seed, 0x6e6f6973ULL});
  s.ensemble.ratios = c.dropout_ratios;
  s.ensemble.dropout_seed = mix_seed({c.seed, 0x64726f70ULL});
  s.hsv = {c.hsv_v_lower, c.hsv_s_lower};
  s.kappa = c.kappa;
  s.low_contrast_share = c.low_contrast_share;
  s.refresh_period = c.refresh_period;
  s.real_rays = static_cast<std::size_t>(std::max(1, c.finetune_real_rays));
  s.steps = c.finetune_steps;
  return s;
}

}  // namespace sparseview
