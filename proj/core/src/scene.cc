#include "sparseview/scene.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sparseview {

double Primitive::signed_distance(const Vec3& x) const {
  const double dx = x[0] - center[0], dy = x[1] - center[1], dz = x[2] - center[2];
  if (kind == PrimitiveKind::kSphere) return std::sqrt(dx * dx + dy * dy + dz * dz) - size[0];
  const double q[3] = {std::abs(dx) - size[0], std::abs(dy) - size[1], std::abs(dz) - size[2]};
  const double ox = std::max(q[0], 0.0), oy = std::max(q[1], 0.0), oz = std::max(q[2], 0.0);
  return std::sqrt(ox * ox + oy * oy + oz * oz) + std::min(std::max({q[0], q[1], q[2]}), 0.0);
}

double Primitive::density(const Vec3& x) const {
  const double d = signed_distance(x);
  if (d <= 0.0) return amplitude;
  if (d >= falloff) return 0.0;
  const double t = d / falloff;
  return amplitude * (1.0 - t * t * (3.0 - 2.0 * t));
}

Vec3 Primitive::bound() const {
  if (kind == PrimitiveKind::kSphere) {
    const double r = size[0] + falloff;
    return {r, r, r};
  }
  return {size[0] + falloff, size[1] + falloff, size[2] + falloff};
}

void SceneSpec::validate() const {
  for (std::size_t i = 0; i < primitives.size(); ++i) {
    const Primitive& p = primitives[i];
    const std::string where = "SceneSpec: primitive " + std::to_string(i);
    if (!(p.amplitude >= 0.0) || !(p.falloff >= 0.0)) {
      throw std::invalid_argument(where + " has negative amplitude or falloff");
    }
    const int extents = p.kind == PrimitiveKind::kSphere ? 1 : 3;
    for (int a = 0; a < extents; ++a) {
      if (!(p.size[a] > 0.0)) throw std::invalid_argument(where + " has non-positive size");
    }
    for (double c : p.rgb) {
      if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument(where + " color outside [0, 1]");
    }
    const Vec3 b = p.bound();
    for (int a = 0; a < 3; ++a) {
      if (p.center[a] - b[a] < -1.0 || p.center[a] + b[a] > 1.0) {
        throw std::invalid_argument(where + " extends outside the [-1, 1]^3 volume");
      }
    }
  }
  for (double c : background) {
    if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("SceneSpec: background outside [0, 1]");
  }
  if (width < 1 || height < 1) throw std::invalid_argument("SceneSpec: image dims must be > 0");
  if (train_views < 1 || heldout_views < 0) {
    throw std::invalid_argument("SceneSpec: need >= 1 training view and >= 0 held-out views");
  }
  if (oracle_samples < 1) throw std::invalid_argument("SceneSpec: oracle samples must be > 0");
  if (!(rig.radius > std::sqrt(3.0))) {
    throw std::invalid_argument("SceneSpec: rig radius must place cameras outside the volume");
  }
  if (!(rig.fov_degrees > 0.0 && rig.fov_degrees < 180.0)) {
    throw std::invalid_argument("SceneSpec: fov must lie in (0, 180) degrees");
  }
  if (!(std::abs(rig.elevation_degrees) < 90.0)) {
    throw std::invalid_argument("SceneSpec: elevation must lie in (-90, 90) degrees");
  }
  if (!(rig.azimuth_span >= 0.0 && rig.azimuth_span <= 180.0)) {
    throw std::invalid_argument("SceneSpec: azimuth span must lie in [0, 180] degrees");
  }
}

SceneSpec default_scene_spec() {
  SceneSpec spec;
  Primitive a;
  a.center = {-0.25, 0.0, 0.0};
  a.size = {0.45, 0.45, 0.45};
  a.rgb = {0.9, 0.2, 0.2};
  Primitive b;
  b.center = {0.25, 0.1, -0.1};
  b.size = {0.4, 0.4, 0.4};
  b.rgb = {0.2, 0.4, 0.9};
  Primitive box;
  box.kind = PrimitiveKind::kBox;
  box.center = {0.0, -0.1, 0.55};
  box.size = {0.5, 0.05, 0.02};
  box.rgb = {0.3, 0.8, 0.3};
  spec.primitives = {a, b, box};
  return spec;
}

AnalyticField::AnalyticField(std::vector<Primitive> primitives)
    : primitives_(std::move(primitives)) {}

double AnalyticField::sigma(const Vec3& x) const {
  double total = 0.0;
  for (const auto& p : primitives_) total += p.density(x);
  return total;
}

Rgb AnalyticField::color(const Vec3& x) const {
  double total = 0.0;
  Rgb c{0.0, 0.0, 0.0};
  for (const auto& p : primitives_) {
    const double s = p.density(x);
    total += s;
    for (int k = 0; k < 3; ++k) c[k] += s * p.rgb[k];
  }
  if (total > 0.0) {
    for (double& v : c) v /= total;
  }
  return c;
}

void AnalyticField::evaluate(std::span<const double> points, std::span<const double>,
                             std::span<const std::uint64_t> keys, std::span<double> rgb,
                             std::span<double> sigma) const {
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const Vec3 x{points[3 * i], points[3 * i + 1], points[3 * i + 2]};
    double total = 0.0;
    Rgb c{0.0, 0.0, 0.0};
    for (const auto& p : primitives_) {
      const double s = p.density(x);
      if (s == 0.0) continue;
      total += s;
      for (int k = 0; k < 3; ++k) c[k] += s * p.rgb[k];
    }
    sigma[i] = total;
    for (int k = 0; k < 3; ++k) rgb[3 * i + k] = total > 0.0 ? c[k] / total : 0.0;
  }
}

Camera orbit_camera(const SceneSpec& spec, double azimuth_degrees, double elevation_degrees,
                    double radius) {
  const double az = azimuth_degrees * std::numbers::pi / 180.0;
  const double el = elevation_degrees * std::numbers::pi / 180.0;
  const Eigen::Vector3d target(spec.rig.target[0], spec.rig.target[1], spec.rig.target[2]);
  const Eigen::Vector3d eye =
      target + radius * Eigen::Vector3d(std::cos(el) * std::sin(az), std::sin(el),
                                        std::cos(el) * std::cos(az));
  return Camera::look_at(eye, target, Eigen::Vector3d::UnitY(),
                         Camera::focal_from_fov(spec.rig.fov_degrees, spec.width), spec.width,
                         spec.height);
}

std::vector<Camera> rig_cameras(const SceneSpec& spec, int count, bool heldout) {
  std::vector<Camera> out;
  const double span = spec.rig.azimuth_span;
  for (int i = 0; i < count; ++i) {
    double az;
    if (heldout) {
      az = -span + 2.0 * span * (i + 0.5) / count;
    } else {
      az = count == 1 ? 0.0 : -span + 2.0 * span * i / (count - 1);
    }
    out.push_back(orbit_camera(spec, az, spec.rig.elevation_degrees, spec.rig.radius));
  }
  return out;
}

RenderConfig oracle_config(const SceneSpec& spec, const RenderConfig& render) {
  RenderConfig c = render;
  c.samples = spec.oracle_samples;
  c.jitter = false;
  c.background = spec.background;
  return c;
}

Scene make_scene(const SceneSpec& spec, const RenderConfig& render) {
  spec.validate();
  Scene scene{spec, AnalyticField(spec.primitives), rig_cameras(spec, spec.train_views, false),
              rig_cameras(spec, spec.heldout_views, true), {}, {}};
  const RenderConfig oracle = oracle_config(spec, render);
  for (const auto& cam : scene.train_cameras) {
    scene.train_images.push_back(render_image(scene.field, cam, oracle).image);
  }
  for (const auto& cam : scene.heldout_cameras) {
    scene.heldout_images.push_back(render_image(scene.field, cam, oracle).image);
  }
  return scene;
}

}  // namespace sparseview
