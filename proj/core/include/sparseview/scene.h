#pragma once

#include <vector>

#include "sparseview/camera.h"
#include "sparseview/image.h"
#include "sparseview/radiance.h"
#include "sparseview/renderer.h"

namespace sparseview {

enum class PrimitiveKind { kSphere, kBox };

// Soft-edged solid. Density is `amplitude` inside, falls to 0 across a shell
// of width `falloff` outside the surface (smoothstep), and is exactly 0
// beyond it.
struct Primitive {
  PrimitiveKind kind = PrimitiveKind::kSphere;
  Vec3 center{0.0, 0.0, 0.0};
  Vec3 size{0.5, 0.5, 0.5};  // sphere: size[0] is the radius; box: half extents
  Rgb rgb{1.0, 1.0, 1.0};
  double amplitude = 25.0;
  double falloff = 0.05;

  double signed_distance(const Vec3& x) const;
  double density(const Vec3& x) const;
  // Half extents of the axis-aligned bound, shell included.
  Vec3 bound() const;
};

struct CameraRig {
  double radius = 2.5;
  double elevation_degrees = 20.0;
  double fov_degrees = 45.0;
  // Views are spread evenly over [-azimuth_span, azimuth_span] degrees.
  double azimuth_span = 60.0;
  Vec3 target{0.0, 0.0, 0.0};
};

struct SceneSpec {
  std::vector<Primitive> primitives;
  Rgb background{0.0, 0.0, 0.0};
  CameraRig rig;
  int width = 64;
  int height = 64;
  int train_views = 3;
  int heldout_views = 2;
  int oracle_samples = 256;

  // Throws if a primitive leaves [-1, 1]^3, a density parameter is negative,
  // or the view setup is degenerate.
  void validate() const;
};

// Two overlapping colored spheres plus a thin box in front of them.
SceneSpec default_scene_spec();

// Closed-form sigma(x) and c(x): densities add up, color is the
// density-weighted mean of primitive colors (black where sigma = 0).
class AnalyticField final : public RadianceSource {
 public:
  explicit AnalyticField(std::vector<Primitive> primitives);

  double sigma(const Vec3& x) const;
  Rgb color(const Vec3& x) const;

  void evaluate(std::span<const double> points, std::span<const double> dirs,
                std::span<const std::uint64_t> keys, std::span<double> rgb,
                std::span<double> sigma) const override;

  const std::vector<Primitive>& primitives() const noexcept { return primitives_; }

 private:
  std::vector<Primitive> primitives_;
};

// Training cameras at evenly spread azimuths; held-out cameras in between.
std::vector<Camera> rig_cameras(const SceneSpec& spec, int count, bool heldout);
Camera orbit_camera(const SceneSpec& spec, double azimuth_degrees, double elevation_degrees,
                    double radius);

struct Scene {
  SceneSpec spec;
  AnalyticField field;
  std::vector<Camera> train_cameras;
  std::vector<Camera> heldout_cameras;
  std::vector<ImageBuffer> train_images;    // oracle renders
  std::vector<ImageBuffer> heldout_images;  // oracle renders
};

// `render` supplies near/far/background for the oracle; its sample count is
// replaced by spec.oracle_samples and jitter is disabled.
Scene make_scene(const SceneSpec& spec, const RenderConfig& render);

RenderConfig oracle_config(const SceneSpec& spec, const RenderConfig& render);

}  // namespace sparseview
