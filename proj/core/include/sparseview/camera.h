#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

namespace sparseview {

// Pinhole camera. `rotation` maps camera axes to world axes (camera looks
// down its -z axis, +y up); `translation` is the camera center in world units.
struct Camera {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  double focal = 1.0;  // pixels
  int width = 1;
  int height = 1;

  // Throws unless R^T R = I within 1e-9, det R > 0, focal > 0 and dims > 0.
  void validate() const;

  static Camera look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                        const Eigen::Vector3d& up, double focal, int width, int height);
  static double focal_from_fov(double fov_degrees, int width);
};

struct Pixel {
  int x = 0;
  int y = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

struct Ray {
  Eigen::Vector3d origin;
  Eigen::Vector3d direction;  // unit length
  Pixel pixel;
  // Stable identity used to derive per-ray random streams.
  std::uint64_t id = 0;
};

// One ray per pixel through its center. Without a pixel list, all pixels in
// row-major order. ids are the row-major pixel index.
std::vector<Ray> generate_rays(const Camera& camera);
std::vector<Ray> generate_rays(const Camera& camera, std::span<const Pixel> pixels);

// Translation lerp and rotation slerp (via quaternions) between two poses.
// Intrinsics are taken from `a`.
Camera interpolate_pose(const Camera& a, const Camera& b, double t);

}  // namespace sparseview
