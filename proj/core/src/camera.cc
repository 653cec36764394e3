#include "sparseview/camera.h"

#include <Eigen/Geometry>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sparseview {

void Camera::validate() const {
  const double err = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (!(err <= 1e-9) || rotation.determinant() <= 0.0) {
    throw std::invalid_argument("Camera: rotation is not orthonormal (|R^T R - I| = " +
                                std::to_string(err) + ")");
  }
  if (!(focal > 0.0)) throw std::invalid_argument("Camera: focal length must be positive");
  if (width <= 0 || height <= 0) throw std::invalid_argument("Camera: image size must be positive");
  if (!translation.allFinite()) throw std::invalid_argument("Camera: translation not finite");
}

Camera Camera::look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                       const Eigen::Vector3d& up, double focal, int width, int height) {
  const Eigen::Vector3d back = (eye - target).normalized();
  const Eigen::Vector3d right = up.cross(back).normalized();
  const Eigen::Vector3d true_up = back.cross(right);
  Camera cam;
  cam.rotation.col(0) = right;
  cam.rotation.col(1) = true_up;
  cam.rotation.col(2) = back;
  cam.translation = eye;
  cam.focal = focal;
  cam.width = width;
  cam.height = height;
  cam.validate();
  return cam;
}

double Camera::focal_from_fov(double fov_degrees, int width) {
  return 0.5 * width / std::tan(0.5 * fov_degrees * std::numbers::pi / 180.0);
}

std::vector<Ray> generate_rays(const Camera& camera) {
  std::vector<Pixel> all;
  all.reserve(static_cast<std::size_t>(camera.width) * static_cast<std::size_t>(camera.height));
  for (int y = 0; y < camera.height; ++y) {
    for (int x = 0; x < camera.width; ++x) all.push_back({x, y});
  }
  return generate_rays(camera, all);
}

std::vector<Ray> generate_rays(const Camera& camera, std::span<const Pixel> pixels) {
  camera.validate();
  std::vector<Ray> rays;
  rays.reserve(pixels.size());
  const double cx = 0.5 * camera.width, cy = 0.5 * camera.height;
  for (const Pixel& p : pixels) {
    if (p.x < 0 || p.y < 0 || p.x >= camera.width || p.y >= camera.height) {
      throw std::out_of_range("generate_rays: pixel (" + std::to_string(p.x) + ", " +
                              std::to_string(p.y) + ") outside " + std::to_string(camera.width) +
                              "x" + std::to_string(camera.height) + " image");
    }
    const Eigen::Vector3d local((p.x + 0.5 - cx) / camera.focal, -(p.y + 0.5 - cy) / camera.focal,
                                -1.0);
    Ray r;
    r.origin = camera.translation;
    r.direction = (camera.rotation * local).normalized();
    r.pixel = p;
    r.id = static_cast<std::uint64_t>(p.y) * static_cast<std::uint64_t>(camera.width) +
           static_cast<std::uint64_t>(p.x);
    rays.push_back(r);
  }
  return rays;
}

Camera interpolate_pose(const Camera& a, const Camera& b, double t) {
  const Eigen::Quaterniond qa(a.rotation), qb(b.rotation);
  Camera out = a;
  if (t == 0.0) return out;
  if (t == 1.0) {
    out.rotation = b.rotation;
    out.translation = b.translation;
    return out;
  }
  out.rotation = qa.slerp(t, qb).normalized().toRotationMatrix();
  out.translation = (1.0 - t) * a.translation + t * b.translation;
  return out;
}

}  // namespace sparseview
