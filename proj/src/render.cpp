#include "gsd/render.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gsd/errors.hpp"
#include "gsd/parallel.hpp"

namespace gsd {

void Camera::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw ValidationError("camera focal lengths must be positive");
  if (width <= 0 || height <= 0) throw ValidationError("camera image size must be positive");
  if (!rotation.allFinite() || !translation.allFinite() || !std::isfinite(cx) || !std::isfinite(cy))
    throw ValidationError("camera has non-finite parameters");
  if (!(rotation.transpose() * rotation).isIdentity(1e-6) || rotation.determinant() <= 0.0)
    throw ValidationError("camera rotation is not a proper rotation");
}

Camera Camera::look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                       const Eigen::Vector3d& up, double fov_y_degrees, int width, int height) {
  const Eigen::Vector3d forward = (target - eye).normalized();
  const Eigen::Vector3d right = forward.cross(up).normalized();
  const Eigen::Vector3d down = forward.cross(right);
  Camera cam;
  cam.rotation.row(0) = right.transpose();
  cam.rotation.row(1) = down.transpose();
  cam.rotation.row(2) = forward.transpose();
  cam.translation = -cam.rotation * eye;
  cam.width = width;
  cam.height = height;
  const double fov = fov_y_degrees * M_PI / 180.0;
  cam.fy = 0.5 * height / std::tan(0.5 * fov);
  cam.fx = cam.fy;
  cam.cx = 0.5 * width;
  cam.cy = 0.5 * height;
  return cam;
}

std::optional<ProjectedGaussian> project_gaussian(const Eigen::Vector3d& center,
                                                  const Eigen::Vector3d& scale,
                                                  const Eigen::Quaterniond& rotation,
                                                  const Camera& camera) {
  const Eigen::Vector3d t = camera.rotation * center + camera.translation;
  if (!(t.z() > kNearPlane)) return std::nullopt;

  const Eigen::Matrix3d m = rotation.toRotationMatrix() * scale.asDiagonal();
  const Eigen::Matrix3d cov_world = m * m.transpose();
  const Eigen::Matrix3d cov_cam = camera.rotation * cov_world * camera.rotation.transpose();

  const double inv_z = 1.0 / t.z();
  Eigen::Matrix<double, 2, 3> jacobian;
  jacobian << camera.fx * inv_z, 0.0, -camera.fx * t.x() * inv_z * inv_z,
              0.0, camera.fy * inv_z, -camera.fy * t.y() * inv_z * inv_z;

  ProjectedGaussian out;
  out.mean = {camera.fx * t.x() * inv_z + camera.cx, camera.fy * t.y() * inv_z + camera.cy};
  out.cov = jacobian * cov_cam * jacobian.transpose() + kScreenDilation * Eigen::Matrix2d::Identity();
  out.depth = t.z();
  return out;
}

Eigen::Vector3d dc_to_rgb(const Eigen::Vector3d& f_dc) {
  return (Eigen::Vector3d::Constant(0.5) + kSH0 * f_dc).cwiseMax(0.0).cwiseMin(1.0);
}

namespace {

struct Splat {
  std::size_t index;
  double depth;
  Eigen::Vector2d mean;
  Eigen::Matrix2d conic;  // inverse covariance
  double opacity;
  Eigen::Vector3d color;
  int x0, x1, y0, y1;     // inclusive pixel bounds
};

}  // namespace

ImageRGBA render(const GaussianCloud& cloud, const Camera& camera) {
  camera.validate();
  ImageRGBA image(camera.width, camera.height);
  if (cloud.size() == 0) return image;

  std::vector<Splat> splats;
  splats.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto projected = project_gaussian(cloud.centers[i], cloud.scales[i], cloud.rotations[i], camera);
    if (!projected) continue;
    const Eigen::Matrix2d& cov = projected->cov;
    const double det = cov.determinant();
    if (!(det > 0.0)) continue;
    const double mid = 0.5 * (cov(0, 0) + cov(1, 1));
    const double lambda_max = mid + std::sqrt(std::max(0.0, mid * mid - det));
    const double radius = 3.0 * std::sqrt(lambda_max);
    const Eigen::Vector2d& mu = projected->mean;
    Splat s;
    s.x0 = static_cast<int>(std::floor(mu.x() - radius - 0.5));
    s.x1 = static_cast<int>(std::ceil(mu.x() + radius - 0.5));
    s.y0 = static_cast<int>(std::floor(mu.y() - radius - 0.5));
    s.y1 = static_cast<int>(std::ceil(mu.y() + radius - 0.5));
    if (s.x1 < 0 || s.y1 < 0 || s.x0 >= camera.width || s.y0 >= camera.height) continue;
    s.x0 = std::max(s.x0, 0);
    s.y0 = std::max(s.y0, 0);
    s.x1 = std::min(s.x1, camera.width - 1);
    s.y1 = std::min(s.y1, camera.height - 1);
    s.index = i;
    s.depth = projected->depth;
    s.mean = mu;
    s.conic = cov.inverse();
    s.opacity = cloud.opacities[i];
    s.color = dc_to_rgb(cloud.colors_dc[i]);
    splats.push_back(s);
  }
  // Farthest first; equal depths in index order.
  std::sort(splats.begin(), splats.end(), [](const Splat& a, const Splat& b) {
    return a.depth != b.depth ? a.depth > b.depth : a.index < b.index;
  });

  // Premultiplied accumulation, converted to straight alpha at the end.
  std::vector<double> accum(static_cast<std::size_t>(camera.width) * camera.height * 4, 0.0);
  constexpr int kBand = 16;
  const int bands = (camera.height + kBand - 1) / kBand;
  parallel_for(0, static_cast<std::size_t>(bands), [&](std::size_t band) {
    const int row0 = static_cast<int>(band) * kBand;
    const int row1 = std::min(camera.height - 1, row0 + kBand - 1);
    for (const Splat& s : splats) {
      const int y0 = std::max(s.y0, row0), y1 = std::min(s.y1, row1);
      for (int y = y0; y <= y1; ++y) {
        for (int x = s.x0; x <= s.x1; ++x) {
          const Eigen::Vector2d d(x + 0.5 - s.mean.x(), y + 0.5 - s.mean.y());
          const double power = -0.5 * d.dot(s.conic * d);
          const double alpha = std::min(kMaxSplatAlpha, s.opacity * std::exp(power));
          if (alpha < 1.0 / 255.0) continue;
          double* px = accum.data() + (static_cast<std::size_t>(y) * camera.width + x) * 4;
          for (int c = 0; c < 3; ++c) px[c] = alpha * s.color[c] + (1.0 - alpha) * px[c];
          px[3] = alpha + (1.0 - alpha) * px[3];
        }
      }
    }
  });

  for (std::size_t p = 0; p < accum.size() / 4; ++p) {
    const double a = accum[p * 4 + 3];
    float* out = image.pixels.data() + p * 4;
    if (a <= 0.0) continue;
    for (int c = 0; c < 3; ++c) out[c] = static_cast<float>(std::clamp(accum[p * 4 + c] / a, 0.0, 1.0));
    out[3] = static_cast<float>(std::clamp(a, 0.0, 1.0));
  }
  return image;
}

}  // namespace gsd
