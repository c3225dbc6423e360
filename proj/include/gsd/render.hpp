#pragma once

#include <optional>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "gsd/image.hpp"
#include "gsd/splat_io.hpp"

namespace gsd {

/// Pinhole camera, OpenCV axes (x right, y down, z forward). `rotation` and
/// `translation` map world points into camera space. Pixel (x, y) covers
/// [x, x+1) x [y, y+1); its center is sampled.
struct Camera {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  int width = 1;
  int height = 1;

  void validate() const;

  /// Camera at `eye` looking at `target`, `up` pointing up in the image.
  static Camera look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                        const Eigen::Vector3d& up, double fov_y_degrees, int width, int height);
};

inline constexpr double kNearPlane = 1e-4;
inline constexpr double kScreenDilation = 0.3;  // pixel^2 added to every 2D covariance
inline constexpr double kMaxSplatAlpha = 0.99;
inline constexpr double kSH0 = 0.28209479177387814;

struct ProjectedGaussian {
  Eigen::Vector2d mean;
  Eigen::Matrix2d cov;
  double depth = 0.0;
};

/// Empty when the center is not in front of the near plane.
std::optional<ProjectedGaussian> project_gaussian(const Eigen::Vector3d& center,
                                                  const Eigen::Vector3d& scale,
                                                  const Eigen::Quaterniond& rotation,
                                                  const Camera& camera);

/// DC color of a Gaussian in [0, 1].
Eigen::Vector3d dc_to_rgb(const Eigen::Vector3d& f_dc);

/// Back-to-front splatting of every Gaussian; an empty cloud gives a fully
/// transparent image.
ImageRGBA render(const GaussianCloud& cloud, const Camera& camera);

}  // namespace gsd
