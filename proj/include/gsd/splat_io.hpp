#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace gsd {

/// A 3D Gaussian Splat object in working (activated) parameterization.
///
/// Rotations are unit quaternions; Eigen stores them (x,y,z,w) internally but
/// all file and wire formats in this project use scalar-first (w,x,y,z).
/// `colors_rest` holds `rest_count` higher-order SH coefficients per Gaussian,
/// stored verbatim and never interpreted.
struct GaussianCloud {
  std::vector<Eigen::Vector3d> centers;
  std::vector<double> opacities;
  std::vector<Eigen::Vector3d> scales;
  std::vector<Eigen::Quaterniond> rotations;
  std::vector<Eigen::Vector3d> colors_dc;
  std::vector<float> colors_rest;
  std::size_t rest_count = 0;

  std::size_t size() const { return centers.size(); }

  /// Throws ValidationError (with the Gaussian index) or EmptyCloudError
  /// when an invariant does not hold.
  void validate() const;
};

struct PlyOptions {
  /// When false, the file stores logit opacities, log scales and
  /// unnormalized quaternions; when true, values are read/written as-is.
  bool activated = false;
};

/// Parses a 3DGS PLY (binary little-endian or ascii).
GaussianCloud load_ply(std::span<const std::uint8_t> bytes, const PlyOptions& opts = {});
/// Always writes binary little-endian with the canonical property order.
std::vector<std::uint8_t> save_ply(const GaussianCloud& cloud, const PlyOptions& opts = {});

GaussianCloud load_ply_file(const std::string& path, const PlyOptions& opts = {});
void save_ply_file(const std::string& path, const GaussianCloud& cloud,
                   const PlyOptions& opts = {});

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace gsd
