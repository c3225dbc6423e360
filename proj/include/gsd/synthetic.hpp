#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gsd/splat_io.hpp"

namespace gsd::synthetic {

/// Random valid Gaussians inside the cube [-extent, extent]^3 with random
/// orientations, scales, opacities and colors. `rest_count` SH coefficients
/// per Gaussian are filled with random values.
GaussianCloud random_cloud(std::size_t n, std::uint64_t seed, double extent = 1.0,
                           std::size_t rest_count = 0);

/// Gaussians uniformly filling a ball.
GaussianCloud blob(std::size_t n, const Eigen::Vector3d& center, double radius, std::uint64_t seed);

enum class DumbbellPart : std::uint8_t { LeftBlob, Bridge, RightBlob };

struct Dumbbell {
  GaussianCloud cloud;
  std::vector<DumbbellPart> parts;
  Eigen::Vector3d left_center;
  Eigen::Vector3d right_center;
  double blob_radius = 0.0;
  double bridge_radius = 0.0;
};

/// Two balls of radius `blob_radius` centered at (-separation/2, 0, 0) and
/// (+separation/2, 0, 0) joined by a thin cylinder along x.
Dumbbell dumbbell(std::size_t n, std::uint64_t seed, double blob_radius = 0.5,
                  double separation = 2.0, double bridge_radius = 0.08);

}  // namespace gsd::synthetic
