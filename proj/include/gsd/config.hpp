#pragma once

#include <cstddef>

namespace gsd::defaults {

// Control node count sampled from the Gaussians.
inline constexpr std::size_t kControlCount = 512;
// Geodesic neighbors per control node (K). The initial graph uses K/2.
inline constexpr std::size_t kGraphNeighbors = 8;
// Controls each Gaussian is skinned to.
inline constexpr std::size_t kSkinNeighbors = 3;
// Local/global alternations per solve.
inline constexpr int kSolverIterations = 3;

inline constexpr double kBoundaryThreshold = 0.5;
inline constexpr int kBoundaryRadius = 8;

}  // namespace gsd::defaults
