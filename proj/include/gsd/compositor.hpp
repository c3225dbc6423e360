#pragma once

#include <vector>

#include "gsd/config.hpp"
#include "gsd/image.hpp"

namespace gsd {

/// out = a * fg + (1 - a) * bg per channel, straight alpha.
ImageRGB alpha_composite(const ImageRGBA& fg, const ImageRGB& bg);

/// Alpha channel of an RGBA image as a standalone float plane.
std::vector<float> alpha_channel(const ImageRGBA& image);

/// Foreground pixels (alpha >= threshold) with at least one background
/// 4-neighbor, dilated by a disk of `radius` pixels (offsets with
/// dx^2 + dy^2 <= radius^2).
MaskImage boundary_mask(const std::vector<float>& alpha, int width, int height,
                        double threshold = defaults::kBoundaryThreshold,
                        int radius = defaults::kBoundaryRadius);

}  // namespace gsd
