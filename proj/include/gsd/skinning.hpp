#pragma once

#include <cstddef>
#include <vector>

#include "gsd/arap.hpp"
#include "gsd/config.hpp"
#include "gsd/deform_graph.hpp"
#include "gsd/splat_io.hpp"

namespace gsd {

/// Per-Gaussian control supports, stored flat with a fixed stride of
/// `per_gaussian`. Supports of Gaussian i are ordered nearest first.
struct SkinBinding {
  std::size_t per_gaussian = 0;
  std::vector<std::size_t> control_ids;
  std::vector<double> weights;

  std::size_t size() const { return per_gaussian == 0 ? 0 : control_ids.size() / per_gaussian; }
};

/// Binds each Gaussian to its k_tilde Euclidean-nearest control rest
/// positions with normalized inverse-distance weights 1 / (d + eps), where
/// eps is 1e-8 of the cloud's bounding-box diagonal.
SkinBinding bind(const GaussianCloud& cloud, const ControlGraph& graph,
                 std::size_t k_tilde = defaults::kSkinNeighbors);

/// Linear blend skinning of centers and orientations. Opacities, scales and
/// colors are copied unchanged.
GaussianCloud apply_lbs(const GaussianCloud& cloud, const SkinBinding& binding,
                        const ControlGraph& graph, const DeformResult& result);

}  // namespace gsd
