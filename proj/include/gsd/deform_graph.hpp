#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "gsd/config.hpp"
#include "gsd/splat_io.hpp"

namespace gsd {

using Positions = std::vector<Eigen::Vector3d>;

/// Undirected edge with a < b.
struct Edge {
  std::size_t a = 0;
  std::size_t b = 0;
  double length = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Symmetric edge set over `node_count` nodes, sorted by (a, b), no
/// duplicates. `repair_count` of the edges were added to join components.
struct EdgeSet {
  std::size_t node_count = 0;
  std::vector<Edge> edges;
  std::size_t repair_count = 0;

  std::vector<std::vector<std::pair<std::size_t, double>>> adjacency() const;
  std::size_t component_count() const;
  bool is_connected() const { return component_count() <= 1; }
};

struct GeodesicNeighbors {
  std::vector<std::vector<std::size_t>> neighbors;
  std::vector<std::vector<double>> distances;
};

enum class EdgeWeighting { Uniform, InverseGeodesic };

/// Sparse deformation graph over control nodes sampled from a cloud.
/// neighbors[i] and weights[i] describe the directed edges i -> j.
struct ControlGraph {
  std::vector<std::size_t> node_indices;
  Positions rest_positions;
  std::vector<std::vector<std::size_t>> neighbors;
  std::vector<std::vector<double>> weights;
  EdgeSet k_half_edges;
  std::size_t k = 0;
  std::uint64_t seed = 0;

  std::size_t size() const { return rest_positions.size(); }
  void validate() const;
};

struct GraphOptions {
  std::size_t control_count = defaults::kControlCount;
  std::size_t neighbors = defaults::kGraphNeighbors;
  std::uint64_t seed = 0;
  EdgeWeighting weighting = EdgeWeighting::Uniform;
};

/// Greedy farthest-point sampling. The first index is drawn uniformly from a
/// generator seeded with `seed`; ties go to the smallest index.
std::vector<std::size_t> farthest_point_sample(std::span<const Eigen::Vector3d> points,
                                               std::size_t m, std::uint64_t seed);

/// Union of directed k_half-NN edges, plus greedy bridges between the closest
/// pair of components until the graph is connected.
EdgeSet build_initial_graph(std::span<const Eigen::Vector3d> positions, std::size_t k_half);

/// k nearest nodes by shortest-path length (Euclidean edge lengths) for every
/// node. Lists are directed; ties resolve to the smaller node id.
GeodesicNeighbors geodesic_knn(const EdgeSet& edges, std::span<const Eigen::Vector3d> positions,
                               std::size_t k);

ControlGraph build_control_graph(const GaussianCloud& cloud, const GraphOptions& opts = {});

}  // namespace gsd
