#include "gsd/deform_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <tuple>

#include "gsd/errors.hpp"
#include "gsd/parallel.hpp"

namespace gsd {
namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

std::vector<std::vector<std::pair<std::size_t, double>>> EdgeSet::adjacency() const {
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(node_count);
  for (const Edge& e : edges) {
    adj[e.a].emplace_back(e.b, e.length);
    adj[e.b].emplace_back(e.a, e.length);
  }
  return adj;
}

std::size_t EdgeSet::component_count() const {
  DisjointSets sets(node_count);
  std::size_t components = node_count;
  for (const Edge& e : edges) {
    if (sets.unite(e.a, e.b)) --components;
  }
  return components;
}

void ControlGraph::validate() const {
  const std::size_t m = rest_positions.size();
  if (m == 0) throw ValidationError("control graph has no nodes");
  if (node_indices.size() != m || neighbors.size() != m || weights.size() != m)
    throw ValidationError("control graph arrays have mismatched lengths");
  for (std::size_t i = 0; i < m; ++i) {
    if (!rest_positions[i].allFinite()) throw ValidationError("non-finite rest position", i);
    if (neighbors[i].size() != k || weights[i].size() != k)
      throw ValidationError("node does not have exactly k neighbors", i);
    std::set<std::size_t> seen;
    for (std::size_t n = 0; n < k; ++n) {
      const std::size_t j = neighbors[i][n];
      if (j >= m || j == i || !seen.insert(j).second)
        throw ValidationError("invalid, self or duplicate neighbor", i);
      if (!(weights[i][n] > 0.0) || !std::isfinite(weights[i][n]))
        throw ValidationError("edge weight not strictly positive", i);
    }
  }
}

std::vector<std::size_t> farthest_point_sample(std::span<const Eigen::Vector3d> points,
                                               std::size_t m, std::uint64_t seed) {
  const std::size_t n = points.size();
  if (m == 0 || m > n)
    throw ArgumentError("farthest_point_sample: need 1 <= m <= " + std::to_string(n) +
                        ", got m = " + std::to_string(m));
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);

  std::vector<std::size_t> chosen;
  chosen.reserve(m);
  std::vector<double> min_dist2(n, std::numeric_limits<double>::infinity());
  std::size_t next = pick(rng);
  for (std::size_t s = 0; s < m; ++s) {
    chosen.push_back(next);
    const Eigen::Vector3d& c = points[next];
    double best = -1.0;
    std::size_t best_index = 0;
    for (std::size_t i = 0; i < n; ++i) {
      min_dist2[i] = std::min(min_dist2[i], (points[i] - c).squaredNorm());
      if (min_dist2[i] > best) {
        best = min_dist2[i];
        best_index = i;
      }
    }
    next = best_index;
  }
  return chosen;
}

EdgeSet build_initial_graph(std::span<const Eigen::Vector3d> positions, std::size_t k_half) {
  const std::size_t n = positions.size();
  if (n < 2) throw ArgumentError("build_initial_graph: need at least 2 positions");
  if (k_half == 0) throw ArgumentError("build_initial_graph: k_half must be >= 1");
  const std::size_t k_eff = std::min(k_half, n - 1);

  std::set<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    order.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) order.emplace_back((positions[i] - positions[j]).squaredNorm(), j);
    }
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k_eff), order.end());
    for (std::size_t r = 0; r < k_eff; ++r) {
      const std::size_t j = order[r].second;
      pairs.emplace(std::min(i, j), std::max(i, j));
    }
  }

  DisjointSets sets(n);
  std::size_t components = n;
  for (const auto& [a, b] : pairs) {
    if (sets.unite(a, b)) --components;
  }
  std::size_t repairs = 0;
  while (components > 1) {
    // Closest node pair spanning two different components; ties by (a, b).
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_a = 0, best_b = 0;
    for (std::size_t a = 0; a < n; ++a) {
      const std::size_t ra = sets.find(a);
      for (std::size_t b = a + 1; b < n; ++b) {
        if (sets.find(b) == ra) continue;
        const double d2 = (positions[a] - positions[b]).squaredNorm();
        if (d2 < best) {
          best = d2;
          best_a = a;
          best_b = b;
        }
      }
    }
    pairs.emplace(best_a, best_b);
    sets.unite(best_a, best_b);
    --components;
    ++repairs;
  }

  EdgeSet result;
  result.node_count = n;
  result.repair_count = repairs;
  result.edges.reserve(pairs.size());
  for (const auto& [a, b] : pairs) {
    result.edges.push_back({a, b, (positions[a] - positions[b]).norm()});
  }
  return result;
}

GeodesicNeighbors geodesic_knn(const EdgeSet& edges, std::span<const Eigen::Vector3d> positions,
                               std::size_t k) {
  const std::size_t n = edges.node_count;
  if (positions.size() != n) throw ArgumentError("geodesic_knn: positions do not match edge set");
  if (k == 0 || k >= n) throw ArgumentError("geodesic_knn: need 1 <= k < node count");
  if (!edges.is_connected()) throw PreconditionError("geodesic_knn: edge set is not connected");

  std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
  for (const Edge& e : edges.edges) {
    const double len = (positions[e.a] - positions[e.b]).norm();
    adj[e.a].emplace_back(e.b, len);
    adj[e.b].emplace_back(e.a, len);
  }

  GeodesicNeighbors out;
  out.neighbors.resize(n);
  out.distances.resize(n);
  parallel_for(0, n, [&](std::size_t source) {
    using Entry = std::pair<double, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    std::vector<char> settled(n, 0);
    std::vector<Entry> found;
    dist[source] = 0.0;
    queue.emplace(0.0, source);
    while (!queue.empty()) {
      const auto [d, u] = queue.top();
      // Stop once k nodes are settled and nothing left can tie the k-th.
      if (found.size() >= k && d > found[k - 1].first) break;
      queue.pop();
      if (settled[u]) continue;
      settled[u] = 1;
      if (u != source) found.emplace_back(d, u);
      for (const auto& [v, len] : adj[u]) {
        const double nd = d + len;
        if (!settled[v] && nd < dist[v]) {
          dist[v] = nd;
          queue.emplace(nd, v);
        }
      }
    }
    std::sort(found.begin(), found.end());
    found.resize(k);
    for (const auto& [d, v] : found) {
      out.neighbors[source].push_back(v);
      out.distances[source].push_back(d);
    }
  });
  return out;
}

ControlGraph build_control_graph(const GaussianCloud& cloud, const GraphOptions& opts) {
  const std::size_t k = opts.neighbors;
  if (k < 2 || k % 2 != 0) throw ArgumentError("build_control_graph: k must be even and >= 2");
  if (opts.control_count > cloud.size())
    throw ArgumentError("build_control_graph: more control nodes requested than Gaussians");
  if (k >= opts.control_count)
    throw ArgumentError("build_control_graph: k must be smaller than the control count");

  ControlGraph graph;
  graph.k = k;
  graph.seed = opts.seed;
  graph.node_indices = farthest_point_sample(cloud.centers, opts.control_count, opts.seed);
  graph.rest_positions.reserve(graph.node_indices.size());
  for (std::size_t idx : graph.node_indices) graph.rest_positions.push_back(cloud.centers[idx]);

  graph.k_half_edges = build_initial_graph(graph.rest_positions, k / 2);
  GeodesicNeighbors knn = geodesic_knn(graph.k_half_edges, graph.rest_positions, k);
  graph.neighbors = std::move(knn.neighbors);
  graph.weights.resize(graph.size());
  for (std::size_t i = 0; i < graph.size(); ++i) {
    graph.weights[i].resize(k);
    for (std::size_t n = 0; n < k; ++n) {
      graph.weights[i][n] = opts.weighting == EdgeWeighting::Uniform
                                ? 1.0
                                : 1.0 / std::max(knn.distances[i][n], 1e-12);
    }
  }
  return graph;
}

}  // namespace gsd
