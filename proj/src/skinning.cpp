#include "gsd/skinning.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Geometry>

#include "gsd/errors.hpp"
#include "gsd/parallel.hpp"

namespace gsd {

SkinBinding bind(const GaussianCloud& cloud, const ControlGraph& graph, std::size_t k_tilde) {
  if (cloud.size() == 0) throw ArgumentError("bind: cloud is empty");
  const std::size_t m = graph.size();
  if (m == 0) throw ArgumentError("bind: control graph is empty");
  if (k_tilde == 0 || k_tilde > m)
    throw ArgumentError("bind: k_tilde must be in [1, " + std::to_string(m) + "]");

  Eigen::Vector3d lo = cloud.centers.front(), hi = cloud.centers.front();
  for (const auto& c : cloud.centers) {
    lo = lo.cwiseMin(c);
    hi = hi.cwiseMax(c);
  }
  const double diagonal = (hi - lo).norm();
  const double eps = 1e-8 * (diagonal > 0.0 ? diagonal : 1.0);

  SkinBinding binding;
  binding.per_gaussian = k_tilde;
  binding.control_ids.resize(cloud.size() * k_tilde);
  binding.weights.resize(cloud.size() * k_tilde);
  const auto& controls = graph.rest_positions;
  parallel_for(0, cloud.size(), [&](std::size_t g) {
    // Insertion into a small sorted buffer of (distance^2, id); ties keep the
    // smaller id because candidates are visited in id order.
    std::vector<std::pair<double, std::size_t>> best;
    best.reserve(k_tilde + 1);
    const Eigen::Vector3d& x = cloud.centers[g];
    for (std::size_t j = 0; j < m; ++j) {
      const double d2 = (controls[j] - x).squaredNorm();
      if (best.size() == k_tilde && d2 >= best.back().first) continue;
      auto pos = std::upper_bound(best.begin(), best.end(), d2,
                                  [](double v, const auto& e) { return v < e.first; });
      best.insert(pos, {d2, j});
      if (best.size() > k_tilde) best.pop_back();
    }
    double total = 0.0;
    for (std::size_t s = 0; s < k_tilde; ++s) {
      const double w = 1.0 / (std::sqrt(best[s].first) + eps);
      binding.control_ids[g * k_tilde + s] = best[s].second;
      binding.weights[g * k_tilde + s] = w;
      total += w;
    }
    for (std::size_t s = 0; s < k_tilde; ++s) binding.weights[g * k_tilde + s] /= total;
  });
  return binding;
}

GaussianCloud apply_lbs(const GaussianCloud& cloud, const SkinBinding& binding,
                        const ControlGraph& graph, const DeformResult& result) {
  const std::size_t m = graph.size();
  if (binding.size() != cloud.size())
    throw ArgumentError("apply_lbs: binding covers " + std::to_string(binding.size()) +
                        " Gaussians, cloud has " + std::to_string(cloud.size()));
  if (result.positions.size() != m || result.rotations.size() != m)
    throw ArgumentError("apply_lbs: deform result does not match the control graph");

  std::vector<Eigen::Quaterniond> node_quats(m);
  for (std::size_t j = 0; j < m; ++j) node_quats[j] = Eigen::Quaterniond(result.rotations[j]);

  GaussianCloud out = cloud;
  const std::size_t k = binding.per_gaussian;
  const auto& rest = graph.rest_positions;
  parallel_for(0, cloud.size(), [&](std::size_t g) {
    const Eigen::Vector3d& mu = cloud.centers[g];
    const Eigen::Quaterniond& q = cloud.rotations[g];
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    Eigen::Vector4d blended = Eigen::Vector4d::Zero();
    Eigen::Vector4d first;
    Eigen::Vector4d heaviest;
    double heaviest_weight = -1.0;
    for (std::size_t s = 0; s < k; ++s) {
      const std::size_t j = binding.control_ids[g * k + s];
      const double w = binding.weights[g * k + s];
      center += w * (result.rotations[j] * (mu - rest[j]) + result.positions[j]);
      Eigen::Vector4d term = (node_quats[j] * q).coeffs();
      if (s == 0) {
        first = term;
      } else if (term.dot(first) < 0.0) {
        term = -term;
      }
      if (w > heaviest_weight) {
        heaviest_weight = w;
        heaviest = term;
      }
      blended += w * term;
    }
    const double norm = blended.norm();
    Eigen::Quaterniond rotation;
    rotation.coeffs() = norm < 1e-8 ? heaviest.normalized() : Eigen::Vector4d(blended / norm);
    out.centers[g] = center;
    out.rotations[g] = rotation;
  });
  return out;
}

}  // namespace gsd
