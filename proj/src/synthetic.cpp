#include "gsd/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace gsd::synthetic {
namespace {

Eigen::Quaterniond random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::Quaterniond q(normal(rng), normal(rng), normal(rng), normal(rng));
  q.normalize();
  return q;
}

void append_gaussian(GaussianCloud& cloud, const Eigen::Vector3d& center, double scale_mean,
                     std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal;
  cloud.centers.push_back(center);
  cloud.opacities.push_back(0.05 + 0.9 * unit(rng));
  cloud.scales.push_back(scale_mean * (0.5 + Eigen::Vector3d(unit(rng), unit(rng), unit(rng)).array()).matrix());
  cloud.rotations.push_back(random_rotation(rng));
  cloud.colors_dc.push_back(Eigen::Vector3d(normal(rng), normal(rng), normal(rng)));
}

Eigen::Vector3d in_ball(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  for (;;) {
    Eigen::Vector3d p(sym(rng), sym(rng), sym(rng));
    if (p.squaredNorm() <= 1.0) return p;
  }
}

}  // namespace

GaussianCloud random_cloud(std::size_t n, std::uint64_t seed, double extent, std::size_t rest_count) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> sym(-extent, extent);
  std::normal_distribution<float> normal;
  GaussianCloud cloud;
  cloud.rest_count = rest_count;
  for (std::size_t i = 0; i < n; ++i)
    append_gaussian(cloud, Eigen::Vector3d(sym(rng), sym(rng), sym(rng)), 0.02 * extent, rng);
  cloud.colors_rest.resize(n * rest_count);
  for (float& v : cloud.colors_rest) v = normal(rng);
  return cloud;
}

GaussianCloud blob(std::size_t n, const Eigen::Vector3d& center, double radius, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  GaussianCloud cloud;
  for (std::size_t i = 0; i < n; ++i) append_gaussian(cloud, center + radius * in_ball(rng), 0.02 * radius, rng);
  return cloud;
}

Dumbbell dumbbell(std::size_t n, std::uint64_t seed, double blob_radius, double separation,
                  double bridge_radius) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Dumbbell d;
  d.blob_radius = blob_radius;
  d.bridge_radius = bridge_radius;
  d.left_center = {-0.5 * separation, 0.0, 0.0};
  d.right_center = {0.5 * separation, 0.0, 0.0};

  // Split by volume share: two balls plus the cylinder between their surfaces.
  const double half_gap = 0.5 * separation - blob_radius;
  const double ball_volume = 4.0 / 3.0 * M_PI * std::pow(blob_radius, 3);
  const double bridge_volume = M_PI * bridge_radius * bridge_radius * 2.0 * half_gap;
  const double bridge_share = std::max(0.05, bridge_volume / (2.0 * ball_volume + bridge_volume));
  const auto bridge_n = static_cast<std::size_t>(std::round(bridge_share * static_cast<double>(n)));
  const std::size_t left_n = (n - bridge_n) / 2;
  const std::size_t right_n = n - bridge_n - left_n;

  const double scale = 0.02 * blob_radius;
  for (std::size_t i = 0; i < left_n; ++i) {
    append_gaussian(d.cloud, d.left_center + blob_radius * in_ball(rng), scale, rng);
    d.parts.push_back(DumbbellPart::LeftBlob);
  }
  for (std::size_t i = 0; i < bridge_n; ++i) {
    const double x = -half_gap + 2.0 * half_gap * unit(rng);
    const double r = bridge_radius * std::sqrt(unit(rng));
    const double phi = 2.0 * M_PI * unit(rng);
    append_gaussian(d.cloud, Eigen::Vector3d(x, r * std::cos(phi), r * std::sin(phi)), scale, rng);
    d.parts.push_back(DumbbellPart::Bridge);
  }
  for (std::size_t i = 0; i < right_n; ++i) {
    append_gaussian(d.cloud, d.right_center + blob_radius * in_ball(rng), scale, rng);
    d.parts.push_back(DumbbellPart::RightBlob);
  }
  return d;
}

}  // namespace gsd::synthetic
