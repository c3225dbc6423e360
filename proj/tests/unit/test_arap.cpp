#include <cmath>
#include <random>

#include "doctest.h"

#include "gsd/arap.hpp"
#include "gsd/errors.hpp"
#include "oracles.hpp"

using gsd::ControlGraph;
using gsd::HandleSet;
using gsd::Positions;
using gsd::Rotations;
using M3 = Eigen::Matrix3d;
using V = Eigen::Vector3d;

namespace {

ControlGraph make_graph(Positions pts, std::vector<std::vector<std::size_t>> nbrs) {
  ControlGraph g;
  g.rest_positions = std::move(pts);
  g.node_indices.resize(g.rest_positions.size());
  for (std::size_t i = 0; i < g.size(); ++i) g.node_indices[i] = i;
  for (const auto& nb : nbrs) g.weights.emplace_back(nb.size(), 1.0);
  g.neighbors = std::move(nbrs);
  g.k = g.neighbors.empty() ? 0 : g.neighbors[0].size();
  return g;
}

ControlGraph chain(std::size_t n, double spacing = 1.0) {
  Positions pts;
  std::vector<std::vector<std::size_t>> nbrs(n);
  for (std::size_t i = 0; i < n; ++i) {
    pts.emplace_back(spacing * static_cast<double>(i), 0.0, 0.0);
    if (i > 0) nbrs[i].push_back(i - 1);
    if (i + 1 < n) nbrs[i].push_back(i + 1);
  }
  return make_graph(pts, nbrs);
}

Rotations identities(std::size_t n) { return Rotations(n, M3::Identity()); }

Rotations random_rotations(std::size_t n, std::mt19937_64& rng) {
  Rotations r;
  for (std::size_t i = 0; i < n; ++i) r.push_back(oracle::random_rotation(rng));
  return r;
}

double max_diff(const Positions& a, const Positions& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, (a[i] - b[i]).cwiseAbs().maxCoeff());
  return d;
}

}  // namespace

TEST_CASE("energy of simple configurations") {
  const auto g = oracle::random_graph(20, 1);
  const auto& rest = g.rest_positions;
  CHECK(gsd::arap_energy(g, rest, rest, identities(g.size())) == 0.0);

  Positions moved = rest;
  for (auto& p : moved) p += V(0.3, -2.0, 5.0);
  CHECK(gsd::arap_energy(g, rest, moved, identities(g.size())) == doctest::Approx(0.0).epsilon(1e-20));

  const V d(0.5, -1.0, 2.0);
  const auto pair = make_graph({V::Zero(), d}, {{1}, {}});
  const Positions doubled = {V::Zero(), 2 * d};
  CHECK(gsd::arap_energy(pair, pair.rest_positions, doubled, identities(2)) ==
        doctest::Approx(d.squaredNorm()));

  Positions bad = rest;
  bad[3].y() = NAN;
  CHECK_THROWS_AS(gsd::arap_energy(g, rest, bad, identities(g.size())), gsd::ValidationError);
  CHECK_THROWS_AS(gsd::arap_energy(g, rest, Positions(3), identities(g.size())), gsd::ArgumentError);
}

TEST_CASE("rigidly transformed configurations have zero energy") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = oracle::random_graph(40, trial);
    const M3 r = oracle::random_rotation(rng);
    const V t = oracle::random_vector(rng, 3.0);
    Positions moved;
    for (const auto& p : g.rest_positions) moved.push_back(r * p + t);
    CHECK(gsd::arap_energy(g, g.rest_positions, moved, Rotations(g.size(), r)) <= 1e-12);
  }
}

TEST_CASE("rotation fitting") {
  std::mt19937_64 rng(9);
  const auto g = oracle::random_graph(50, 2);
  const auto& rest = g.rest_positions;

  SUBCASE("rest pose gives identity") {
    for (const auto& r : gsd::fit_rotations(g, rest, rest)) CHECK(r.isApprox(M3::Identity(), 1e-9));
  }
  SUBCASE("global rotation is recovered") {
    const M3 r0 = oracle::random_rotation(rng);
    Positions moved;
    for (const auto& p : rest) moved.push_back(r0 * p + V(1, 2, 3));
    for (const auto& r : gsd::fit_rotations(g, rest, moved)) CHECK((r - r0).cwiseAbs().maxCoeff() < 1e-6);
  }
  SUBCASE("mirrored coplanar neighborhood") {
    M3 s = M3::Zero();
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 6; ++i) {
      const V p(u(rng), u(rng), 0.0);
      const V q(-p.x(), p.y(), p.z());  // mirror image across the yz plane
      s += p * q.transpose();
    }
    const M3 r = gsd::fit_rotation(s);
    CHECK(r.determinant() == doctest::Approx(1.0));
    CHECK((r.transpose() * r - M3::Identity()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((r * s).trace() >= oracle::best_sampled_trace(s, 100000, rng) - 1e-12);
  }
  SUBCASE("outputs are proper rotations") {
    for (int trial = 0; trial < 200; ++trial) {
      M3 s = M3::Random();
      if (trial % 3 == 0) s.col(2).setZero();
      if (trial % 3 == 1) s = V::Random() * V::Random().transpose();
      const M3 r = gsd::fit_rotation(s);
      CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-9));
      CHECK((r.transpose() * r - M3::Identity()).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("assembled system") {
  SUBCASE("path with both ends pinned") {
    const auto g = chain(3);
    const HandleSet h{{0, 2}, {V::Zero(), V(2, 0, 0)}};
    const auto sys = gsd::assemble_system(g, h);
    REQUIRE(sys.reduced_matrix().rows() == 1);
    // ŵ = w_10 + w_01 = 2 on each side of node 1
    CHECK(sys.reduced_matrix().coeff(0, 0) == doctest::Approx(4.0));
    CHECK(sys.free_indices() == std::vector<std::size_t>{1});
    CHECK(sys.free_slot(0) == -1);
  }
  SUBCASE("all nodes are handles") {
    const auto g = oracle::random_graph(12, 3);
    HandleSet h;
    for (std::size_t i = 0; i < g.size(); ++i) {
      h.indices.push_back(i);
      h.targets.push_back(g.rest_positions[i] * 2.0);
    }
    const auto sys = gsd::assemble_system(g, h);
    CHECK(sys.reduced_matrix().rows() == 0);
    CHECK(gsd::solve_positions(sys, g, g.rest_positions, identities(g.size()), h) == h.targets);
  }
  SUBCASE("reduced matrix equals half the finite-difference Hessian") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 5; ++trial) {
      const auto g = oracle::random_graph(10 + 5 * trial, 40 + trial, trial % 2 ? gsd::EdgeWeighting::InverseGeodesic
                                                                        : gsd::EdgeWeighting::Uniform);
      const auto h = oracle::random_handles(g, 3, rng);
      const auto sys = gsd::assemble_system(g, h);
      const auto rot = random_rotations(g.size(), rng);
      const Positions base = g.rest_positions;
      const Eigen::VectorXd g0 = oracle::fd_gradient(g, base, rot, 1e-2);
      const Eigen::MatrixXd reduced = Eigen::MatrixXd(sys.reduced_matrix());
      // the energy is quadratic in positions, so large steps stay exact
      const double eps = 0.5;
      for (std::size_t a = 0; a < sys.free_indices().size(); ++a) {
        Positions bumped = base;
        bumped[sys.free_indices()[a]].x() += eps;
        const Eigen::VectorXd g1 = oracle::fd_gradient(g, bumped, rot, 1e-2);
        for (std::size_t b = 0; b < sys.free_indices().size(); ++b) {
          const double h2 = (g1[3 * sys.free_indices()[b]] - g0[3 * sys.free_indices()[b]]) / eps;
          CHECK(reduced(b, a) == doctest::Approx(0.5 * h2).epsilon(1e-5).scale(1.0));
        }
      }
    }
  }
  SUBCASE("invalid handle sets") {
    const auto g = chain(4);
    CHECK_THROWS_AS(gsd::assemble_system(g, {{0, 0}, {V::Zero(), V::Zero()}}), gsd::ArgumentError);
    CHECK_THROWS_AS(gsd::assemble_system(g, {{9}, {V::Zero()}}), gsd::ArgumentError);
    CHECK_THROWS_AS(gsd::assemble_system(g, {{1}, {}}), gsd::ArgumentError);
    CHECK_THROWS_AS(gsd::assemble_system(g, {{1}, {V(NAN, 0, 0)}}), gsd::ArgumentError);
  }
  SUBCASE("component without handles is singular") {
    const auto g = make_graph({V(0, 0, 0), V(1, 0, 0), V(5, 0, 0), V(6, 0, 0)}, {{1}, {0}, {3}, {2}});
    CHECK_THROWS_AS(gsd::assemble_system(g, {{0}, {V::Zero()}}), gsd::NumericError);
  }
  SUBCASE("no handles") {
    const auto sys = gsd::assemble_system(chain(3), {});
    CHECK(sys.status() == gsd::SolveStatus::NoHandles);
  }
}

TEST_CASE("position solve") {
  std::mt19937_64 rng(21);
  SUBCASE("shared translation moves every free node by it") {
    for (int trial = 0; trial < 10; ++trial) {
      const auto g = oracle::random_graph(30, 100 + trial);
      auto h = oracle::random_handles(g, 4, rng);
      const V t = oracle::random_vector(rng, 2.0);
      for (std::size_t k = 0; k < h.size(); ++k) h.targets[k] = g.rest_positions[h.indices[k]] + t;
      const auto sys = gsd::assemble_system(g, h);
      const auto p = gsd::solve_positions(sys, g, g.rest_positions, identities(g.size()), h);
      for (std::size_t i = 0; i < g.size(); ++i) CHECK((p[i] - g.rest_positions[i] - t).norm() < 1e-9);
    }
  }
  SUBCASE("dense least-squares oracle") {
    for (int trial = 0; trial < 20; ++trial) {
      const auto g = oracle::random_graph(8 + trial, 200 + trial);
      const auto h = oracle::random_handles(g, 1 + trial % 4, rng);
      const auto rot = random_rotations(g.size(), rng);
      const auto sys = gsd::assemble_system(g, h);
      const auto p = gsd::solve_positions(sys, g, g.rest_positions, rot, h);
      CHECK(max_diff(p, oracle::dense_solve(g, rot, h)) < 1e-8);
    }
  }
  SUBCASE("handle entries are copied bit-exactly") {
    const auto g = oracle::random_graph(25, 7);
    const auto h = oracle::random_handles(g, 5, rng);
    const auto sys = gsd::assemble_system(g, h);
    const auto p = gsd::solve_positions(sys, g, g.rest_positions, random_rotations(g.size(), rng), h);
    for (std::size_t k = 0; k < h.size(); ++k) CHECK(p[h.indices[k]] == h.targets[k]);
  }
  SUBCASE("mismatched system") {
    const auto g = oracle::random_graph(25, 7);
    const auto h = oracle::random_handles(g, 5, rng);
    const auto other = oracle::random_handles(g, 5, rng);
    const auto sys = gsd::assemble_system(g, h);
    CHECK_THROWS_AS(gsd::solve_positions(sys, g, g.rest_positions, identities(g.size()), other), gsd::ArgumentError);
    CHECK_THROWS_AS(gsd::solve_positions(sys, g, g.rest_positions, identities(3), h), gsd::ArgumentError);
  }
}

TEST_CASE("gradient is 2 (L p' - b)") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const auto g = oracle::random_graph(12 + trial, 300 + trial);
    const auto rot = random_rotations(g.size(), rng);
    Positions cur;
    for (const auto& p : g.rest_positions) cur.push_back(p + oracle::random_vector(rng, 0.3));
    const Eigen::SparseMatrix<double> lap = gsd::graph_laplacian(g);
    const Eigen::MatrixX3d b = gsd::laplacian_rhs(g, g.rest_positions, rot);
    Eigen::MatrixX3d p(static_cast<Eigen::Index>(g.size()), 3);
    for (std::size_t i = 0; i < g.size(); ++i) p.row(static_cast<Eigen::Index>(i)) = cur[i].transpose();
    const Eigen::MatrixX3d analytic = 2.0 * (lap * p - b);
    const Eigen::VectorXd fd = oracle::fd_gradient(g, cur, rot);
    Eigen::VectorXd flat(fd.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      for (int a = 0; a < 3; ++a) flat[static_cast<Eigen::Index>(3 * i + a)] = analytic(static_cast<Eigen::Index>(i), a);
    CHECK((flat - fd).norm() / fd.norm() < 1e-4);
  }
}

TEST_CASE("deform") {
  SUBCASE("default iteration count") {
    const auto g = chain(5);
    const auto r = gsd::deform(g, {{0}, {V(1, 1, 1)}});
    // rest, initial solve, then a rotation and a position step per iteration
    CHECK(r.energy_trace.size() == 2 + 2 * 3);
  }
  SUBCASE("three-node chain with translated ends") {
    const auto g = chain(3);
    const V t(0.4, -1.0, 2.5);
    const auto r = gsd::deform(g, {{0, 2}, {g.rest_positions[0] + t, g.rest_positions[2] + t}}, 1);
    for (std::size_t i = 0; i < 3; ++i) CHECK((r.positions[i] - g.rest_positions[i] - t).norm() < 1e-12);
    CHECK(r.energy_trace.back() < 1e-20);
    CHECK(r.status == gsd::SolveStatus::Ok);
  }
  SUBCASE("twenty-node chain bent by 30 degrees converges to the long-run value") {
    const std::size_t n = 20;
    Positions pts;
    std::vector<std::vector<std::size_t>> nbrs(n);
    for (std::size_t i = 0; i < n; ++i) {
      pts.emplace_back(static_cast<double>(i), 0.0, 0.0);
      for (std::size_t j = (i >= 2 ? i - 2 : 0); j <= std::min(n - 1, i + 2); ++j)
        if (j != i) nbrs[i].push_back(j);
    }
    const auto g = make_graph(pts, nbrs);
    const M3 r30 = Eigen::AngleAxisd(M_PI / 6, V::UnitZ()).toRotationMatrix();
    const HandleSet h{{0, 1, n - 2, n - 1}, {pts[0], pts[1], r30 * pts[n - 2], r30 * pts[n - 1]}};
    const double e50 = gsd::deform(g, h, 50).energy_trace.back();
    const double e2000 = gsd::deform(g, h, 2000).energy_trace.back();
    CHECK(std::abs(e50 - e2000) < 1e-4);
  }
  SUBCASE("every half-step is non-increasing") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 10; ++trial) {
      const auto g = oracle::random_graph(20 + 10 * trial, 400 + trial);
      const auto r = gsd::deform(g, oracle::random_handles(g, 1 + trial, rng), 6);
      for (std::size_t k = 1; k < r.energy_trace.size(); ++k)
        CHECK(r.energy_trace[k] <= r.energy_trace[k - 1] + 1e-9);
      for (const auto& rot : r.rotations) {
        CHECK((rot.transpose() * rot - M3::Identity()).cwiseAbs().maxCoeff() < 1e-6);
        CHECK(rot.determinant() > 0.0);
      }
    }
  }
  SUBCASE("no handles returns the rest pose") {
    const auto g = chain(4);
    const auto r = gsd::deform(g, {});
    CHECK(r.status == gsd::SolveStatus::NoHandles);
    CHECK(r.positions == g.rest_positions);
  }
  SUBCASE("warm start reuses the factorization") {
    std::mt19937_64 rng(3);
    const auto g = oracle::random_graph(60, 5);
    auto h = oracle::random_handles(g, 6, rng);
    const auto sys = gsd::assemble_system(g, h);
    const auto first = gsd::deform(g, h);
    for (auto& t : h.targets) t += V(0.01, 0.0, 0.0);
    const auto second = gsd::deform(sys, g, h, first.positions);
    for (std::size_t k = 0; k < h.size(); ++k) CHECK(second.positions[h.indices[k]] == h.targets[k]);
    CHECK(second.energy_trace.size() == 1 + 2 * 3);
    auto other = h;
    other.indices[0] = (other.indices[0] + 1) % g.size();
    if (std::find(h.indices.begin(), h.indices.end(), other.indices[0]) == h.indices.end())
      CHECK_THROWS_AS(gsd::deform(sys, g, other, first.positions), gsd::ArgumentError);
    CHECK_THROWS_AS(gsd::deform(g, h, 0), gsd::ArgumentError);
  }
}
