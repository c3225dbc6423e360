#include "gsd/arap.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include <Eigen/SVD>

#include "gsd/errors.hpp"
#include "gsd/parallel.hpp"

namespace gsd {
namespace {

void require_size(std::size_t got, std::size_t want, const char* what) {
  if (got != want)
    throw ArgumentError(std::string(what) + ": expected " + std::to_string(want) +
                        " entries, got " + std::to_string(got));
}

Rotations identity_rotations(std::size_t n) { return Rotations(n, Eigen::Matrix3d::Identity()); }

Positions snapped(std::span<const Eigen::Vector3d> initial, const HandleSet& handles) {
  Positions p(initial.begin(), initial.end());
  for (std::size_t h = 0; h < handles.size(); ++h) p[handles.indices[h]] = handles.targets[h];
  return p;
}

}  // namespace

void HandleSet::validate(std::size_t node_count) const {
  if (targets.size() != indices.size())
    throw ArgumentError("handle set: " + std::to_string(indices.size()) + " indices but " +
                        std::to_string(targets.size()) + " targets");
  std::set<std::size_t> seen;
  for (std::size_t h = 0; h < indices.size(); ++h) {
    if (indices[h] >= node_count)
      throw ArgumentError("handle index " + std::to_string(indices[h]) + " out of range");
    if (!seen.insert(indices[h]).second)
      throw ArgumentError("duplicate handle index " + std::to_string(indices[h]));
    if (!targets[h].allFinite()) throw ArgumentError("non-finite handle target " + std::to_string(h));
  }
}

bool FactorizedSystem::matches(std::size_t node_count,
                               std::span<const std::size_t> handle_indices) const {
  return node_count == node_count_ &&
         std::equal(handle_indices.begin(), handle_indices.end(), handle_indices_.begin(),
                    handle_indices_.end());
}

double arap_energy(const ControlGraph& graph, std::span<const Eigen::Vector3d> rest,
                   std::span<const Eigen::Vector3d> current,
                   std::span<const Eigen::Matrix3d> rotations) {
  const std::size_t m = graph.size();
  require_size(rest.size(), m, "arap_energy rest");
  require_size(current.size(), m, "arap_energy current");
  require_size(rotations.size(), m, "arap_energy rotations");
  double energy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (!current[i].allFinite() || !rest[i].allFinite() || !rotations[i].allFinite())
      throw ValidationError("non-finite input to arap_energy", i);
    for (std::size_t n = 0; n < graph.neighbors[i].size(); ++n) {
      const std::size_t j = graph.neighbors[i][n];
      const Eigen::Vector3d r = (current[i] - current[j]) - rotations[i] * (rest[i] - rest[j]);
      energy += graph.weights[i][n] * r.squaredNorm();
    }
  }
  return energy;
}

Eigen::Matrix3d fit_rotation(const Eigen::Matrix3d& covariance) {
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(covariance, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d& u = svd.matrixU();
  Eigen::Matrix3d v = svd.matrixV();
  Eigen::Matrix3d r = v * u.transpose();
  if (r.determinant() < 0.0) {
    // singular values are sorted descending
    v.col(2) *= -1.0;
    r = v * u.transpose();
  }
  return r;
}

Rotations fit_rotations(const ControlGraph& graph, std::span<const Eigen::Vector3d> rest,
                        std::span<const Eigen::Vector3d> current) {
  const std::size_t m = graph.size();
  require_size(rest.size(), m, "fit_rotations rest");
  require_size(current.size(), m, "fit_rotations current");
  Rotations rotations(m);
  parallel_for(0, m, [&](std::size_t i) {
    Eigen::Matrix3d s = Eigen::Matrix3d::Zero();
    for (std::size_t n = 0; n < graph.neighbors[i].size(); ++n) {
      const std::size_t j = graph.neighbors[i][n];
      s += graph.weights[i][n] * (rest[j] - rest[i]) * (current[j] - current[i]).transpose();
    }
    rotations[i] = fit_rotation(s);
  });
  return rotations;
}

Eigen::SparseMatrix<double> graph_laplacian(const ControlGraph& graph) {
  const auto m = static_cast<Eigen::Index>(graph.size());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(graph.size() * graph.k * 4);
  for (std::size_t i = 0; i < graph.size(); ++i) {
    for (std::size_t n = 0; n < graph.neighbors[i].size(); ++n) {
      const auto a = static_cast<Eigen::Index>(i);
      const auto b = static_cast<Eigen::Index>(graph.neighbors[i][n]);
      const double w = graph.weights[i][n];
      triplets.emplace_back(a, a, w);
      triplets.emplace_back(b, b, w);
      triplets.emplace_back(a, b, -w);
      triplets.emplace_back(b, a, -w);
    }
  }
  Eigen::SparseMatrix<double> laplacian(m, m);
  laplacian.setFromTriplets(triplets.begin(), triplets.end());
  return laplacian;
}

Eigen::MatrixX3d laplacian_rhs(const ControlGraph& graph, std::span<const Eigen::Vector3d> rest,
                               std::span<const Eigen::Matrix3d> rotations) {
  const std::size_t m = graph.size();
  require_size(rest.size(), m, "laplacian_rhs rest");
  require_size(rotations.size(), m, "laplacian_rhs rotations");
  Eigen::MatrixX3d b = Eigen::MatrixX3d::Zero(static_cast<Eigen::Index>(m), 3);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t n = 0; n < graph.neighbors[i].size(); ++n) {
      const std::size_t j = graph.neighbors[i][n];
      // Directed term i -> j contributes to both endpoints.
      const Eigen::Vector3d rotated = graph.weights[i][n] * (rotations[i] * (rest[i] - rest[j]));
      b.row(static_cast<Eigen::Index>(i)) += rotated.transpose();
      b.row(static_cast<Eigen::Index>(j)) -= rotated.transpose();
    }
  }
  return b;
}

FactorizedSystem assemble_system(const ControlGraph& graph, const HandleSet& handles) {
  const std::size_t m = graph.size();
  handles.validate(m);

  FactorizedSystem system;
  system.node_count_ = m;
  system.handle_indices_ = handles.indices;
  system.free_slot_.assign(m, 0);
  std::vector<std::ptrdiff_t> handle_slot(m, -1);
  for (std::size_t h = 0; h < handles.size(); ++h) {
    handle_slot[handles.indices[h]] = static_cast<std::ptrdiff_t>(h);
    system.free_slot_[handles.indices[h]] = -1;
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (system.free_slot_[i] == 0) {
      system.free_slot_[i] = static_cast<std::ptrdiff_t>(system.free_indices_.size());
      system.free_indices_.push_back(i);
    }
  }
  if (handles.size() == 0) {
    system.status_ = SolveStatus::NoHandles;
    return system;
  }
  system.status_ = SolveStatus::Ok;

  const Eigen::SparseMatrix<double> laplacian = graph_laplacian(graph);
  const auto nf = static_cast<Eigen::Index>(system.free_indices_.size());
  const auto nh = static_cast<Eigen::Index>(handles.size());
  std::vector<Eigen::Triplet<double>> ff, fh;
  for (Eigen::Index col = 0; col < laplacian.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(laplacian, col); it; ++it) {
      const std::ptrdiff_t row_slot = system.free_slot_[static_cast<std::size_t>(it.row())];
      if (row_slot < 0) continue;
      const std::ptrdiff_t col_free = system.free_slot_[static_cast<std::size_t>(it.col())];
      if (col_free >= 0) {
        ff.emplace_back(row_slot, col_free, it.value());
      } else {
        fh.emplace_back(row_slot, handle_slot[static_cast<std::size_t>(it.col())], it.value());
      }
    }
  }
  system.free_free_.resize(nf, nf);
  system.free_free_.setFromTriplets(ff.begin(), ff.end());
  system.free_handle_.resize(nf, nh);
  system.free_handle_.setFromTriplets(fh.begin(), fh.end());

  if (nf > 0) {
    auto factor = std::make_shared<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
    factor->compute(system.free_free_);
    if (factor->info() != Eigen::Success)
      throw NumericError("reduced Laplacian factorization failed");
    const Eigen::VectorXd pivots = factor->vectorD();
    const double scale = std::max(1.0, pivots.cwiseAbs().maxCoeff());
    if (pivots.minCoeff() <= 1e-12 * scale)
      throw NumericError("reduced Laplacian is singular: a graph component has no handle");
    system.factor_ = std::move(factor);
  }
  return system;
}

Positions solve_positions(const FactorizedSystem& system, const ControlGraph& graph,
                          std::span<const Eigen::Vector3d> rest,
                          std::span<const Eigen::Matrix3d> rotations, const HandleSet& handles) {
  const std::size_t m = graph.size();
  require_size(rest.size(), m, "solve_positions rest");
  require_size(rotations.size(), m, "solve_positions rotations");
  require_size(handles.targets.size(), handles.indices.size(), "solve_positions targets");
  if (!system.matches(m, handles.indices))
    throw ArgumentError("solve_positions: system was factored for a different graph or handle set");
  if (system.status() == SolveStatus::NoHandles)
    throw PreconditionError("solve_positions: no handles, system has a rigid null space");

  Positions out(m);
  for (std::size_t h = 0; h < handles.size(); ++h) out[handles.indices[h]] = handles.targets[h];
  if (system.free_indices().empty()) return out;

  const Eigen::MatrixX3d b = laplacian_rhs(graph, rest, rotations);
  const auto nf = static_cast<Eigen::Index>(system.free_indices().size());
  Eigen::MatrixX3d rhs(nf, 3);
  for (Eigen::Index f = 0; f < nf; ++f) rhs.row(f) = b.row(static_cast<Eigen::Index>(system.free_indices()[f]));
  Eigen::MatrixX3d fixed(static_cast<Eigen::Index>(handles.size()), 3);
  for (std::size_t h = 0; h < handles.size(); ++h)
    fixed.row(static_cast<Eigen::Index>(h)) = handles.targets[h].transpose();
  rhs -= system.free_handle_ * fixed;

  const Eigen::MatrixX3d solved = system.factor_->solve(rhs);
  for (Eigen::Index f = 0; f < nf; ++f)
    out[system.free_indices()[f]] = solved.row(f).transpose();
  return out;
}

namespace {

DeformResult run_iterations(const FactorizedSystem& system, const ControlGraph& graph,
                            const HandleSet& handles, Positions positions, Rotations rotations,
                            bool initial_solve, int iterations) {
  const Positions& rest = graph.rest_positions;
  DeformResult result;
  result.energy_trace.push_back(arap_energy(graph, rest, positions, rotations));
  if (initial_solve) {
    positions = solve_positions(system, graph, rest, rotations, handles);
    result.energy_trace.push_back(arap_energy(graph, rest, positions, rotations));
  }
  for (int it = 0; it < iterations; ++it) {
    rotations = fit_rotations(graph, rest, positions);
    result.energy_trace.push_back(arap_energy(graph, rest, positions, rotations));
    positions = solve_positions(system, graph, rest, rotations, handles);
    result.energy_trace.push_back(arap_energy(graph, rest, positions, rotations));
  }
  result.positions = std::move(positions);
  result.rotations = std::move(rotations);
  return result;
}

DeformResult rest_pose(const ControlGraph& graph) {
  DeformResult result;
  result.positions = graph.rest_positions;
  result.rotations = identity_rotations(graph.size());
  result.energy_trace = {0.0};
  result.status = SolveStatus::NoHandles;
  return result;
}

}  // namespace

DeformResult deform(const ControlGraph& graph, const HandleSet& handles, int iterations) {
  if (iterations < 1) throw ArgumentError("deform: iterations must be >= 1");
  const FactorizedSystem system = assemble_system(graph, handles);
  if (system.status() == SolveStatus::NoHandles) return rest_pose(graph);
  return run_iterations(system, graph, handles, snapped(graph.rest_positions, handles),
                        identity_rotations(graph.size()), true, iterations);
}

DeformResult deform(const FactorizedSystem& system, const ControlGraph& graph,
                    const HandleSet& handles, std::span<const Eigen::Vector3d> initial,
                    int iterations) {
  if (iterations < 1) throw ArgumentError("deform: iterations must be >= 1");
  require_size(initial.size(), graph.size(), "deform initial positions");
  handles.validate(graph.size());
  if (!system.matches(graph.size(), handles.indices))
    throw ArgumentError("deform: system was factored for a different graph or handle set");
  if (system.status() == SolveStatus::NoHandles) return rest_pose(graph);
  Positions start = snapped(initial, handles);
  return run_iterations(system, graph, handles, start, identity_rotations(graph.size()), false,
                        iterations);
}

}  // namespace gsd
