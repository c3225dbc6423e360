#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "gsd/config.hpp"
#include "gsd/deform_graph.hpp"

namespace gsd {

using Rotations = std::vector<Eigen::Matrix3d>;

/// Control nodes pinned to target positions.
struct HandleSet {
  std::vector<std::size_t> indices;
  Positions targets;

  std::size_t size() const { return indices.size(); }
  /// Throws ArgumentError unless indices are distinct, < node_count, and
  /// each has a finite target.
  void validate(std::size_t node_count) const;
};

enum class SolveStatus {
  Ok,
  NoHandles,  // rigid null space: rest pose returned unchanged
};

struct DeformResult {
  Positions positions;
  Rotations rotations;
  /// Energy after initialization and after every half-step, in order.
  std::vector<double> energy_trace;
  SolveStatus status = SolveStatus::Ok;
};

/// Reduced graph Laplacian over the free (non-handle) nodes, factored once
/// and reused while the handle index set is unchanged.
class FactorizedSystem {
 public:
  FactorizedSystem() = default;

  SolveStatus status() const { return status_; }
  std::size_t node_count() const { return node_count_; }
  const std::vector<std::size_t>& handle_indices() const { return handle_indices_; }
  const std::vector<std::size_t>& free_indices() const { return free_indices_; }
  /// Free-node slot of node i, or -1 for a handle.
  std::ptrdiff_t free_slot(std::size_t node) const { return free_slot_[node]; }
  const Eigen::SparseMatrix<double>& reduced_matrix() const { return free_free_; }

  /// True when built for this graph size and exactly this handle sequence.
  bool matches(std::size_t node_count, std::span<const std::size_t> handle_indices) const;

 private:
  friend FactorizedSystem assemble_system(const ControlGraph&, const HandleSet&);
  friend Positions solve_positions(const FactorizedSystem&, const ControlGraph&,
                                   std::span<const Eigen::Vector3d>,
                                   std::span<const Eigen::Matrix3d>, const HandleSet&);

  SolveStatus status_ = SolveStatus::NoHandles;
  std::size_t node_count_ = 0;
  std::vector<std::size_t> handle_indices_;
  std::vector<std::size_t> free_indices_;
  std::vector<std::ptrdiff_t> free_slot_;
  Eigen::SparseMatrix<double> free_free_;
  Eigen::SparseMatrix<double> free_handle_;
  // Immutable once built; shared so the system stays copyable.
  std::shared_ptr<const Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> factor_;
};

/// Sum over directed edges of w_ij |(p'_i - p'_j) - R_i (p_i - p_j)|^2.
double arap_energy(const ControlGraph& graph, std::span<const Eigen::Vector3d> rest,
                   std::span<const Eigen::Vector3d> current,
                   std::span<const Eigen::Matrix3d> rotations);

/// Proper rotation R maximizing trace(R S); reflections are corrected by
/// flipping the singular vector of the smallest singular value.
Eigen::Matrix3d fit_rotation(const Eigen::Matrix3d& covariance);

/// Per-node rotation minimizing that node's energy term at fixed positions.
Rotations fit_rotations(const ControlGraph& graph, std::span<const Eigen::Vector3d> rest,
                        std::span<const Eigen::Vector3d> current);

/// Symmetric Laplacian of w_ij + w_ji.
Eigen::SparseMatrix<double> graph_laplacian(const ControlGraph& graph);

/// Right-hand side b (one row per node) such that the energy gradient with
/// respect to positions is 2 (L p' - b).
Eigen::MatrixX3d laplacian_rhs(const ControlGraph& graph, std::span<const Eigen::Vector3d> rest,
                               std::span<const Eigen::Matrix3d> rotations);

FactorizedSystem assemble_system(const ControlGraph& graph, const HandleSet& handles);

/// Minimizes the energy over free positions at fixed rotations. Handle
/// entries of the result are copied from the targets.
Positions solve_positions(const FactorizedSystem& system, const ControlGraph& graph,
                          std::span<const Eigen::Vector3d> rest,
                          std::span<const Eigen::Matrix3d> rotations, const HandleSet& handles);

/// Cold start: rest pose with handles snapped, followed by one position
/// solve at identity rotations, then `iterations` rotation/position rounds.
DeformResult deform(const ControlGraph& graph, const HandleSet& handles,
                    int iterations = defaults::kSolverIterations);

/// Warm start from `initial` (handles are re-snapped to their targets)
/// reusing an existing factorization.
DeformResult deform(const FactorizedSystem& system, const ControlGraph& graph,
                    const HandleSet& handles, std::span<const Eigen::Vector3d> initial,
                    int iterations = defaults::kSolverIterations);

}  // namespace gsd
