#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "qsfrac/crack_set.hpp"
#include "qsfrac/mesh.hpp"

namespace qsfrac {

/// Corner-to-DOF map of the discrete admissible space for a crack set.
///
/// Corners of triangles meeting at a vertex share a DOF iff they are connected
/// through uncracked interior edges of the fan around that vertex. A crack tip
/// inside a closed fan therefore keeps a single DOF. A DOF is constrained iff
/// one of its corners is an endpoint of an uncracked Dirichlet edge of the
/// corner's triangle.
class DofTopology {
 public:
  static std::shared_ptr<const DofTopology> build(const Mesh& mesh, const CrackSet& crack);

  const Mesh& mesh() const { return *mesh_; }
  const CrackSet& crack() const { return crack_; }
  std::size_t dof_count() const { return vertex_of_dof_.size(); }
  int dof(TriId t, int corner) const { return corner_dof_[3 * t + corner]; }
  std::array<int, 3> triangle_dofs(TriId t) const {
    return {corner_dof_[3 * t], corner_dof_[3 * t + 1], corner_dof_[3 * t + 2]};
  }
  VertexId vertex_of_dof(int d) const { return vertex_of_dof_[d]; }
  bool is_constrained(int d) const { return constrained_[d] != 0; }
  const std::vector<int>& constrained_dofs() const { return constrained_list_; }
  const std::vector<int>& free_dofs() const { return free_list_; }
  // Position of each DOF in free_dofs() or -1.
  int free_index(int d) const { return free_index_[d]; }

  /// Boundary values of the constrained DOFs for nodal data psi.
  std::vector<double> constrained_values(std::span<const double> psi_nodal) const;

 private:
  DofTopology() = default;
  const Mesh* mesh_ = nullptr;
  CrackSet crack_;
  std::vector<int> corner_dof_;
  std::vector<VertexId> vertex_of_dof_;
  std::vector<char> constrained_;
  std::vector<int> constrained_list_, free_list_, free_index_;
};

using TopologyPtr = std::shared_ptr<const DofTopology>;

/// Piecewise-linear field over a DofTopology. Jumps vanish across every
/// uncracked interior edge by construction.
class BrokenField {
 public:
  BrokenField() = default;
  BrokenField(TopologyPtr topology, std::vector<double> values);

  /// DOF-wise interpolation of nodal values (constrained DOFs take psi by the
  /// same rule, since they take the nodal value of their vertex).
  static BrokenField interpolate(TopologyPtr topology, std::span<const double> nodal);
  static BrokenField interpolate(TopologyPtr topology, const std::function<double(const Vec2&)>& fn);

  const DofTopology& topology() const { return *topology_; }
  const TopologyPtr& topology_ptr() const { return topology_; }
  const Mesh& mesh() const { return topology_->mesh(); }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& mutable_values() { return values_; }
  bool valid() const { return topology_ != nullptr; }

  double corner_value(TriId t, int corner) const { return values_[topology_->dof(t, corner)]; }

  std::vector<Vec2> gradient() const;
  std::vector<double> centroid_values() const;
  /// Per surface-force edge midpoint values (mesh.edges_with_label order).
  std::vector<double> trace_on_surface_part() const;

  /// Same field on a finer topology (a crack superset). Values, gradients
  /// and jumps are preserved.
  BrokenField embed(TopologyPtr finer) const;

 private:
  TopologyPtr topology_;
  std::vector<double> values_;
};

/// P1 gradient of a triangle from its three corner values.
Vec2 triangle_gradient(const Mesh& mesh, TriId t, const std::array<double, 3>& corner);
/// Gradients of the three barycentric basis functions, as columns.
Eigen::Matrix<double, 2, 3> basis_gradients(const Mesh& mesh, TriId t);

/// Absolute jump at both endpoints. Interior edges: difference of the two
/// traces. Dirichlet edges: trace minus psi. Other edges (and uncracked
/// interior ones) give exactly (0, 0).
std::array<double, 2> jump_across_edge(const BrokenField& u, EdgeId e, std::span<const double> psi_nodal);

/// Discrete jump support S^psi(u): edges whose largest endpoint jump exceeds tol.
CrackSet jump_support(const BrokenField& u, std::span<const double> psi_nodal, double tol);

/// Default jump threshold 1e-9 * (1 + max|psi|).
double default_jump_tolerance(std::span<const double> psi_nodal);

/// Legacy-VTK dump with duplicated corner points so discontinuities survive.
void write_vtk(std::ostream& out, const BrokenField& u);

}  // namespace qsfrac
