#include "qsfrac/broken_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "qsfrac/error.hpp"

namespace qsfrac {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // Smaller root wins so the structure does not depend on call order.
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<int> parent_;
};

}  // namespace

std::shared_ptr<const DofTopology> DofTopology::build(const Mesh& mesh, const CrackSet& crack) {
  for (EdgeId e : crack)
    if (!mesh.is_crackable(e)) throw ValidationError("crack edge " + std::to_string(e) + " is not crackable");

  std::shared_ptr<DofTopology> topo(new DofTopology());
  topo->mesh_ = &mesh;
  topo->crack_ = crack;
  const std::size_t nt = mesh.triangle_count();
  DisjointSets sets(3 * nt);
  for (EdgeId id = 0; id < static_cast<EdgeId>(mesh.edge_count()); ++id) {
    const Edge& e = mesh.edge(id);
    if (e.is_boundary() || crack.contains(id)) continue;
    for (VertexId v : e.v) {
      int c0 = 3 * e.tri[0] + mesh.local_index(e.tri[0], v);
      int c1 = 3 * e.tri[1] + mesh.local_index(e.tri[1], v);
      sets.unite(c0, c1);
    }
  }

  topo->corner_dof_.assign(3 * nt, -1);
  std::vector<int> root_dof(3 * nt, -1);
  for (std::size_t c = 0; c < 3 * nt; ++c) {
    int r = sets.find(static_cast<int>(c));
    if (root_dof[r] < 0) {
      root_dof[r] = static_cast<int>(topo->vertex_of_dof_.size());
      topo->vertex_of_dof_.push_back(mesh.triangle(static_cast<TriId>(c / 3))[c % 3]);
    }
    topo->corner_dof_[c] = root_dof[r];
  }

  const std::size_t nd = topo->vertex_of_dof_.size();
  topo->constrained_.assign(nd, 0);
  for (EdgeId id = 0; id < static_cast<EdgeId>(mesh.edge_count()); ++id) {
    const Edge& e = mesh.edge(id);
    if (e.label != BoundaryLabel::Dirichlet || crack.contains(id)) continue;
    for (VertexId v : e.v) topo->constrained_[topo->dof(e.tri[0], mesh.local_index(e.tri[0], v))] = 1;
  }
  topo->free_index_.assign(nd, -1);
  for (std::size_t d = 0; d < nd; ++d) {
    if (topo->constrained_[d]) {
      topo->constrained_list_.push_back(static_cast<int>(d));
    } else {
      topo->free_index_[d] = static_cast<int>(topo->free_list_.size());
      topo->free_list_.push_back(static_cast<int>(d));
    }
  }
  return topo;
}

std::vector<double> DofTopology::constrained_values(std::span<const double> psi_nodal) const {
  std::vector<double> out;
  out.reserve(constrained_list_.size());
  for (int d : constrained_list_) out.push_back(psi_nodal[vertex_of_dof_[d]]);
  return out;
}

BrokenField::BrokenField(TopologyPtr topology, std::vector<double> values)
    : topology_(std::move(topology)), values_(std::move(values)) {
  if (!topology_) throw ValidationError("field without topology");
  if (values_.size() != topology_->dof_count()) throw ValidationError("field size does not match DOF count");
}

BrokenField BrokenField::interpolate(TopologyPtr topology, std::span<const double> nodal) {
  std::vector<double> v(topology->dof_count());
  for (std::size_t d = 0; d < v.size(); ++d) v[d] = nodal[topology->vertex_of_dof(static_cast<int>(d))];
  return BrokenField(std::move(topology), std::move(v));
}

BrokenField BrokenField::interpolate(TopologyPtr topology, const std::function<double(const Vec2&)>& fn) {
  std::vector<double> nodal(topology->mesh().vertex_count());
  for (std::size_t i = 0; i < nodal.size(); ++i) nodal[i] = fn(topology->mesh().vertex(static_cast<VertexId>(i)));
  return interpolate(std::move(topology), nodal);
}

Eigen::Matrix<double, 2, 3> basis_gradients(const Mesh& mesh, TriId t) {
  const auto& tri = mesh.triangle(t);
  const Vec2& a = mesh.vertex(tri[0]);
  const Vec2& b = mesh.vertex(tri[1]);
  const Vec2& c = mesh.vertex(tri[2]);
  const double twoA = 2.0 * mesh.area(t);
  Eigen::Matrix<double, 2, 3> G;
  G.col(0) = Vec2(b.y() - c.y(), c.x() - b.x()) / twoA;
  G.col(1) = Vec2(c.y() - a.y(), a.x() - c.x()) / twoA;
  G.col(2) = Vec2(a.y() - b.y(), b.x() - a.x()) / twoA;
  return G;
}

Vec2 triangle_gradient(const Mesh& mesh, TriId t, const std::array<double, 3>& corner) {
  return basis_gradients(mesh, t) * Eigen::Vector3d(corner[0], corner[1], corner[2]);
}

std::vector<Vec2> BrokenField::gradient() const {
  const Mesh& m = mesh();
  std::vector<Vec2> g(m.triangle_count());
  for (TriId t = 0; t < static_cast<TriId>(g.size()); ++t)
    g[t] = triangle_gradient(m, t, {corner_value(t, 0), corner_value(t, 1), corner_value(t, 2)});
  return g;
}

std::vector<double> BrokenField::centroid_values() const {
  const Mesh& m = mesh();
  std::vector<double> c(m.triangle_count());
  for (TriId t = 0; t < static_cast<TriId>(c.size()); ++t)
    c[t] = (corner_value(t, 0) + corner_value(t, 1) + corner_value(t, 2)) / 3.0;
  return c;
}

std::vector<double> BrokenField::trace_on_surface_part() const {
  const Mesh& m = mesh();
  std::vector<double> out;
  for (EdgeId id : m.edges_with_label(BoundaryLabel::SurfaceForce)) {
    const Edge& e = m.edge(id);
    const TriId t = e.tri[0];
    out.push_back(0.5 * (corner_value(t, m.local_index(t, e.v[0])) + corner_value(t, m.local_index(t, e.v[1]))));
  }
  return out;
}

BrokenField BrokenField::embed(TopologyPtr finer) const {
  if (!topology_->crack().is_subset_of(finer->crack()))
    throw ValidationError("embedding requires a crack superset");
  std::vector<double> v(finer->dof_count(), 0.0);
  const std::size_t nt = mesh().triangle_count();
  for (TriId t = 0; t < static_cast<TriId>(nt); ++t)
    for (int k = 0; k < 3; ++k) v[finer->dof(t, k)] = corner_value(t, k);
  return BrokenField(std::move(finer), std::move(v));
}

std::array<double, 2> jump_across_edge(const BrokenField& u, EdgeId id, std::span<const double> psi_nodal) {
  const Mesh& m = u.mesh();
  const Edge& e = m.edge(id);
  std::array<double, 2> out{0.0, 0.0};
  if (e.is_boundary()) {
    if (e.label != BoundaryLabel::Dirichlet) return out;
    for (int i = 0; i < 2; ++i) {
      const double trace = u.corner_value(e.tri[0], m.local_index(e.tri[0], e.v[i]));
      out[i] = std::abs(trace - psi_nodal[e.v[i]]);
    }
    return out;
  }
  for (int i = 0; i < 2; ++i) {
    const int d0 = u.topology().dof(e.tri[0], m.local_index(e.tri[0], e.v[i]));
    const int d1 = u.topology().dof(e.tri[1], m.local_index(e.tri[1], e.v[i]));
    out[i] = d0 == d1 ? 0.0 : std::abs(u.values()[d1] - u.values()[d0]);
  }
  return out;
}

CrackSet jump_support(const BrokenField& u, std::span<const double> psi_nodal, double tol) {
  if (tol < 0) throw ValidationError("jump tolerance must be nonnegative");
  const Mesh& m = u.mesh();
  std::vector<EdgeId> out;
  for (EdgeId id = 0; id < static_cast<EdgeId>(m.edge_count()); ++id) {
    const Edge& e = m.edge(id);
    if (e.is_boundary() && e.label != BoundaryLabel::Dirichlet) continue;
    auto j = jump_across_edge(u, id, psi_nodal);
    if (std::max(j[0], j[1]) > tol) out.push_back(id);
  }
  return CrackSet::unchecked(std::move(out));
}

double default_jump_tolerance(std::span<const double> psi_nodal) {
  double mx = 0.0;
  for (double v : psi_nodal) mx = std::max(mx, std::abs(v));
  return 1e-9 * (1.0 + mx);
}

void write_vtk(std::ostream& out, const BrokenField& u) {
  const Mesh& m = u.mesh();
  const std::size_t nt = m.triangle_count();
  char buf[96];
  out << "# vtk DataFile Version 3.0\nqsfrac broken field\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << 3 * nt << " double\n";
  for (TriId t = 0; t < static_cast<TriId>(nt); ++t)
    for (int k = 0; k < 3; ++k) {
      const Vec2& p = m.vertex(m.triangle(t)[k]);
      std::snprintf(buf, sizeof buf, "%.17g %.17g 0\n", p.x(), p.y());
      out << buf;
    }
  out << "CELLS " << nt << ' ' << 4 * nt << '\n';
  for (std::size_t t = 0; t < nt; ++t) out << "3 " << 3 * t << ' ' << 3 * t + 1 << ' ' << 3 * t + 2 << '\n';
  out << "CELL_TYPES " << nt << '\n';
  for (std::size_t t = 0; t < nt; ++t) out << "5\n";
  out << "POINT_DATA " << 3 * nt << "\nSCALARS u double 1\nLOOKUP_TABLE default\n";
  for (TriId t = 0; t < static_cast<TriId>(nt); ++t)
    for (int k = 0; k < 3; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g\n", u.corner_value(t, k));
      out << buf;
    }
  out << "CELL_DATA " << nt << "\nVECTORS grad_u double\n";
  for (const Vec2& g : u.gradient()) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g 0\n", g.x(), g.y());
    out << buf;
  }
}

}  // namespace qsfrac
