#include "qsfrac/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <string>

#include "qsfrac/error.hpp"
#include "qsfrac/hash.hpp"

namespace qsfrac {

const char* to_string(BoundaryLabel label) {
  switch (label) {
    case BoundaryLabel::Interior: return "interior";
    case BoundaryLabel::Dirichlet: return "dirichlet";
    case BoundaryLabel::Neumann: return "neumann";
    case BoundaryLabel::SurfaceForce: return "surface";
  }
  return "?";
}

std::string hex_digest(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

}  // namespace

Mesh::Mesh(std::vector<Vec2> vertices, std::vector<std::array<VertexId, 3>> triangles,
           const LabelRule& boundary_label, const BrittleRule& brittle)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  if (triangles_.empty()) throw ValidationError("mesh has no triangles");
  const auto nv = static_cast<VertexId>(vertices_.size());
  areas_.reserve(triangles_.size());
  for (auto& tri : triangles_) {
    for (VertexId v : tri)
      if (v < 0 || v >= nv) throw ValidationError("triangle references unknown vertex");
    double a = signed_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
    if (a < 0) {
      std::swap(tri[1], tri[2]);
      a = -a;
    }
    if (!(a > 0)) throw ValidationError("degenerate triangle with zero area");
    areas_.push_back(a);
  }

  std::map<std::pair<VertexId, VertexId>, EdgeId> index;
  tri_edges_.resize(triangles_.size());
  for (TriId t = 0; t < static_cast<TriId>(triangles_.size()); ++t) {
    for (int k = 0; k < 3; ++k) {
      VertexId a = triangles_[t][(k + 1) % 3];
      VertexId b = triangles_[t][(k + 2) % 3];
      auto key = std::minmax(a, b);
      auto [it, inserted] = index.try_emplace({key.first, key.second},
                                              static_cast<EdgeId>(edges_.size()));
      if (inserted) {
        Edge e;
        e.v = {key.first, key.second};
        e.tri = {t, kNoTriangle};
        edges_.push_back(e);
      } else {
        Edge& e = edges_[it->second];
        if (e.tri[1] != kNoTriangle) throw ValidationError("edge shared by more than two triangles");
        e.tri[1] = t;
      }
      tri_edges_[t][k] = it->second;
    }
  }

  for (EdgeId id = 0; id < static_cast<EdgeId>(edges_.size()); ++id) {
    Edge& e = edges_[id];
    const Vec2& a = vertices_[e.v[0]];
    const Vec2& b = vertices_[e.v[1]];
    if (!((a - b).norm() > 0)) throw ValidationError("edge with zero length");
    if (e.is_boundary()) {
      e.label = boundary_label(a, b);
      if (e.label == BoundaryLabel::Interior)
        throw ValidationError("boundary edge " + std::to_string(id) + " left unlabeled");
    }
    e.brittle = brittle(a, b);
    if (e.brittle && e.label == BoundaryLabel::SurfaceForce)
      throw ValidationError("edge " + std::to_string(id) +
                            " is both brittle and on the surface-force boundary");
  }
}

const Edge& Mesh::edge(EdgeId e) const {
  if (e < 0 || e >= static_cast<EdgeId>(edges_.size()))
    throw ValidationError("unknown edge id " + std::to_string(e));
  return edges_[e];
}

Vec2 Mesh::centroid(TriId t) const {
  const auto& tri = triangles_[t];
  return (vertices_[tri[0]] + vertices_[tri[1]] + vertices_[tri[2]]) / 3.0;
}

double Mesh::total_area() const {
  double s = 0.0;
  for (double a : areas_) s += a;
  return s;
}

EdgeGeometry Mesh::edge_geometry(EdgeId id) const {
  const Edge& e = edge(id);
  const Vec2& a = vertices_[e.v[0]];
  const Vec2& b = vertices_[e.v[1]];
  EdgeGeometry g;
  g.edge_id = id;
  Vec2 d = b - a;
  g.length = d.norm();
  g.midpoint = 0.5 * (a + b);
  Vec2 n(-d.y(), d.x());
  n /= g.length;
  // Points from the lower-index triangle toward the higher one (outward on the boundary).
  Vec2 toward = e.is_boundary() ? Vec2(g.midpoint - centroid(e.tri[0]))
                                : Vec2(centroid(e.tri[1]) - centroid(e.tri[0]));
  if (n.dot(toward) < 0) n = -n;
  g.unit_normal = n;
  return g;
}

bool Mesh::is_crackable(EdgeId id) const {
  const Edge& e = edge(id);
  return e.brittle && (e.label == BoundaryLabel::Interior || e.label == BoundaryLabel::Dirichlet);
}

std::vector<EdgeId> Mesh::crackable_edges() const {
  std::vector<EdgeId> out;
  for (EdgeId id = 0; id < static_cast<EdgeId>(edges_.size()); ++id)
    if (is_crackable(id)) out.push_back(id);
  return out;
}

std::vector<EdgeId> Mesh::edges_with_label(BoundaryLabel label) const {
  std::vector<EdgeId> out;
  for (EdgeId id = 0; id < static_cast<EdgeId>(edges_.size()); ++id)
    if (edges_[id].label == label) out.push_back(id);
  return out;
}

int Mesh::local_index(TriId t, VertexId v) const {
  const auto& tri = triangles_[t];
  for (int k = 0; k < 3; ++k)
    if (tri[k] == v) return k;
  return -1;
}

std::uint64_t Mesh::hash() const {
  Fnv1a h;
  h.value(vertices_.size());
  for (const auto& p : vertices_) {
    h.value(p.x());
    h.value(p.y());
  }
  for (const auto& tri : triangles_) h.bytes(tri.data(), sizeof(VertexId) * 3);
  for (const auto& e : edges_) {
    h.value(static_cast<std::uint8_t>(e.label));
    h.value(static_cast<std::uint8_t>(e.brittle));
  }
  return h.digest();
}

Mesh build_structured_mesh(int nx, int ny, double width, double height,
                           const Labeling& labeling, Diagonal diagonal) {
  if (nx < 1 || ny < 1) throw ValidationError("structured mesh needs at least one cell per direction");
  if (!(width > 0) || !(height > 0)) throw ValidationError("structured mesh needs positive extents");

  std::vector<Vec2> vertices;
  auto grid = [nx](int i, int j) { return static_cast<VertexId>(j * (nx + 1) + i); };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      vertices.emplace_back(width * i / nx, height * j / ny);

  std::vector<std::array<VertexId, 3>> triangles;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      VertexId v00 = grid(i, j), v10 = grid(i + 1, j), v11 = grid(i + 1, j + 1),
               v01 = grid(i, j + 1);
      if (diagonal == Diagonal::Single) {
        triangles.push_back({v00, v10, v11});
        triangles.push_back({v00, v11, v01});
      } else {
        auto c = static_cast<VertexId>(vertices.size());
        vertices.emplace_back(width * (i + 0.5) / nx, height * (j + 0.5) / ny);
        triangles.push_back({v00, v10, c});
        triangles.push_back({v10, v11, c});
        triangles.push_back({v11, v01, c});
        triangles.push_back({v01, v00, c});
      }
    }
  }

  const double sx = 1e-9 * width, sy = 1e-9 * height;
  auto label = [&](const Vec2& a, const Vec2& b) {
    if (std::abs(a.x()) < sx && std::abs(b.x()) < sx) return labeling.left;
    if (std::abs(a.x() - width) < sx && std::abs(b.x() - width) < sx) return labeling.right;
    if (std::abs(a.y()) < sy && std::abs(b.y()) < sy) return labeling.bottom;
    if (std::abs(a.y() - height) < sy && std::abs(b.y() - height) < sy) return labeling.top;
    return BoundaryLabel::Interior;
  };
  auto brittle = [&](const Vec2& a, const Vec2& b) {
    const double slack = 1e-9 * std::max(width, height);
    for (const Box& box : labeling.brittle)
      if (box.contains(a, slack) && box.contains(b, slack)) return true;
    return false;
  };
  return Mesh(std::move(vertices), std::move(triangles), label, brittle);
}

void write_vtk(std::ostream& out, const Mesh& mesh) {
  const std::size_t nt = mesh.triangle_count(), ne = mesh.edge_count();
  out << "# vtk DataFile Version 3.0\nqsfrac mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.vertex_count() << " double\n";
  char buf[96];
  for (const auto& p : mesh.vertices()) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g 0\n", p.x(), p.y());
    out << buf;
  }
  out << "CELLS " << nt + ne << ' ' << 4 * nt + 3 * ne << '\n';
  for (const auto& tri : mesh.triangles()) out << "3 " << tri[0] << ' ' << tri[1] << ' ' << tri[2] << '\n';
  for (const auto& e : mesh.edges()) out << "2 " << e.v[0] << ' ' << e.v[1] << '\n';
  out << "CELL_TYPES " << nt + ne << '\n';
  for (std::size_t i = 0; i < nt; ++i) out << "5\n";
  for (std::size_t i = 0; i < ne; ++i) out << "3\n";
  out << "CELL_DATA " << nt + ne << '\n';
  out << "SCALARS boundary_label int 1\nLOOKUP_TABLE default\n";
  for (std::size_t i = 0; i < nt; ++i) out << "-1\n";
  for (const auto& e : mesh.edges()) out << static_cast<int>(e.label) << '\n';
  out << "SCALARS brittle int 1\nLOOKUP_TABLE default\n";
  for (std::size_t i = 0; i < nt; ++i) out << "0\n";
  for (const auto& e : mesh.edges()) out << (e.brittle ? 1 : 0) << '\n';
  out << "SCALARS crackable int 1\nLOOKUP_TABLE default\n";
  for (std::size_t i = 0; i < nt; ++i) out << "0\n";
  for (EdgeId id = 0; id < static_cast<EdgeId>(ne); ++id) out << (mesh.is_crackable(id) ? 1 : 0) << '\n';
}

}  // namespace qsfrac
