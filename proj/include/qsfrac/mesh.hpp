#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <functional>
#include <vector>

#include <Eigen/Core>

namespace qsfrac {

using Vec2 = Eigen::Vector2d;
using EdgeId = std::int32_t;
using TriId = std::int32_t;
using VertexId = std::int32_t;

inline constexpr TriId kNoTriangle = -1;

enum class BoundaryLabel : std::uint8_t { Interior, Dirichlet, Neumann, SurfaceForce };

const char* to_string(BoundaryLabel label);

enum class Diagonal : std::uint8_t { Single, Crossed };

// Closed axis-aligned box; an edge belongs to the brittle region when the
// whole segment lies inside one of the labeling boxes.
struct Box {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
  bool contains(const Vec2& p, double slack = 1e-12) const {
    return p.x() >= x0 - slack && p.x() <= x1 + slack && p.y() >= y0 - slack &&
           p.y() <= y1 + slack;
  }
};

// Boundary-part assignment rule for rectangles: one label per side.
struct Labeling {
  BoundaryLabel left = BoundaryLabel::Dirichlet;
  BoundaryLabel right = BoundaryLabel::Dirichlet;
  BoundaryLabel bottom = BoundaryLabel::Dirichlet;
  BoundaryLabel top = BoundaryLabel::Dirichlet;
  std::vector<Box> brittle;
};

struct Edge {
  std::array<VertexId, 2> v{};
  // tri[0] < tri[1]; tri[1] == kNoTriangle on the boundary.
  std::array<TriId, 2> tri{kNoTriangle, kNoTriangle};
  BoundaryLabel label = BoundaryLabel::Interior;
  bool brittle = false;

  bool is_boundary() const { return tri[1] == kNoTriangle; }
};

struct EdgeGeometry {
  EdgeId edge_id = 0;
  double length = 0.0;
  Vec2 unit_normal = Vec2::Zero();
  Vec2 midpoint = Vec2::Zero();
};

/// Triangulated reference configuration with boundary decomposition and
/// brittle-edge tags. Immutable once constructed.
class Mesh {
 public:
  using LabelRule = std::function<BoundaryLabel(const Vec2& a, const Vec2& b)>;
  using BrittleRule = std::function<bool(const Vec2& a, const Vec2& b)>;

  /// Builds the edge structure from raw vertices and triangles. Triangles are
  /// reoriented counterclockwise; the label rule is consulted for boundary
  /// edges only. Throws ValidationError on degenerate geometry or when a
  /// brittle edge carries the surface-force label.
  Mesh(std::vector<Vec2> vertices, std::vector<std::array<VertexId, 3>> triangles,
       const LabelRule& boundary_label, const BrittleRule& brittle);

  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t triangle_count() const { return triangles_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  const Vec2& vertex(VertexId v) const { return vertices_[v]; }
  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::array<VertexId, 3>& triangle(TriId t) const { return triangles_[t]; }
  const std::vector<std::array<VertexId, 3>>& triangles() const { return triangles_; }
  // Edge opposite to local vertex k of triangle t.
  EdgeId triangle_edge(TriId t, int k) const { return tri_edges_[t][k]; }
  const Edge& edge(EdgeId e) const;
  const std::vector<Edge>& edges() const { return edges_; }

  double area(TriId t) const { return areas_[t]; }
  Vec2 centroid(TriId t) const;
  double total_area() const;

  EdgeGeometry edge_geometry(EdgeId e) const;
  // Edges that may enter a crack set: brittle interior or brittle Dirichlet edges.
  std::vector<EdgeId> crackable_edges() const;
  bool is_crackable(EdgeId e) const;
  std::vector<EdgeId> edges_with_label(BoundaryLabel label) const;

  // Local position (0..2) of vertex v in triangle t, or -1.
  int local_index(TriId t, VertexId v) const;

  std::uint64_t hash() const;

 private:
  std::vector<Vec2> vertices_;
  std::vector<std::array<VertexId, 3>> triangles_;
  std::vector<std::array<EdgeId, 3>> tri_edges_;
  std::vector<Edge> edges_;
  std::vector<double> areas_;
};

/// Structured triangulation of [0,width]x[0,height] with nx by ny cells.
/// Single: each cell split along its (i,j)-(i+1,j+1) diagonal. Crossed: a
/// center vertex per cell and four triangles.
Mesh build_structured_mesh(int nx, int ny, double width, double height,
                           const Labeling& labeling, Diagonal diagonal = Diagonal::Single);

/// Legacy-VTK ASCII dump: triangles and edges as cells, labels as CELL_DATA.
void write_vtk(std::ostream& out, const Mesh& mesh);

}  // namespace qsfrac
