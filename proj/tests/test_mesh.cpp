#include <set>
#include <sstream>

#include "doctest.h"
#include "qsfrac/crack_set.hpp"
#include "qsfrac/error.hpp"
#include "qsfrac/mesh.hpp"

using namespace qsfrac;

namespace {

Labeling strip_labels() {
  Labeling l;
  l.bottom = BoundaryLabel::Neumann;
  l.top = BoundaryLabel::Neumann;
  l.brittle = {Box{1, 0, 1, 1}};
  return l;
}

}  // namespace

TEST_CASE("structured single-diagonal counts satisfy Euler's formula") {
  for (int nx : {1, 2, 5})
    for (int ny : {1, 3}) {
      const Mesh m = build_structured_mesh(nx, ny, 2.0, 1.0, Labeling{});
      CHECK(m.vertex_count() == static_cast<std::size_t>((nx + 1) * (ny + 1)));
      CHECK(m.triangle_count() == static_cast<std::size_t>(2 * nx * ny));
      CHECK(m.edge_count() == static_cast<std::size_t>(nx * (ny + 1) + ny * (nx + 1) + nx * ny));
      const long chi = static_cast<long>(m.vertex_count()) - static_cast<long>(m.edge_count()) +
                       static_cast<long>(m.triangle_count());
      CHECK(chi == 1);
      CHECK(m.total_area() == doctest::Approx(2.0).epsilon(1e-14));
    }
}

TEST_CASE("crossed diagonals add a center vertex and four triangles per cell") {
  const Mesh m = build_structured_mesh(3, 2, 3.0, 2.0, Labeling{}, Diagonal::Crossed);
  CHECK(m.vertex_count() == 4 * 3 + 6);
  CHECK(m.triangle_count() == 24);
  CHECK(m.edge_count() == 3 * 3 + 2 * 4 + 4 * 6);
  CHECK(m.total_area() == doctest::Approx(6.0).epsilon(1e-14));
}

TEST_CASE("every triangle is counterclockwise with positive area") {
  const Mesh m = build_structured_mesh(2, 2, 1.0, 1.0, Labeling{}, Diagonal::Crossed);
  for (TriId t = 0; t < static_cast<TriId>(m.triangle_count()); ++t) {
    const auto& v = m.triangle(t);
    const Vec2 a = m.vertex(v[1]) - m.vertex(v[0]), b = m.vertex(v[2]) - m.vertex(v[0]);
    CHECK(a.x() * b.y() - a.y() * b.x() > 0);
    CHECK(m.area(t) > 0);
  }
}

TEST_CASE("edges record incident triangles and the opposite-vertex convention") {
  const Mesh m = build_structured_mesh(2, 2, 1.0, 1.0, Labeling{});
  std::size_t boundary = 0;
  for (const Edge& e : m.edges()) {
    if (e.is_boundary()) {
      ++boundary;
      CHECK(e.label != BoundaryLabel::Interior);
    } else {
      CHECK(e.tri[0] < e.tri[1]);
      CHECK(e.label == BoundaryLabel::Interior);
    }
  }
  CHECK(boundary == 8);
  for (TriId t = 0; t < static_cast<TriId>(m.triangle_count()); ++t)
    for (int k = 0; k < 3; ++k) {
      const Edge& e = m.edge(m.triangle_edge(t, k));
      const VertexId opp = m.triangle(t)[k];
      CHECK(e.v[0] != opp);
      CHECK(e.v[1] != opp);
    }
}

TEST_CASE("side labels follow the labeling rule") {
  const Mesh m = build_structured_mesh(2, 1, 2.0, 1.0, strip_labels());
  CHECK(m.edges_with_label(BoundaryLabel::Dirichlet).size() == 2);
  CHECK(m.edges_with_label(BoundaryLabel::Neumann).size() == 4);
  CHECK(m.edges_with_label(BoundaryLabel::SurfaceForce).empty());
}

TEST_CASE("the strip has exactly one crackable edge, the interface") {
  const Mesh m = build_structured_mesh(2, 1, 2.0, 1.0, strip_labels());
  const auto c = m.crackable_edges();
  REQUIRE(c.size() == 1);
  const auto g = m.edge_geometry(c[0]);
  CHECK(g.length == doctest::Approx(1.0));
  CHECK(g.midpoint.x() == doctest::Approx(1.0));
  CHECK(std::abs(g.unit_normal.x()) == doctest::Approx(1.0));
  CHECK(g.unit_normal.norm() == doctest::Approx(1.0));
}

TEST_CASE("brittle Dirichlet edges are crackable, brittle Neumann edges are not") {
  Labeling l;
  l.bottom = BoundaryLabel::Neumann;
  l.top = BoundaryLabel::Neumann;
  l.brittle = {Box{0, 0, 0, 1}, Box{0, 0, 1, 0}};
  const Mesh m = build_structured_mesh(1, 1, 1.0, 1.0, l);
  const auto c = m.crackable_edges();
  REQUIRE(c.size() == 1);
  CHECK(m.edge(c[0]).label == BoundaryLabel::Dirichlet);
}

TEST_CASE("a brittle surface-force edge is rejected") {
  Labeling l;
  l.right = BoundaryLabel::SurfaceForce;
  l.brittle = {Box{1, 0, 1, 1}};
  CHECK_THROWS_AS(build_structured_mesh(1, 1, 1.0, 1.0, l), ValidationError);
}

TEST_CASE("degenerate input is rejected") {
  CHECK_THROWS_AS(build_structured_mesh(0, 1, 1.0, 1.0, Labeling{}), ValidationError);
  CHECK_THROWS_AS(build_structured_mesh(1, 1, -1.0, 1.0, Labeling{}), ValidationError);
  auto label = [](const Vec2&, const Vec2&) { return BoundaryLabel::Dirichlet; };
  auto none = [](const Vec2&, const Vec2&) { return false; };
  CHECK_THROWS_AS(Mesh({{0, 0}, {1, 0}, {2, 0}}, {{0, 1, 2}}, label, none), ValidationError);
  CHECK_THROWS_AS(Mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 5}}, label, none), ValidationError);
}

TEST_CASE("mesh hash depends on geometry and labels only") {
  const Mesh a = build_structured_mesh(2, 1, 2.0, 1.0, strip_labels());
  const Mesh b = build_structured_mesh(2, 1, 2.0, 1.0, strip_labels());
  Labeling other = strip_labels();
  other.top = BoundaryLabel::Dirichlet;
  const Mesh c = build_structured_mesh(2, 1, 2.0, 1.0, other);
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
}

TEST_CASE("vtk output lists points, triangles and edges") {
  const Mesh m = build_structured_mesh(1, 1, 1.0, 1.0, Labeling{});
  std::ostringstream os;
  write_vtk(os, m);
  const std::string s = os.str();
  CHECK(s.find("POINTS 4") != std::string::npos);
  CHECK(s.find("CELLS 7") != std::string::npos);
}

TEST_CASE("crack sets are sorted, deduplicated and ordered shortlex") {
  Labeling l;
  l.brittle = {Box{0, 0, 2, 2}};
  const Mesh m = build_structured_mesh(2, 2, 2.0, 2.0, l);
  const auto c = m.crackable_edges();
  REQUIRE(c.size() >= 3);
  const CrackSet a(m, {c[2], c[0], c[2]});
  CHECK(a.size() == 2);
  CHECK(a.edges().front() == c[0]);
  CHECK(a.contains(c[2]));
  CHECK_FALSE(a.contains(c[1]));
  const CrackSet b = a.with(c[1]);
  CHECK(a.is_subset_of(b));
  CHECK_FALSE(b.is_subset_of(a));
  CHECK(b.minus(a) == std::vector<EdgeId>{c[1]});
  CHECK(shortlex_less(a, b));
  CHECK(shortlex_less(CrackSet(m, {c[0], c[1]}), CrackSet(m, {c[0], c[2]})));
  CHECK_FALSE(shortlex_less(a, a));
  CHECK(a.united(CrackSet(m, {c[1]})) == b);
}

TEST_CASE("crack sets refuse uncrackable edges") {
  const Mesh m = build_structured_mesh(2, 1, 2.0, 1.0, strip_labels());
  std::set<EdgeId> ok(m.crackable_edges().begin(), m.crackable_edges().end());
  for (EdgeId e = 0; e < static_cast<EdgeId>(m.edge_count()); ++e)
    if (!ok.count(e)) {
      CHECK_THROWS_AS(CrackSet(m, {e}), ValidationError);
      break;
    }
  CHECK_THROWS_AS(CrackSet(m, {static_cast<EdgeId>(m.edge_count())}), ValidationError);
}
