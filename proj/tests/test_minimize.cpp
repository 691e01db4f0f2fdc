#include <random>

#include "doctest.h"
#include "oracle.hpp"
#include "qsfrac/error.hpp"
#include "qsfrac/minimize.hpp"

using namespace qsfrac;

namespace {

Mesh block_mesh(Diagonal d = Diagonal::Single) {
  Labeling l;
  l.bottom = BoundaryLabel::Neumann;
  l.top = BoundaryLabel::Neumann;
  l.right = BoundaryLabel::SurfaceForce;
  l.brittle = {Box{0.5, 0, 1.5, 1}};
  return build_structured_mesh(4, 2, 2.0, 1.0, l, d);
}

EnergyModel loaded_model(const Mesh& m) {
  EnergyModel model;
  model.bulk = BulkLaw::uniform(m, 2.0, 1.3);
  model.body.amplitude = LoadTable({{0.0, 0.0}, {1.0, 1.0}});
  model.body.profile = {0.5, 1.0, -0.5};
  model.body.lambda = 0.8;
  model.surface.amplitude = LoadTable({{0.0, 0.0}, {1.0, 0.7}});
  model.boundary.amplitude = LoadTable({{0.0, 0.0}, {1.0, 2.0}});
  model.boundary.profile = {0.1, 0.5, 0.2};
  model.toughness.kind = ToughnessKind::WeightedL1;
  model.toughness.b = 2.0;
  return model;
}

std::vector<EdgeId> random_subset(const Mesh& m, std::mt19937& rng) {
  std::vector<EdgeId> s;
  for (EdgeId e : m.crackable_edges())
    if (rng() % 3 == 0) s.push_back(e);
  return s;
}

}  // namespace

TEST_CASE("quadratic minimization matches the dense oracle") {
  for (Diagonal d : {Diagonal::Single, Diagonal::Crossed}) {
    const Mesh m = block_mesh(d);
    const EnergyModel model = loaded_model(m);
    std::mt19937 rng(11);
    for (int trial = 0; trial < 25; ++trial) {
      const CrackSet c(m, random_subset(m, rng));
      const double t = 0.3 + 0.1 * trial;
      const auto sol = minimize_elastic(model, m, c, t);
      const auto ref = oracle::solve(model, m, c.edges(), t);
      const auto e = elastic_energy(model, t, sol.field);
      CHECK(e.bulk == doctest::Approx(ref.bulk).epsilon(1e-10));
      CHECK(e.body == doctest::Approx(ref.body).epsilon(1e-10));
      CHECK(e.surface_force == doctest::Approx(ref.surface_force).epsilon(1e-10));
      for (TriId tr = 0; tr < static_cast<TriId>(m.triangle_count()); ++tr)
        for (int k = 0; k < 3; ++k)
          CHECK(sol.field.corner_value(tr, k) == doctest::Approx(ref.corner[3 * tr + k]).epsilon(1e-9));
      CHECK(euler_residual(model, t, sol.field) <= 1e-10);
    }
  }
}

TEST_CASE("the elastic minimum is monotone in the crack set") {
  const Mesh m = block_mesh();
  const EnergyModel model = loaded_model(m);
  std::mt19937 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const CrackSet a(m, random_subset(m, rng));
    const CrackSet b = a.united(CrackSet(m, random_subset(m, rng)));
    const double t = 1.0;
    const double ea = minimize_elastic(model, m, a, t).report.energy;
    const double eb = minimize_elastic(model, m, b, t).report.energy;
    CHECK(eb <= ea + 1e-12 * (1.0 + std::abs(ea)));
  }
}

TEST_CASE("dense and conjugate-gradient solves agree") {
  const Mesh m = block_mesh(Diagonal::Crossed);
  const EnergyModel model = loaded_model(m);
  const CrackSet c(m, m.crackable_edges());
  SolveOptions dense, cg;
  dense.solver = LinearSolver::Dense;
  cg.solver = LinearSolver::ConjugateGradient;
  const auto a = minimize_elastic(model, m, c, 0.8, dense);
  const auto b = minimize_elastic(model, m, c, 0.8, cg);
  CHECK(a.report.energy == doctest::Approx(b.report.energy).epsilon(1e-12));
}

TEST_CASE("the assembled gradient matches finite differences of the energy") {
  const Mesh m = block_mesh();
  for (auto [p, q] : {std::pair{2.0, 2.0}, {4.0, 3.0}, {3.0, 1.5}}) {
    EnergyModel model = loaded_model(m);
    model.bulk = BulkLaw::uniform(m, p, 1.1);
    model.body.q = q;
    model.surface.r = p;
    std::mt19937 rng(2);
    std::normal_distribution<double> N(0.0, 1.0);
    const CrackSet c(m, random_subset(m, rng));
    const auto topo = DofTopology::build(m, c);
    std::vector<double> v(topo->dof_count());
    for (double& x : v) x = N(rng);
    const BrokenField u(topo, v);
    const auto g = energy_gradient(model, 0.6, u);
    for (std::size_t d = 0; d < v.size(); ++d) {
      const double h = 1e-6;
      auto vp = v, vm = v;
      vp[d] += h;
      vm[d] -= h;
      const double fd = (elastic_energy(model, 0.6, BrokenField(topo, vp)).total() -
                         elastic_energy(model, 0.6, BrokenField(topo, vm)).total()) /
                        (2 * h);
      CHECK(fd == doctest::Approx(g[static_cast<Eigen::Index>(d)]).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("Newton converges on non-quadratic laws") {
  const Mesh m = block_mesh();
  for (auto [p, eps] : {std::pair{4.0, 0.0}, {1.5, 0.1}}) {
    EnergyModel model = loaded_model(m);
    model.bulk = BulkLaw::uniform(m, p, 1.0, eps);
    model.body.q = 3.0;
    model.surface.r = std::max(p, 2.0);
    const CrackSet c(m, m.crackable_edges());
    const auto sol = minimize_elastic(model, m, c, 1.0);
    CHECK(sol.report.residual <= 1e-10);
    CHECK(euler_residual(model, 1.0, sol.field) <= 1e-10);
    // Warm start on the same crack converges at once.
    const auto again = minimize_elastic(model, m, c, 1.0, {}, &sol.field);
    CHECK(again.report.iterations <= 1);
    // Perturbing the minimizer cannot lower the energy.
    auto v = sol.field.values();
    for (int d : sol.field.topology().free_dofs()) v[d] += 1e-3;
    CHECK(elastic_energy(model, 1.0, BrokenField(sol.field.topology_ptr(), v)).total() >= sol.report.energy);
  }
}

TEST_CASE("a start field on another crack set is rejected") {
  const Mesh m = block_mesh();
  const EnergyModel model = loaded_model(m);
  const auto a = minimize_elastic(model, m, CrackSet{}, 0.5);
  CHECK_THROWS_AS(minimize_elastic(model, m, CrackSet(m, m.crackable_edges()), 0.5, {}, &a.field), ValidationError);
}

TEST_CASE("without confinement a floating piece is a solver error") {
  Labeling l;
  l.right = BoundaryLabel::Neumann;
  l.bottom = BoundaryLabel::Neumann;
  l.top = BoundaryLabel::Neumann;
  l.brittle = {Box{1, 0, 1, 1}};
  const Mesh m = build_structured_mesh(2, 1, 2.0, 1.0, l);
  EnergyModel model;
  model.bulk = BulkLaw::uniform(m, 2.0, 1.0);
  model.body.lambda = 0.0;
  model.allow_nonconforming = true;
  CHECK_NOTHROW(minimize_elastic(model, m, CrackSet{}, 0.0));
  CHECK_THROWS_AS(minimize_elastic(model, m, CrackSet(m, m.crackable_edges()), 0.0), SolverError);
}
