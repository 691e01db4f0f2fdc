#include <cmath>
#include <random>

#include "doctest.h"
#include "qsfrac/energy.hpp"
#include "qsfrac/error.hpp"

using namespace qsfrac;

namespace {

Mesh strip_mesh() {
  Labeling l;
  l.bottom = BoundaryLabel::Neumann;
  l.top = BoundaryLabel::SurfaceForce;
  l.brittle = {Box{1, 0, 1, 1}};
  return build_structured_mesh(2, 1, 2.0, 1.0, l);
}

EnergyModel model_on(const Mesh& m, double p, double eps = 0.0) {
  EnergyModel model;
  model.bulk = BulkLaw::uniform(m, p, 1.5, eps);
  model.surface.r = std::max(2.0, p);
  return model;
}

double rel(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace

TEST_CASE("load tables interpolate linearly and extend constantly") {
  const LoadTable lt({{0.0, 0.0}, {1.0, 2.0}, {3.0, 1.0}});
  CHECK(lt.value(-1.0) == 0.0);
  CHECK(lt.value(0.5) == doctest::Approx(1.0));
  CHECK(lt.value(2.0) == doctest::Approx(1.5));
  CHECK(lt.value(7.0) == 1.0);
  CHECK(lt.rate(0.5) == doctest::Approx(2.0));
  CHECK(lt.rate(2.0) == doctest::Approx(-0.5));
  CHECK(lt.rate(5.0) == 0.0);
  CHECK(LoadTable().is_zero());
  CHECK(LoadTable().value(3.0) == 0.0);
  CHECK(lt.scaled(2.0).value(1.0) == doctest::Approx(4.0));
}

TEST_CASE("knot rates take the requested side") {
  const LoadTable lt({{0.0, 0.0}, {1.0, 2.0}, {3.0, 1.0}});
  CHECK(lt.rate(1.0, RateSide::Left) == doctest::Approx(2.0));
  CHECK(lt.rate(1.0, RateSide::Right) == doctest::Approx(-0.5));
  CHECK(lt.rate(0.0, RateSide::Left) == doctest::Approx(2.0));
  CHECK(lt.rate(0.0, RateSide::Right) == doctest::Approx(2.0));
  CHECK(lt.rate(3.0, RateSide::Left) == doctest::Approx(-0.5));
  CHECK(lt.rate(3.0, RateSide::Right) == 0.0);
}

TEST_CASE("load tables reject unsorted knots") {
  CHECK_THROWS_AS(LoadTable({{1.0, 0.0}, {1.0, 1.0}}), ValidationError);
  CHECK_THROWS_AS(LoadTable({{2.0, 0.0}, {1.0, 1.0}}), ValidationError);
}

TEST_CASE("stress and its Jacobian match central differences") {
  const Mesh m = strip_mesh();
  std::mt19937_64 rng(7);
  std::normal_distribution<double> N(0.0, 1.0);
  for (auto [p, eps] : {std::pair{2.0, 0.0}, {4.0, 0.0}, {3.0, 0.2}, {1.5, 0.1}}) {
    const BulkLaw law = BulkLaw::uniform(m, p, 1.3, eps);
    for (int s = 0; s < 200; ++s) {
      const Vec2 xi(N(rng), N(rng));
      const double h = 1e-5 * (1.0 + xi.norm());
      const Vec2 sig = stress(law, 0, xi);
      const Mat2 J = stress_jacobian(law, 0, xi);
      for (int k = 0; k < 2; ++k) {
        const Vec2 d = Vec2::Unit(k) * h;
        const double fd = (bulk_energy_density(law, 0, xi + d) - bulk_energy_density(law, 0, xi - d)) / (2 * h);
        CHECK(rel(fd, sig[k]) < 1e-6);
        const Vec2 fdj = (stress(law, 0, xi + d) - stress(law, 0, xi - d)) / (2 * h);
        CHECK(rel(fdj[0], J(0, k)) < 1e-6);
        CHECK(rel(fdj[1], J(1, k)) < 1e-6);
      }
    }
  }
}

TEST_CASE("body potential derivatives match central differences") {
  for (double q : {2.0, 3.0, 1.5}) {
    BodyPotential F;
    F.q = q;
    F.lambda = 0.7;
    for (double f : {0.0, 1.2, -0.4})
      for (double z : {-1.3, 0.4, 2.2}) {
        const double h = 1e-6;
        CHECK(rel((F.density(f, z + h) - F.density(f, z - h)) / (2 * h), F.dz(f, z)) < 1e-6);
        CHECK(rel((F.dz(f, z + h) - F.dz(f, z - h)) / (2 * h), F.dzz(z)) < 1e-6);
      }
  }
}

TEST_CASE("bulk conjugate closes the Fenchel-Young identity at the stress") {
  const Mesh m = strip_mesh();
  for (auto [p, eps] : {std::pair{2.0, 0.0}, {4.0, 0.0}, {1.5, 0.1}, {3.0, 0.3}}) {
    const BulkLaw law = BulkLaw::uniform(m, p, 0.8, eps);
    for (const Vec2& xi : {Vec2(0.3, -0.2), Vec2(2.0, 1.0), Vec2(0.0, 0.01)}) {
      const Vec2 sig = stress(law, 0, xi);
      const double lhs = bulk_energy_density(law, 0, xi) + bulk_conjugate_density(law, 0, sig);
      CHECK(lhs == doctest::Approx(sig.dot(xi)).epsilon(1e-10).scale(1.0));
      // Young's inequality with any other stress.
      const Vec2 other = sig + Vec2(0.3, 0.1);
      CHECK(bulk_energy_density(law, 0, xi) + bulk_conjugate_density(law, 0, other) >= other.dot(xi) - 1e-12);
    }
  }
}

TEST_CASE("body conjugate closes the identity at -dF") {
  BodyPotential F;
  F.lambda = 1.3;
  for (double q : {2.0, 3.0}) {
    F.q = q;
    const double f = 0.6, z = -0.8;
    const double s = -F.dz(f, z);
    CHECK(-F.density(f, z) + F.neg_conjugate(f, s) == doctest::Approx(s * z).epsilon(1e-12));
    CHECK(-F.density(f, z) + F.neg_conjugate(f, s + 0.2) >= (s + 0.2) * z - 1e-14);
  }
  F.lambda = 0.0;
  CHECK(F.neg_conjugate(1.0, -1.0) == 0.0);
  CHECK(std::isinf(F.neg_conjugate(1.0, 0.0)));
}

TEST_CASE("toughness kinds evaluate the intended norms") {
  Toughness k;
  const Vec2 x(0.5, 0.5), nu(0.6, 0.8);
  k.a = 2.0;
  CHECK(k(x, nu) == doctest::Approx(2.0));
  k.kind = ToughnessKind::WeightedL1;
  k.a = 1.0;
  k.b = 3.0;
  CHECK(k(x, nu) == doctest::Approx(0.6 + 2.4));
  k.kind = ToughnessKind::Elliptic;
  CHECK(k(x, nu) == doctest::Approx(std::sqrt(0.36 + 3.0 * 0.64)));
  k.factor = {1.0, 2.0, 0.0};
  CHECK(k(x, nu) == doctest::Approx(2.0 * std::sqrt(0.36 + 3.0 * 0.64)));
}

TEST_CASE("surface energy sums edge costs of the crack") {
  const Mesh m = strip_mesh();
  Toughness k;
  k.a = 2.5;
  const CrackSet c(m, {m.crackable_edges()[0]});
  CHECK(surface_energy(k, m, c) == doctest::Approx(2.5));
  CHECK(surface_energy(k, m, CrackSet{}) == 0.0);
  const auto [k1, k2] = k.bounds(m);
  CHECK(k1 == doctest::Approx(2.5));
  CHECK(k2 == doctest::Approx(2.5));
}

TEST_CASE("quadrature of the potentials matches hand sums") {
  const Mesh m = strip_mesh();
  BodyPotential F;
  F.amplitude = LoadTable::constant(2.0);
  F.lambda = 1.0;
  std::vector<double> z(m.triangle_count(), 1.0);
  const auto fv = body_value_and_gradient(F, m, 0.0, z);
  CHECK(fv.value == doctest::Approx(m.total_area() * (2.0 - 0.5)));
  SurfacePotential G;
  G.amplitude = LoadTable({{0.0, 0.0}, {1.0, 3.0}});
  const auto sfe = m.edges_with_label(BoundaryLabel::SurfaceForce);
  std::vector<double> tr(sfe.size(), 2.0);
  CHECK(surface_value_and_gradient(G, m, 0.5, tr).value == doctest::Approx(1.5 * 2.0 * 2.0));
  CHECK(surface_rate(G, m, 0.5, tr) == doctest::Approx(3.0 * 2.0 * 2.0));
  CHECK(body_rate(F, m, 0.5, z) == 0.0);
}

TEST_CASE("model validation enforces the structural hypotheses") {
  const Mesh m = strip_mesh();
  EnergyModel ok = model_on(m, 2.0);
  CHECK_NOTHROW(ok.validate(m));
  EnergyModel bad = ok;
  bad.bulk.p = 1.5;
  CHECK_THROWS_AS(bad.validate(m), ValidationError);  // needs epsilon
  bad.bulk.epsilon = 0.1;
  CHECK_NOTHROW(bad.validate(m));
  bad = ok;
  bad.surface.r = 1.5;
  CHECK_THROWS_AS(bad.validate(m), ValidationError);
  bad = ok;
  bad.toughness.factor = {-1.0, 0.0, 0.0};
  CHECK_THROWS_AS(bad.validate(m), ValidationError);
  bad = ok;
  bad.body.lambda = 0.0;
  CHECK_FALSE(bad.conforming());
  CHECK_THROWS_AS(bad.validate(m), ValidationError);
  bad.allow_nonconforming = true;
  CHECK_NOTHROW(bad.validate(m));
}

TEST_CASE("growth certification passes on conforming models") {
  const Mesh m = strip_mesh();
  for (auto [p, eps] : {std::pair{2.0, 0.0}, {4.0, 0.0}, {1.5, 0.1}}) {
    EnergyModel model = model_on(m, p, eps);
    model.body.amplitude = LoadTable({{0.0, 0.0}, {1.0, 1.0}});
    model.surface.amplitude = LoadTable({{0.0, 0.0}, {1.0, 2.0}});
    model.toughness.kind = ToughnessKind::Elliptic;
    model.toughness.b = 3.0;
    const GrowthReport r = validate_growth(model, m, 500);
    for (const auto& c : r.checks) {
      INFO(c.name << " " << c.detail);
      CHECK(c.passed);
    }
    CHECK(r.find("W.lower") != nullptr);
    CHECK(r.find("kappa.bounds") != nullptr);
    CHECK(r.find("F.lower") != nullptr);
    CHECK(r.find("G.upper") != nullptr);
  }
}

TEST_CASE("growth certification flags missing confinement") {
  const Mesh m = strip_mesh();
  EnergyModel model = model_on(m, 2.0);
  model.body.lambda = 0.0;
  const GrowthReport r = validate_growth(model, m, 100);
  CHECK_FALSE(r.passed());
  REQUIRE(r.find("F.lower") != nullptr);
  CHECK_FALSE(r.find("F.lower")->passed);
}

TEST_CASE("scaling multiplies every energy coefficient") {
  const Mesh m = strip_mesh();
  EnergyModel model = model_on(m, 2.0);
  model.body.amplitude = LoadTable::constant(1.0);
  const EnergyModel s = model.scaled(3.0);
  CHECK(s.bulk.mu[0] == doctest::Approx(4.5));
  CHECK(s.body.lambda == doctest::Approx(3.0));
  CHECK(s.body.amplitude.value(0.0) == doctest::Approx(3.0));
}
