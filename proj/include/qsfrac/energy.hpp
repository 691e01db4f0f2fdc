#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "qsfrac/crack_set.hpp"
#include "qsfrac/mesh.hpp"

namespace qsfrac {

using Mat2 = Eigen::Matrix2d;

// Which piece of a piecewise-linear program supplies the time derivative at a knot.
enum class RateSide { Left, Right };

/// Piecewise-linear function of time given by (t, value) knots. Constant
/// extension outside the knot range.
class LoadTable {
 public:
  LoadTable() = default;  // identically zero
  explicit LoadTable(std::vector<std::pair<double, double>> knots);
  static LoadTable constant(double v) { return LoadTable({{0.0, v}}); }

  double value(double t) const;
  // Left: slope on the interval ending at t (right slope at the first knot).
  // Right: slope on the interval starting at t (0 from the last knot on).
  double rate(double t, RateSide side = RateSide::Left) const;
  const std::vector<std::pair<double, double>>& knots() const { return knots_; }
  bool is_zero() const;
  LoadTable scaled(double c) const;

 private:
  std::vector<std::pair<double, double>> knots_;
};

/// c0 + cx*x + cy*y.
struct SpatialProfile {
  double c0 = 1.0, cx = 0.0, cy = 0.0;
  double operator()(const Vec2& p) const { return c0 + cx * p.x() + cy * p.y(); }
};

struct BulkLaw {
  double p = 2.0;
  std::vector<double> mu;  // per triangle
  double epsilon = 0.0;    // regularization, only used when p < 2

  static BulkLaw uniform(const Mesh& mesh, double p, double mu, double epsilon = 0.0);
  double eps() const { return p < 2.0 ? epsilon : 0.0; }
};

double bulk_energy_density(const BulkLaw& law, TriId t, const Vec2& xi);
Vec2 stress(const BulkLaw& law, TriId t, const Vec2& xi);
Mat2 stress_jacobian(const BulkLaw& law, TriId t, const Vec2& xi);
// Convex conjugate of xi -> W(x, xi), evaluated at a stress density.
double bulk_conjugate_density(const BulkLaw& law, TriId t, const Vec2& sigma);

enum class ToughnessKind { Isotropic, WeightedL1, Elliptic };
const char* to_string(ToughnessKind kind);

/// kappa(x, nu) = factor(x) * norm(nu), with norm one of
///   Isotropic:   a |nu|
///   WeightedL1:  a |nu_1| + b |nu_2|
///   Elliptic:    sqrt(a nu_1^2 + b nu_2^2)
struct Toughness {
  ToughnessKind kind = ToughnessKind::Isotropic;
  double a = 1.0, b = 1.0;
  SpatialProfile factor{};

  double operator()(const Vec2& x, const Vec2& nu) const;
  // K1, K2 over the brittle region of the mesh.
  std::pair<double, double> bounds(const Mesh& mesh) const;
};

double surface_energy(const Toughness& tough, const Mesh& mesh, const CrackSet& crack);
double edge_toughness_cost(const Toughness& tough, const Mesh& mesh, EdgeId e);

/// F(t,x,z) = f(t,x) z - (lambda/q)|z|^q with f = amplitude(t) * profile(x).
struct BodyPotential {
  LoadTable amplitude;
  SpatialProfile profile{1.0, 0.0, 0.0};
  double lambda = 1.0;
  double q = 2.0;

  double load(const Mesh& mesh, TriId tri, double t) const;
  double load_rate(const Mesh& mesh, TriId tri, double t, RateSide side = RateSide::Left) const;
  double density(double f, double z) const;
  double dz(double f, double z) const;
  double dzz(double z) const;
  // Conjugate of z -> -F(t,x,z) at s.
  double neg_conjugate(double f, double s) const;
};

/// G(t,x,z) = g(t,x) z on surface-force edges, g = amplitude(t) * profile(x).
struct SurfacePotential {
  LoadTable amplitude;
  SpatialProfile profile{1.0, 0.0, 0.0};
  double r = 2.0;

  double load(const Mesh& mesh, EdgeId e, double t) const;
  double load_rate(const Mesh& mesh, EdgeId e, double t, RateSide side = RateSide::Left) const;
};

/// psi(t,x) = amplitude(t) * profile(x); nodal values define the P1 extension.
struct BoundaryProgram {
  LoadTable amplitude;
  SpatialProfile profile{0.0, 0.0, 0.0};

  std::vector<double> nodal(const Mesh& mesh, double t) const;
  std::vector<double> nodal_rate(const Mesh& mesh, double t, RateSide side = RateSide::Left) const;
};

struct EnergyModel {
  BulkLaw bulk;
  Toughness toughness;
  BodyPotential body;
  SurfacePotential surface;
  BoundaryProgram boundary;
  bool allow_nonconforming = false;

  /// Checks every structural hypothesis that can be checked without sampling.
  void validate(const Mesh& mesh) const;
  bool conforming() const { return body.lambda > 0.0; }
  // Multiplies mu, kappa, lambda, f and g by c.
  EnergyModel scaled(double c) const;
};

struct PotentialValue {
  double value = 0.0;
  std::vector<double> density;  // dz F (per triangle) or dz G (per surface edge)
};

/// One-point (centroid) quadrature over triangles.
PotentialValue body_value_and_gradient(const BodyPotential& pot, const Mesh& mesh, double t,
                                       std::span<const double> centroid_values);
double body_rate(const BodyPotential& pot, const Mesh& mesh, double t,
                 std::span<const double> centroid_values, RateSide side = RateSide::Left);
/// Midpoint quadrature over surface-force edges, in mesh.edges_with_label order.
PotentialValue surface_value_and_gradient(const SurfacePotential& pot, const Mesh& mesh, double t,
                                          std::span<const double> trace);
double surface_rate(const SurfacePotential& pot, const Mesh& mesh, double t,
                    std::span<const double> trace, RateSide side = RateSide::Left);

struct GrowthCheck {
  std::string name;
  std::vector<std::pair<std::string, double>> constants;
  double worst_margin = 0.0;
  bool passed = true;
  std::string detail;
};

struct GrowthReport {
  std::vector<GrowthCheck> checks;
  bool passed() const;
  const GrowthCheck* find(const std::string& name) const;
};

/// Certifies the growth inequalities for W, kappa, F and G on deterministic
/// plus seeded-random samples. Never throws on a violated inequality; the
/// report carries the verdict.
GrowthReport validate_growth(const EnergyModel& model, const Mesh& mesh, int samples,
                             unsigned seed = 12345);

}  // namespace qsfrac
