#include "qsfrac/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "qsfrac/error.hpp"

namespace qsfrac {

// ---------------------------------------------------------------- LoadTable

LoadTable::LoadTable(std::vector<std::pair<double, double>> knots) : knots_(std::move(knots)) {
  if (knots_.empty()) throw ValidationError("load table needs at least one knot");
  for (std::size_t i = 1; i < knots_.size(); ++i)
    if (!(knots_[i].first > knots_[i - 1].first))
      throw ValidationError("load table times must be strictly increasing");
}

double LoadTable::value(double t) const {
  if (knots_.empty()) return 0.0;
  if (t <= knots_.front().first) return knots_.front().second;
  if (t >= knots_.back().first) return knots_.back().second;
  auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                             [](double x, const auto& k) { return x < k.first; });
  const auto& [t1, v1] = *it;
  const auto& [t0, v0] = *(it - 1);
  double s = (t - t0) / (t1 - t0);
  return v0 + s * (v1 - v0);
}

double LoadTable::rate(double t, RateSide side) const {
  if (knots_.size() < 2) return 0.0;
  auto slope = [&](std::size_t i) {
    return (knots_[i + 1].second - knots_[i].second) / (knots_[i + 1].first - knots_[i].first);
  };
  if (side == RateSide::Right) {
    if (t < knots_.front().first || t >= knots_.back().first) return 0.0;
    auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                               [](double x, const auto& k) { return x < k.first; });
    return slope(static_cast<std::size_t>(it - knots_.begin()) - 1);
  }
  if (t < knots_.front().first) return 0.0;
  if (t == knots_.front().first) return slope(0);
  if (t > knots_.back().first) return 0.0;
  // First knot strictly >= t closes the interval to the left of t.
  auto it = std::lower_bound(knots_.begin(), knots_.end(), t,
                             [](const auto& k, double x) { return k.first < x; });
  auto i = static_cast<std::size_t>(it - knots_.begin());
  return slope(i - 1);
}

bool LoadTable::is_zero() const {
  return std::all_of(knots_.begin(), knots_.end(), [](const auto& k) { return k.second == 0.0; });
}

LoadTable LoadTable::scaled(double c) const {
  LoadTable out = *this;
  for (auto& k : out.knots_) k.second *= c;
  return out;
}

// ---------------------------------------------------------------- bulk law

BulkLaw BulkLaw::uniform(const Mesh& mesh, double p, double mu, double epsilon) {
  BulkLaw law;
  law.p = p;
  law.mu.assign(mesh.triangle_count(), mu);
  law.epsilon = epsilon;
  return law;
}

double bulk_energy_density(const BulkLaw& law, TriId t, const Vec2& xi) {
  const double mu = law.mu[t];
  const double e = law.eps();
  const double r2 = xi.squaredNorm() + e * e;
  if (law.p == 2.0) return 0.5 * mu * r2;
  return mu / law.p * std::pow(r2, 0.5 * law.p);
}

Vec2 stress(const BulkLaw& law, TriId t, const Vec2& xi) {
  const double mu = law.mu[t];
  if (law.p == 2.0) return mu * xi;
  const double e = law.eps();
  const double r2 = xi.squaredNorm() + e * e;
  if (r2 == 0.0) return Vec2::Zero();
  return mu * std::pow(r2, 0.5 * (law.p - 2.0)) * xi;
}

Mat2 stress_jacobian(const BulkLaw& law, TriId t, const Vec2& xi) {
  const double mu = law.mu[t];
  if (law.p == 2.0) return mu * Mat2::Identity();
  const double e = law.eps();
  const double r2 = xi.squaredNorm() + e * e;
  if (r2 == 0.0) return Mat2::Zero();
  const double s = std::pow(r2, 0.5 * (law.p - 2.0));
  return mu * s * (Mat2::Identity() + (law.p - 2.0) / r2 * xi * xi.transpose());
}

double bulk_conjugate_density(const BulkLaw& law, TriId t, const Vec2& sigma) {
  const double mu = law.mu[t];
  const double p = law.p;
  const double s = sigma.norm();
  const double e = law.eps();
  if (e == 0.0) {
    if (p == 2.0) return 0.5 * s * s / mu;
    const double pc = p / (p - 1.0);
    return std::pow(mu, -1.0 / (p - 1.0)) * std::pow(s, pc) / pc;
  }
  // Radial profile h(r) = mu/p (r^2+e^2)^{p/2}; solve h'(r) = s for r >= 0.
  auto dh = [&](double r) { return mu * std::pow(r * r + e * e, 0.5 * (p - 2.0)) * r; };
  double lo = 0.0, hi = std::max(1.0, s);
  while (dh(hi) < s) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-17 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    (dh(mid) < s ? lo : hi) = mid;
  }
  const double r = 0.5 * (lo + hi);
  return s * r - mu / p * std::pow(r * r + e * e, 0.5 * p);
}

// ---------------------------------------------------------------- toughness

const char* to_string(ToughnessKind kind) {
  switch (kind) {
    case ToughnessKind::Isotropic: return "isotropic";
    case ToughnessKind::WeightedL1: return "weighted_l1";
    case ToughnessKind::Elliptic: return "elliptic";
  }
  return "?";
}

double Toughness::operator()(const Vec2& x, const Vec2& nu) const {
  double n = 0.0;
  switch (kind) {
    case ToughnessKind::Isotropic: n = a * nu.norm(); break;
    case ToughnessKind::WeightedL1: n = a * std::abs(nu.x()) + b * std::abs(nu.y()); break;
    case ToughnessKind::Elliptic: n = std::sqrt(a * nu.x() * nu.x() + b * nu.y() * nu.y()); break;
  }
  return factor(x) * n;
}

std::pair<double, double> Toughness::bounds(const Mesh& mesh) const {
  // The factor is affine, so its extremes over the brittle closure sit at
  // brittle-edge endpoints.
  double fmin = std::numeric_limits<double>::infinity(), fmax = -fmin;
  for (const Edge& e : mesh.edges()) {
    if (!e.brittle) continue;
    for (VertexId v : e.v) {
      double f = factor(mesh.vertex(v));
      fmin = std::min(fmin, f);
      fmax = std::max(fmax, f);
    }
  }
  if (!std::isfinite(fmin)) {
    fmin = factor(mesh.vertex(0));
    fmax = fmin;
  }
  double lo = 0.0, hi = 0.0;
  switch (kind) {
    case ToughnessKind::Isotropic: lo = hi = a; break;
    case ToughnessKind::WeightedL1:
      lo = std::min(a, b);
      hi = std::sqrt(2.0) * std::max(a, b);
      break;
    case ToughnessKind::Elliptic:
      lo = std::sqrt(std::min(a, b));
      hi = std::sqrt(std::max(a, b));
      break;
  }
  return {fmin * lo, fmax * hi};
}

double edge_toughness_cost(const Toughness& tough, const Mesh& mesh, EdgeId e) {
  EdgeGeometry g = mesh.edge_geometry(e);
  return tough(g.midpoint, g.unit_normal) * g.length;
}

double surface_energy(const Toughness& tough, const Mesh& mesh, const CrackSet& crack) {
  double s = 0.0;
  for (EdgeId e : crack) {
    if (!mesh.is_crackable(e)) throw ValidationError("edge " + std::to_string(e) + " is not crackable");
    s += edge_toughness_cost(tough, mesh, e);
  }
  return s;
}

// ---------------------------------------------------------------- potentials

double BodyPotential::load(const Mesh& mesh, TriId tri, double t) const {
  return amplitude.value(t) * profile(mesh.centroid(tri));
}

double BodyPotential::load_rate(const Mesh& mesh, TriId tri, double t, RateSide side) const {
  return amplitude.rate(t, side) * profile(mesh.centroid(tri));
}

double BodyPotential::density(double f, double z) const {
  if (lambda == 0.0) return f * z;
  const double az = std::abs(z);
  return f * z - lambda / q * (q == 2.0 ? az * az : std::pow(az, q));
}

double BodyPotential::dz(double f, double z) const {
  if (lambda == 0.0) return f;
  if (q == 2.0) return f - lambda * z;
  const double az = std::abs(z);
  return f - lambda * std::pow(az, q - 1.0) * (z < 0 ? -1.0 : 1.0);
}

double BodyPotential::dzz(double z) const {
  if (lambda == 0.0) return 0.0;
  if (q == 2.0) return -lambda;
  const double az = std::max(std::abs(z), 1e-12);
  return -lambda * (q - 1.0) * std::pow(az, q - 2.0);
}

double BodyPotential::neg_conjugate(double f, double s) const {
  const double w = s + f;
  if (lambda == 0.0) {
    return std::abs(w) <= 1e-12 * (1.0 + std::abs(f)) ? 0.0 : std::numeric_limits<double>::infinity();
  }
  if (q == 2.0) return 0.5 * w * w / lambda;
  const double qc = q / (q - 1.0);
  return std::pow(lambda, -1.0 / (q - 1.0)) * std::pow(std::abs(w), qc) / qc;
}

double SurfacePotential::load(const Mesh& mesh, EdgeId e, double t) const {
  return amplitude.value(t) * profile(mesh.edge_geometry(e).midpoint);
}

double SurfacePotential::load_rate(const Mesh& mesh, EdgeId e, double t, RateSide side) const {
  return amplitude.rate(t, side) * profile(mesh.edge_geometry(e).midpoint);
}

std::vector<double> BoundaryProgram::nodal(const Mesh& mesh, double t) const {
  const double a = amplitude.value(t);
  std::vector<double> out(mesh.vertex_count());
  for (std::size_t v = 0; v < out.size(); ++v) out[v] = a * profile(mesh.vertex(static_cast<VertexId>(v)));
  return out;
}

std::vector<double> BoundaryProgram::nodal_rate(const Mesh& mesh, double t, RateSide side) const {
  const double a = amplitude.rate(t, side);
  std::vector<double> out(mesh.vertex_count());
  for (std::size_t v = 0; v < out.size(); ++v) out[v] = a * profile(mesh.vertex(static_cast<VertexId>(v)));
  return out;
}

PotentialValue body_value_and_gradient(const BodyPotential& pot, const Mesh& mesh, double t,
                                       std::span<const double> centroid_values) {
  PotentialValue out;
  out.density.resize(mesh.triangle_count());
  for (TriId tri = 0; tri < static_cast<TriId>(mesh.triangle_count()); ++tri) {
    const double f = pot.load(mesh, tri, t);
    const double z = centroid_values[tri];
    out.value += mesh.area(tri) * pot.density(f, z);
    out.density[tri] = pot.dz(f, z);
  }
  return out;
}

double body_rate(const BodyPotential& pot, const Mesh& mesh, double t,
                 std::span<const double> centroid_values, RateSide side) {
  double s = 0.0;
  for (TriId tri = 0; tri < static_cast<TriId>(mesh.triangle_count()); ++tri)
    s += mesh.area(tri) * pot.load_rate(mesh, tri, t, side) * centroid_values[tri];
  return s;
}

PotentialValue surface_value_and_gradient(const SurfacePotential& pot, const Mesh& mesh, double t,
                                          std::span<const double> trace) {
  PotentialValue out;
  const auto edges = mesh.edges_with_label(BoundaryLabel::SurfaceForce);
  out.density.resize(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const double g = pot.load(mesh, edges[i], t);
    out.value += mesh.edge_geometry(edges[i]).length * g * trace[i];
    out.density[i] = g;
  }
  return out;
}

double surface_rate(const SurfacePotential& pot, const Mesh& mesh, double t,
                    std::span<const double> trace, RateSide side) {
  const auto edges = mesh.edges_with_label(BoundaryLabel::SurfaceForce);
  double s = 0.0;
  for (std::size_t i = 0; i < edges.size(); ++i)
    s += mesh.edge_geometry(edges[i]).length * pot.load_rate(mesh, edges[i], t, side) * trace[i];
  return s;
}

// ---------------------------------------------------------------- model

void EnergyModel::validate(const Mesh& mesh) const {
  const double p = bulk.p;
  if (!(p > 1.0)) throw ValidationError("bulk exponent p must exceed 1");
  if (bulk.mu.size() != mesh.triangle_count()) throw ValidationError("stiffness needs one value per triangle");
  for (double m : bulk.mu)
    if (!(m > 0.0)) throw ValidationError("stiffness mu must be positive");
  if (bulk.epsilon < 0.0) throw ValidationError("regularization epsilon must be nonnegative");
  if (p < 2.0 && !(bulk.epsilon > 0.0))
    throw ValidationError("p < 2 requires a positive regularization epsilon");
  if (!(body.q > 1.0)) throw ValidationError("body exponent q must exceed 1");
  if (!(surface.r > 1.0)) throw ValidationError("surface exponent r must exceed 1");
  // Trace exponent range in two dimensions.
  if (surface.r < p) throw ValidationError("surface exponent r must satisfy r >= p");
  if (p < 2.0 && surface.r > p / (2.0 - p))
    throw ValidationError("surface exponent r must satisfy r <= p/(2-p) when p < 2");
  if (toughness.a <= 0.0 || (toughness.kind != ToughnessKind::Isotropic && toughness.b <= 0.0))
    throw ValidationError("toughness weights must be positive");
  auto [k1, k2] = toughness.bounds(mesh);
  if (!(k1 > 0.0) || !(k2 >= k1)) throw ValidationError("toughness must be positive on the brittle region");
  if (body.lambda < 0.0) throw ValidationError("confinement lambda must be nonnegative");
  if (body.lambda == 0.0 && !allow_nonconforming)
    throw ValidationError("confinement lambda = 0 violates coercivity; set allow_nonconforming to run anyway");
}

EnergyModel EnergyModel::scaled(double c) const {
  EnergyModel m = *this;
  for (double& v : m.bulk.mu) v *= c;
  m.toughness.factor.c0 *= c;
  m.toughness.factor.cx *= c;
  m.toughness.factor.cy *= c;
  m.body.lambda *= c;
  m.body.amplitude = body.amplitude.scaled(c);
  m.surface.amplitude = surface.amplitude.scaled(c);
  return m;
}

// ---------------------------------------------------------------- growth

bool GrowthReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const GrowthCheck& c) { return c.passed; });
}

const GrowthCheck* GrowthReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

namespace {

constexpr double kGrowthSlack = 1e-12;

struct MarginTracker {
  GrowthCheck check;
  explicit MarginTracker(std::string name) {
    check.name = std::move(name);
    check.worst_margin = std::numeric_limits<double>::infinity();
  }
  // Records rhs - lhs for an inequality lhs <= rhs.
  void le(double lhs, double rhs, const std::string& where) {
    const double m = (rhs - lhs) / (1.0 + std::abs(lhs) + std::abs(rhs));
    if (m < check.worst_margin) {
      check.worst_margin = m;
      if (m < -kGrowthSlack) check.detail = where;
    }
  }
  GrowthCheck done() {
    if (!std::isfinite(check.worst_margin)) check.worst_margin = 0.0;
    check.passed = check.worst_margin >= -kGrowthSlack;
    return std::move(check);
  }
};

std::vector<double> time_samples(const EnergyModel& m, std::mt19937_64& rng, int n) {
  std::vector<double> ts{0.0};
  double tmax = 1.0;
  for (const LoadTable* lt : {&m.body.amplitude, &m.surface.amplitude, &m.boundary.amplitude})
    for (const auto& k : lt->knots()) {
      ts.push_back(k.first);
      tmax = std::max(tmax, k.first);
    }
  std::uniform_real_distribution<double> U(0.0, tmax);
  for (int i = 0; i < n; ++i) ts.push_back(U(rng));
  return ts;
}

double lnorm_pow(std::span<const double> w, std::span<const double> u, double s) {
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += w[i] * std::pow(std::abs(u[i]), s);
  return acc;
}

double lnorm(std::span<const double> w, std::span<const double> u, double s) {
  return std::pow(lnorm_pow(w, u, s), 1.0 / s);
}

}  // namespace

GrowthReport validate_growth(const EnergyModel& model, const Mesh& mesh, int samples, unsigned seed) {
  if (samples < 1) throw ValidationError("validate_growth needs at least one sample");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  std::uniform_real_distribution<double> logscale(-3.0, 3.0);
  GrowthReport report;
  const int nt = static_cast<int>(mesh.triangle_count());

  // Bulk density.
  const BulkLaw& law = model.bulk;
  const double p = law.p, e = law.eps();
  double mu_min = *std::min_element(law.mu.begin(), law.mu.end());
  double mu_max = *std::max_element(law.mu.begin(), law.mu.end());
  const double cp = std::pow(2.0, std::max(0.5 * p - 1.0, 0.0));
  const double a0W = mu_min / p, b0W = 0.0;
  const double a1W = mu_max / p * cp, b1W = mu_max / p * cp * std::pow(e, p);
  const double a2W = p >= 2.0 ? mu_max * std::pow(2.0, std::max(0.5 * (p - 1.0) - 1.0, 0.0)) : mu_max;
  const double b2W = p >= 2.0 ? a2W * std::pow(e, p - 1.0) : 0.0;
  {
    MarginTracker lower("W.lower"), upper("W.upper"), grad("W.stress_bound");
    std::vector<Vec2> xis{Vec2::Zero(), Vec2(1, 0), Vec2(0, 1), Vec2(3, 4)};
    for (int i = 0; i < samples; ++i) xis.push_back(std::pow(10.0, logscale(rng)) * Vec2(N(rng), N(rng)));
    for (std::size_t i = 0; i < xis.size(); ++i) {
      const TriId tri = static_cast<TriId>(i % nt);
      const Vec2& xi = xis[i];
      const double W = bulk_energy_density(law, tri, xi);
      const double n = xi.norm();
      const std::string where = "|xi|=" + std::to_string(n);
      lower.le(a0W * std::pow(n, p) - b0W, W, where);
      upper.le(W, a1W * std::pow(n, p) + b1W, where);
      grad.le(stress(law, tri, xi).norm(), a2W * std::pow(n, p - 1.0) + b2W, where);
    }
    lower.check.constants = {{"a0", a0W}, {"b0", b0W}};
    upper.check.constants = {{"a1", a1W}, {"b1", b1W}};
    grad.check.constants = {{"a2", a2W}, {"b2", b2W}};
    report.checks.push_back(lower.done());
    report.checks.push_back(upper.done());
    report.checks.push_back(grad.done());
  }

  // Toughness.
  {
    auto [k1, k2] = model.toughness.bounds(mesh);
    MarginTracker bounds("kappa.bounds"), norm("kappa.norm");
    std::vector<Vec2> points;
    for (const Edge& ed : mesh.edges())
      if (ed.brittle) {
        points.push_back(mesh.vertex(ed.v[0]));
        points.push_back(0.5 * (mesh.vertex(ed.v[0]) + mesh.vertex(ed.v[1])));
      }
    if (points.empty()) points.push_back(mesh.vertex(0));
    for (int i = 0; i < samples; ++i) {
      const Vec2& x = points[i % points.size()];
      Vec2 nu(N(rng), N(rng)), mu2(N(rng), N(rng));
      const double k = model.toughness(x, nu);
      bounds.le(k1 * nu.norm(), k, "kappa lower");
      bounds.le(k, k2 * nu.norm(), "kappa upper");
      const double alpha = N(rng);
      norm.le(std::abs(model.toughness(x, alpha * nu) - std::abs(alpha) * k), 1e-12 * (1.0 + k), "homogeneity");
      norm.le(model.toughness(x, nu + mu2), k + model.toughness(x, mu2), "triangle inequality");
      norm.le(std::abs(model.toughness(x, -nu) - k), 0.0, "evenness");
    }
    bounds.check.constants = {{"K1", k1}, {"K2", k2}};
    GrowthCheck b = bounds.done();
    if (!(k1 > 0.0)) {
      b.passed = false;
      b.detail = "K1 must be positive";
    }
    report.checks.push_back(std::move(b));
    report.checks.push_back(norm.done());
  }

  const auto times = time_samples(model, rng, std::max(4, samples / 50));
  auto random_field = [&](std::size_t n) {
    std::vector<double> u(n);
    const double s = std::pow(10.0, logscale(rng));
    for (double& x : u) x = s * N(rng);
    return u;
  };

  // Body potential.
  {
    const BodyPotential& F = model.body;
    const double q = F.q, qc = q / (q - 1.0);
    const double qd = 0.5 * (1.0 + q), qdc = qd / (qd - 1.0);
    std::vector<double> area(nt);
    for (int i = 0; i < nt; ++i) area[i] = mesh.area(i);
    double sup_fqc = 0.0, sup_fnorm = 0.0;
    for (double t : times) {
      std::vector<double> f(nt);
      for (int i = 0; i < nt; ++i) f[i] = F.load(mesh, i, t);
      sup_fqc = std::max(sup_fqc, lnorm_pow(area, f, qc));
      sup_fnorm = std::max(sup_fnorm, lnorm(area, f, qc));
    }
    const double lam = F.lambda;
    const double a0F = lam / (2.0 * q);
    const double b0F = lam > 0.0 ? std::pow(0.5 * lam, -qc / q) / qc * sup_fqc : 0.0;
    const double a1F = (lam + 1.0) / q, b1F = sup_fqc / qc;
    const double a2F = std::max(lam, 1e-300), b2F = sup_fnorm;
    MarginTracker lo("F.lower"), up("F.upper"), gr("F.gradient_bound"), rt("F.rate_bound"),
        rg("F.rate_gradient_bound");
    int n_fields = std::max(4, samples / 100);
    for (int k = 0; k < n_fields; ++k) {
      auto u = random_field(nt);
      auto v = random_field(nt);
      if (k == 0) std::fill(u.begin(), u.end(), 0.0);
      for (double t : times) {
        auto val = body_value_and_gradient(F, mesh, t, u);
        const double uq = lnorm_pow(area, u, q);
        const double unorm = std::pow(uq, 1.0 / q);
        if (lam > 0.0) lo.le(a0F * uq - b0F, -val.value, "F lower at t=" + std::to_string(t));
        up.le(-val.value, a1F * uq + b1F, "F upper at t=" + std::to_string(t));
        double pairing = 0.0;
        for (int i = 0; i < nt; ++i) pairing += area[i] * val.density[i] * v[i];
        gr.le(std::abs(pairing), (a2F * std::pow(unorm, q - 1.0) + b2F) * lnorm(area, v, q), "dF bound");
        std::vector<double> fd(nt);
        for (int i = 0; i < nt; ++i) fd[i] = F.load_rate(mesh, i, t);
        const double a3 = 1.0 / qd, b3 = lnorm_pow(area, fd, qdc) / qdc;
        rt.le(std::abs(body_rate(F, mesh, t, u)), a3 * lnorm_pow(area, u, qd) + b3, "Fdot bound");
        double rpair = 0.0;
        for (int i = 0; i < nt; ++i) rpair += area[i] * fd[i] * v[i];
        rg.le(std::abs(rpair), lnorm(area, fd, qdc) * lnorm(area, v, qd), "dFdot bound");
      }
    }
    lo.check.constants = {{"a0", a0F}, {"b0", b0F}};
    up.check.constants = {{"a1", a1F}, {"b1", b1F}};
    gr.check.constants = {{"a2", a2F}, {"b2", b2F}};
    rt.check.constants = {{"qdot", qd}};
    GrowthCheck l = lo.done();
    if (!(a0F > 0.0)) {
      l.passed = false;
      l.detail = "a0 of the body potential must be positive (lambda_F = 0 is non-conforming)";
    }
    report.checks.push_back(std::move(l));
    report.checks.push_back(up.done());
    report.checks.push_back(gr.done());
    report.checks.push_back(rt.done());
    report.checks.push_back(rg.done());
  }

  // Surface potential.
  {
    const SurfacePotential& G = model.surface;
    const auto sedges = mesh.edges_with_label(BoundaryLabel::SurfaceForce);
    const std::size_t ns = sedges.size();
    const double r = G.r, rc = r / (r - 1.0);
    std::vector<double> len(ns);
    for (std::size_t i = 0; i < ns; ++i) len[i] = mesh.edge_geometry(sedges[i]).length;
    double sup_g = 0.0, sup_grc = 0.0;
    for (double t : times) {
      std::vector<double> g(ns);
      for (std::size_t i = 0; i < ns; ++i) g[i] = G.load(mesh, sedges[i], t);
      sup_g = std::max(sup_g, lnorm(len, g, rc));
      sup_grc = std::max(sup_grc, lnorm_pow(len, g, rc));
    }
    const double a0G = sup_g, b0G = 0.0, a1G = 1.0 / r, b1G = sup_grc / rc;
    MarginTracker lo("G.lower"), up("G.upper"), gr("G.gradient_bound"), rt("G.rate_bound"),
        rg("G.rate_gradient_bound");
    int n_fields = std::max(4, samples / 100);
    for (int k = 0; k < n_fields && ns > 0; ++k) {
      auto u = random_field(ns);
      auto v = random_field(ns);
      for (double t : times) {
        auto val = surface_value_and_gradient(G, mesh, t, u);
        const double unorm = lnorm(len, u, r);
        lo.le(-a0G * unorm - b0G, -val.value, "G lower");
        up.le(-val.value, a1G * std::pow(unorm, r) + b1G, "G upper");
        double pairing = 0.0;
        for (std::size_t i = 0; i < ns; ++i) pairing += len[i] * val.density[i] * v[i];
        gr.le(std::abs(pairing), sup_g * lnorm(len, v, r), "dG bound");
        std::vector<double> gd(ns);
        for (std::size_t i = 0; i < ns; ++i) gd[i] = G.load_rate(mesh, sedges[i], t);
        rt.le(std::abs(surface_rate(G, mesh, t, u)),
              std::pow(unorm, r) / r + lnorm_pow(len, gd, rc) / rc, "Gdot bound");
        double rpair = 0.0;
        for (std::size_t i = 0; i < ns; ++i) rpair += len[i] * gd[i] * v[i];
        rg.le(std::abs(rpair), lnorm(len, gd, rc) * lnorm(len, v, r), "dGdot bound");
      }
    }
    lo.check.constants = {{"a0", a0G}, {"b0", b0G}};
    up.check.constants = {{"a1", a1G}, {"b1", b1G}};
    gr.check.constants = {{"a2", 0.0}, {"b2", sup_g}};
    report.checks.push_back(lo.done());
    report.checks.push_back(up.done());
    report.checks.push_back(gr.done());
    report.checks.push_back(rt.done());
    report.checks.push_back(rg.done());
  }
  return report;
}

}  // namespace qsfrac
