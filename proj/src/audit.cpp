#include "qsfrac/audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "parallel.hpp"
#include "qsfrac/error.hpp"

namespace qsfrac {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

const char* to_string(StabilityLevel level) {
  switch (level) {
    case StabilityLevel::Euler: return "EULER";
    case StabilityLevel::OneEdge: return "ONE_EDGE";
    case StabilityLevel::Oracle: return "ORACLE";
  }
  return "?";
}

StabilityLevel stability_level_from_string(const std::string& name) {
  if (name == "EULER" || name == "euler") return StabilityLevel::Euler;
  if (name == "ONE_EDGE" || name == "one_edge") return StabilityLevel::OneEdge;
  if (name == "ORACLE" || name == "oracle") return StabilityLevel::Oracle;
  throw ValidationError("unknown stability level '" + name + "'");
}

bool AuditReport::passed(bool strict) const {
  for (const auto& c : checks) {
    if (c.verdict == Verdict::Fail) return false;
    if (strict && c.verdict == Verdict::Inconclusive) return false;
  }
  return true;
}

const CheckResult* AuditReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::string AuditReport::to_text() const {
  std::ostringstream os;
  os.precision(6);
  os << std::scientific;
  for (const auto& c : checks) {
    os << c.name << ": " << to_string(c.verdict);
    if (c.verdict == Verdict::Inconclusive && c.conditions_passed) os << " (necessary conditions passed)";
    os << "  margin=" << c.margin << " tol=" << c.tolerance << '\n';
    for (const auto& [k, v] : c.metrics) os << "  " << k << " = " << v << '\n';
    if (!c.knots.empty()) {
      os << "  knots:";
      for (int k : c.knots) os << ' ' << k;
      os << '\n';
    }
    for (const auto& [k, e] : c.edges) os << "  knot " << k << " edge " << e << '\n';
    if (!c.detail.empty()) os << "  " << c.detail << '\n';
  }
  os << "overall: " << (passed() ? "PASS" : "FAIL") << '\n';
  return os.str();
}

std::string AuditReport::to_json() const {
  nlohmann::json j;
  j["passed"] = passed();
  j["checks"] = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json o;
    o["name"] = c.name;
    o["verdict"] = to_string(c.verdict);
    o["conditions_passed"] = c.conditions_passed;
    o["margin"] = c.margin;
    o["tolerance"] = c.tolerance;
    o["detail"] = c.detail;
    o["knots"] = c.knots;
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [k, e] : c.edges) edges.push_back({{"knot", k}, {"edge", e}});
    o["edges"] = edges;
    nlohmann::json m = nlohmann::json::object();
    for (const auto& [k, v] : c.metrics) m[k] = v;
    o["metrics"] = m;
    j["checks"].push_back(o);
  }
  return j.dump(2);
}

// ---------------------------------------------------------------- irreversibility

CheckResult check_irreversibility(const EvolutionRecord& record) {
  CheckResult r;
  r.name = "irreversibility";
  for (std::size_t i = 1; i < record.knots.size(); ++i) {
    const auto lost = record.knots[i - 1].crack.minus(record.knots[i].crack);
    if (lost.empty()) continue;
    r.verdict = Verdict::Fail;
    r.conditions_passed = false;
    r.knots.push_back(static_cast<int>(i));
    for (EdgeId e : lost) r.edges.emplace_back(static_cast<int>(i), e);
  }
  r.margin = static_cast<double>(r.edges.size());
  if (r.verdict == Verdict::Fail) r.detail = "crack edges disappear at the listed knots";
  return r;
}

// ---------------------------------------------------------------- energy balance

BalanceReport check_energy_balance(const EvolutionRecord& record, const EnergyModel& /*model*/,
                                   const AuditTolerances& tol) {
  if (record.knots.empty()) throw ValidationError("energy balance needs at least one knot");
  for (std::size_t i = 0; i < record.knots.size(); ++i)
    if (!record.knots[i].has_power) throw ValidationError("knot " + std::to_string(i) + " has no power samples");
  BalanceReport b;
  const auto& K = record.knots;
  const std::size_t n = K.size();
  b.profile.assign(n, 0.0);
  b.interval.assign(n, 0.0);
  double cum = 0.0, cum_ex = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double dt = K[i].t - K[i - 1].t;
    const double dE = K[i].energy.total() - K[i - 1].energy.total();
    const double trap = 0.5 * dt * (K[i - 1].power_right.total() + K[i].power.total());
    const double d = dE - trap;
    const double riemann = std::abs(dt * K[i].power.total() - dE);
    const bool jump = !(K[i].crack == K[i - 1].crack);
    b.interval[i] = d;
    cum += d;
    b.profile[i] = cum;
    b.gap = std::max(b.gap, std::abs(cum));
    b.riemann_defect += riemann;
    if (jump) {
      b.excluded.push_back(static_cast<int>(i));
    } else {
      cum_ex += d;
      b.gap_excluded = std::max(b.gap_excluded, std::abs(cum_ex));
      b.riemann_defect_excluded += riemann;
    }
  }
  const double scale = 1.0 + std::abs(K.back().energy.total());
  CheckResult& r = b.result;
  r.name = "energy_balance";
  r.tolerance = tol.balance * scale;
  r.margin = b.gap;
  r.verdict = b.gap <= r.tolerance ? Verdict::Pass : Verdict::Fail;
  r.conditions_passed = r.verdict == Verdict::Pass;
  r.metrics = {{"gap", b.gap},
               {"gap_excluded", b.gap_excluded},
               {"riemann_defect", b.riemann_defect},
               {"riemann_defect_excluded", b.riemann_defect_excluded},
               {"relative_gap", b.gap / scale}};
  r.knots = b.excluded;
  if (!b.excluded.empty()) r.detail = "listed knots end intervals with a crack jump";
  return b;
}

// ---------------------------------------------------------------- global stability

namespace {

SolveOptions audit_solve() {
  SolveOptions o;
  o.solver = LinearSolver::ConjugateGradient;
  o.cg_relative_tol = 1e-12;
  o.tol = 1e-10;
  return o;
}

double candidate_energy(const EnergyModel& model, const Mesh& mesh, const CrackSet& crack, double t) {
  const auto s = minimize_elastic(model, DofTopology::build(mesh, crack), t, audit_solve());
  return s.report.energy + surface_energy(model.toughness, mesh, crack);
}

}  // namespace

CheckResult check_global_stability(const EvolutionRecord& record, const EnergyModel& model, const Mesh& mesh,
                                   StabilityLevel level, const AuditTolerances& tol, int threads) {
  const int nthreads = threads > 0 ? threads : thread_count_from_env();
  CheckResult r;
  r.name = "global_stability";
  r.tolerance = tol.energy;

  // Elastic minimality at the recorded crack.
  double worst_res = 0.0;
  for (std::size_t i = 0; i < record.knots.size(); ++i) {
    const double res = euler_residual(model, record.knots[i].t, record.knots[i].field);
    worst_res = std::max(worst_res, res);
    if (!(res <= tol.residual)) r.knots.push_back(static_cast<int>(i));
  }
  r.metrics.push_back({"max_euler_residual", worst_res});
  bool ok = r.knots.empty();
  double margin = std::numeric_limits<double>::infinity();

  if (level != StabilityLevel::Euler) {
    const auto crackable = mesh.crackable_edges();
    for (std::size_t i = 0; i < record.knots.size(); ++i) {
      const KnotState& k = record.knots[i];
      const double Ei = k.energy.total();
      const double scale = 1.0 + std::abs(Ei);
      std::vector<EdgeId> cand;
      for (EdgeId e : crackable)
        if (!k.crack.contains(e)) cand.push_back(e);
      std::vector<CrackSet> sets;
      if (level == StabilityLevel::OneEdge) {
        for (EdgeId e : cand) sets.push_back(k.crack.with(e));
      } else {
        if (static_cast<int>(cand.size()) > tol.max_oracle_edges)
          throw LimitError("ORACLE stability refused: " + std::to_string(cand.size()) +
                           " candidate edges exceed the limit of " + std::to_string(tol.max_oracle_edges) +
                           "; audit at ONE_EDGE level or use a coarser brittle region");
        if (cand.empty()) continue;
        // Supersets whose surface cost plus the fully-cracked elastic minimum
        // cannot undercut E_i are skipped.
        CrackSet full = k.crack;
        for (EdgeId e : cand) full = full.with(e);
        const double floor = minimize_elastic(model, DofTopology::build(mesh, full), k.t, audit_solve()).report.energy;
        const double base = surface_energy(model.toughness, mesh, k.crack);
        std::vector<double> cost(cand.size());
        for (std::size_t j = 0; j < cand.size(); ++j) cost[j] = edge_toughness_cost(model.toughness, mesh, cand[j]);
        const std::uint64_t count = std::uint64_t{1} << cand.size();
        double lower_skipped = std::numeric_limits<double>::infinity();
        for (std::uint64_t mask = 1; mask < count; ++mask) {
          double c = base;
          for (std::size_t j = 0; j < cand.size(); ++j)
            if (mask >> j & 1U) c += cost[j];
          if (floor + c > Ei + tol.energy * scale) {
            lower_skipped = std::min(lower_skipped, floor + c);
            continue;
          }
          std::vector<EdgeId> edges = k.crack.edges();
          for (std::size_t j = 0; j < cand.size(); ++j)
            if (mask >> j & 1U) edges.push_back(cand[j]);
          std::sort(edges.begin(), edges.end());
          sets.push_back(CrackSet::unchecked(std::move(edges)));
        }
        if (lower_skipped < std::numeric_limits<double>::infinity())
          margin = std::min(margin, (lower_skipped - Ei) / scale);
      }
      std::vector<double> energies(sets.size());
      detail::parallel_for(sets.size(), nthreads,
                           [&](std::size_t j) { energies[j] = candidate_energy(model, mesh, sets[j], k.t); });
      bool knot_ok = true;
      for (std::size_t j = 0; j < sets.size(); ++j) {
        const double m = (energies[j] - Ei) / scale;
        margin = std::min(margin, m);
        if (m < -tol.energy) {
          knot_ok = false;
          for (EdgeId e : sets[j].minus(k.crack)) r.edges.emplace_back(static_cast<int>(i), e);
        }
      }
      if (!knot_ok) {
        ok = false;
        if (std::find(r.knots.begin(), r.knots.end(), static_cast<int>(i)) == r.knots.end())
          r.knots.push_back(static_cast<int>(i));
      }
    }
    std::sort(r.knots.begin(), r.knots.end());
  }
  r.margin = std::isfinite(margin) ? margin : 0.0;
  r.conditions_passed = ok;
  if (!ok) {
    r.verdict = Verdict::Fail;
    r.detail = std::string(to_string(level)) + " conditions violated at the listed knots";
  } else if (level == StabilityLevel::Oracle) {
    r.verdict = Verdict::Pass;
    r.detail = "ORACLE: no superset of any recorded crack lowers the energy";
  } else {
    r.verdict = Verdict::Inconclusive;
    r.detail = std::string(to_string(level)) + " checks only necessary conditions";
  }
  return r;
}

// ---------------------------------------------------------------- structure

CheckResult check_structure(const EvolutionRecord& record, const EnergyModel& model, const AuditTolerances& tol) {
  CheckResult r;
  r.name = "structure";
  if (record.knots.empty()) return r;
  const Mesh& mesh = record.knots[0].field.mesh();
  CrackSet reached = record.knots[0].crack;
  std::size_t never = 0, outside = 0;
  for (std::size_t i = 0; i < record.knots.size(); ++i) {
    const KnotState& k = record.knots[i];
    const auto psi = model.boundary.nodal(mesh, k.t);
    const double jt = tol.jump >= 0.0 ? tol.jump : default_jump_tolerance(psi);
    reached = reached.united(jump_support(k.field, psi, jt));
    for (EdgeId e : k.crack.minus(reached)) {
      r.edges.emplace_back(static_cast<int>(i), e);
      ++never;
    }
    for (EdgeId e : reached.minus(k.crack)) {
      r.edges.emplace_back(static_cast<int>(i), e);
      ++outside;
    }
    if (!(reached == k.crack)) r.knots.push_back(static_cast<int>(i));
  }
  r.metrics = {{"cracked_without_jump", static_cast<double>(never)},
               {"jump_outside_crack", static_cast<double>(outside)}};
  r.margin = static_cast<double>(never + outside);
  if (!r.knots.empty()) {
    r.verdict = Verdict::Fail;
    r.conditions_passed = false;
    r.detail = "crack set differs from the accumulated jump support";
  }
  return r;
}

// ---------------------------------------------------------------- duality

DualField dual_field(const EnergyModel& model, double t, const BrokenField& u) {
  const Mesh& mesh = u.mesh();
  DualField s;
  const auto g = u.gradient();
  const auto uc = u.centroid_values();
  s.stress.resize(g.size());
  s.body.resize(g.size());
  for (TriId tri = 0; tri < static_cast<TriId>(g.size()); ++tri) {
    s.stress[tri] = stress(model.bulk, tri, g[tri]);
    s.body[tri] = -model.body.dz(model.body.load(mesh, tri, t), uc[tri]);
  }
  for (EdgeId e : mesh.edges_with_label(BoundaryLabel::SurfaceForce)) s.surface.push_back(-model.surface.load(mesh, e, t));
  return s;
}

double FenchelTerms::gap() const { return std::abs(primal + conjugate - pairing); }
double FenchelTerms::relative_gap() const { return gap() / (1.0 + std::abs(primal)); }

FenchelTerms fenchel_young(const EnergyModel& model, double t, const BrokenField& u, const DualField& sigma) {
  const Mesh& mesh = u.mesh();
  const auto g = u.gradient();
  const auto uc = u.centroid_values();
  const auto um = u.trace_on_surface_part();
  FenchelTerms f;
  for (TriId tri = 0; tri < static_cast<TriId>(g.size()); ++tri) {
    const double A = mesh.area(tri);
    const double load = model.body.load(mesh, tri, t);
    f.primal += A * (bulk_energy_density(model.bulk, tri, g[tri]) - model.body.density(load, uc[tri]));
    f.conjugate += A * (bulk_conjugate_density(model.bulk, tri, sigma.stress[tri]) +
                        model.body.neg_conjugate(load, sigma.body[tri]));
    f.pairing += A * (sigma.stress[tri].dot(g[tri]) + sigma.body[tri] * uc[tri]);
  }
  const auto edges = mesh.edges_with_label(BoundaryLabel::SurfaceForce);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const double L = mesh.edge_geometry(edges[i]).length;
    const double load = model.surface.load(mesh, edges[i], t);
    f.primal -= L * load * um[i];
    // The conjugate of -G is the indicator of {s = -g}.
    if (std::abs(sigma.surface[i] + load) > 1e-12 * (1.0 + std::abs(load)))
      f.conjugate = std::numeric_limits<double>::infinity();
    f.pairing += L * sigma.surface[i] * um[i];
  }
  return f;
}

DualCertificate dual_certificate(const EnergyModel& model, double t, const BrokenField& u) {
  if (!(model.bulk.p > 1.0) || model.body.lambda < 0.0) throw ValidationError("dual certificate needs a convex model");
  const Mesh& mesh = u.mesh();
  const DofTopology& topo = u.topology();
  const DualField s = dual_field(model, t, u);
  std::vector<double> r(topo.dof_count(), 0.0);
  for (TriId tri = 0; tri < static_cast<TriId>(mesh.triangle_count()); ++tri) {
    const auto B = basis_gradients(mesh, tri);
    const double A = mesh.area(tri);
    const auto d = topo.triangle_dofs(tri);
    for (int k = 0; k < 3; ++k) r[d[k]] += A * (s.stress[tri].dot(B.col(k)) + s.body[tri] / 3.0);
  }
  const auto edges = mesh.edges_with_label(BoundaryLabel::SurfaceForce);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = mesh.edge(edges[i]);
    const double L = mesh.edge_geometry(edges[i]).length;
    for (VertexId v : e.v) r[topo.dof(e.tri[0], mesh.local_index(e.tri[0], v))] += 0.5 * L * s.surface[i];
  }
  DualCertificate c;
  double sq = 0.0;
  for (int d : topo.free_dofs()) sq += r[d] * r[d];
  c.annihilation = std::sqrt(sq);
  c.fenchel = fenchel_young(model, t, u, s);
  return c;
}

// ---------------------------------------------------------------- continuity probe

namespace {

double weighted_norm(const std::vector<double>& w, const std::vector<double>& v, double s) {
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) acc += w[i] * std::pow(std::abs(v[i]), s);
  return std::pow(acc, 1.0 / s);
}

}  // namespace

ProbeReport stress_continuity_probe(const EvolutionRecord& record, const EnergyModel& model, int t_index,
                                    int window) {
  ProbeReport out;
  const int n = static_cast<int>(record.knots.size());
  if (t_index < 0 || t_index >= n) throw ValidationError("probe knot out of range");
  if (window < 1) throw ValidationError("probe window must be at least 1");
  const int start = std::max(0, t_index - window);
  if (t_index == 0) {
    out.verdict = Verdict::Inconclusive;
    out.detail = "no knots before the probed knot";
    return out;
  }
  const KnotState& kt = record.knots[t_index];
  for (int i = start; i < t_index; ++i) {
    if (!(record.knots[i].crack == kt.crack)) {
      out.verdict = Verdict::Inconclusive;
      out.detail = "crack changes inside the window at knot " + std::to_string(i + 1);
      return out;
    }
  }
  const Mesh& mesh = kt.field.mesh();
  const double p = model.bulk.p, pc = p / (p - 1.0), q = model.body.q, r = model.surface.r;
  std::vector<double> area(mesh.triangle_count()), len;
  for (TriId tri = 0; tri < static_cast<TriId>(area.size()); ++tri) area[tri] = mesh.area(tri);
  for (EdgeId e : mesh.edges_with_label(BoundaryLabel::SurfaceForce)) len.push_back(mesh.edge_geometry(e).length);

  const auto gt = kt.field.gradient();
  const auto ct = kt.field.centroid_values();
  const auto mt = kt.field.trace_on_surface_part();
  for (int i = t_index - 1; i >= start; --i) {
    const KnotState& ks = record.knots[i];
    const auto gs = ks.field.gradient();
    const auto cs = ks.field.centroid_values();
    const auto ms = ks.field.trace_on_surface_part();
    std::vector<double> ds(area.size()), dg(area.size()), dc(area.size()), dm(len.size());
    for (TriId tri = 0; tri < static_cast<TriId>(area.size()); ++tri) {
      ds[tri] = (stress(model.bulk, tri, gs[tri]) - stress(model.bulk, tri, gt[tri])).norm();
      dg[tri] = (gs[tri] - gt[tri]).norm();
      dc[tri] = cs[tri] - ct[tri];
    }
    for (std::size_t e = 0; e < len.size(); ++e) dm[e] = ms[e] - mt[e];
    ProbeRow row;
    row.knot = i;
    row.s = ks.t;
    row.distance = kt.t - ks.t;
    row.stress = weighted_norm(area, ds, pc);
    row.gradient = weighted_norm(area, dg, p);
    row.body = weighted_norm(area, dc, q);
    row.trace = len.empty() ? 0.0 : weighted_norm(len, dm, r);
    out.rows.push_back(row);
  }

  auto column = [](const ProbeRow& w, int c) {
    switch (c) {
      case 0: return w.stress;
      case 1: return w.gradient;
      case 2: return w.body;
      default: return w.trace;
    }
  };
  bool ok = true;
  for (int c = 0; c < 4; ++c) {
    double C = 0.0, dmax = 0.0;
    for (std::size_t k = 0; k < std::min<std::size_t>(2, out.rows.size()); ++k)
      C = std::max(C, column(out.rows[k], c) / out.rows[k].distance);
    const double c1 = column(out.rows[0], c) / out.rows[0].distance;
    double dev = 0.0;
    for (const auto& w : out.rows) {
      const double d = column(w, c);
      dmax = std::max(dmax, d);
      if (d > C * w.distance * (1.0 + 1e-9) + 1e-14) ok = false;
      dev = std::max(dev, std::abs(d - c1 * w.distance));
    }
    out.lipschitz[c] = C;
    out.linearity[c] = dmax > 0.0 ? dev / dmax : 0.0;
  }

  // Three-point collinearity of the DOF vectors over consecutive window knots.
  double coll = 0.0;
  for (int i = start; i + 2 <= t_index; ++i) {
    const auto& a = record.knots[i];
    const auto& b = record.knots[i + 1];
    const auto& c = record.knots[i + 2];
    const auto& va = a.field.values();
    const auto& vb = b.field.values();
    const auto& vc = c.field.values();
    const double w = (b.t - a.t) / (c.t - a.t);
    double dev = 0.0, mag = 0.0;
    for (std::size_t d = 0; d < vb.size(); ++d) {
      dev = std::max(dev, std::abs(vb[d] - ((1.0 - w) * va[d] + w * vc[d])));
      mag = std::max({mag, std::abs(va[d]), std::abs(vb[d]), std::abs(vc[d])});
    }
    coll = std::max(coll, dev / (1.0 + mag));
  }
  out.collinearity = coll;
  out.verdict = ok ? Verdict::Pass : Verdict::Fail;
  if (!ok) out.detail = "a distance column exceeds the fitted Lipschitz bound";
  return out;
}

// ---------------------------------------------------------------- orchestration

AuditReport run_audit(const EvolutionRecord& record, const EnergyModel& model, const Mesh& mesh,
                      const AuditSelection& sel, const AuditTolerances& tol, int threads) {
  AuditReport rep;
  if (!record.complete) {
    CheckResult r;
    r.name = "completeness";
    r.verdict = Verdict::Fail;
    r.conditions_passed = false;
    r.detail = "evolution stopped early: " + record.failure;
    r.knots.push_back(static_cast<int>(record.knots.size()));
    rep.checks.push_back(r);
  }
  if (sel.irreversibility) rep.checks.push_back(check_irreversibility(record));
  if (sel.balance) rep.checks.push_back(check_energy_balance(record, model, tol).result);
  if (sel.stability) rep.checks.push_back(check_global_stability(record, model, mesh, sel.level, tol, threads));
  if (sel.structure) rep.checks.push_back(check_structure(record, model, tol));
  if (sel.duality) {
    CheckResult r;
    r.name = "duality";
    r.tolerance = tol.fenchel;
    double worst_ann = 0.0, worst_gap = 0.0;
    for (std::size_t i = 0; i < record.knots.size(); ++i) {
      const auto c = dual_certificate(model, record.knots[i].t, record.knots[i].field);
      worst_ann = std::max(worst_ann, c.annihilation);
      worst_gap = std::max(worst_gap, c.fenchel.relative_gap());
      if (!(c.annihilation <= tol.residual) || !(c.fenchel.relative_gap() <= tol.fenchel))
        r.knots.push_back(static_cast<int>(i));
    }
    r.metrics = {{"max_annihilation", worst_ann}, {"max_relative_fenchel_gap", worst_gap}};
    r.margin = worst_gap;
    if (!r.knots.empty()) {
      r.verdict = Verdict::Fail;
      r.conditions_passed = false;
      r.detail = "dual certificate fails at the listed knots";
    }
    rep.checks.push_back(r);
  }
  return rep;
}

}  // namespace qsfrac
