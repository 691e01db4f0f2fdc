#include "qsfrac/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

#include "parallel.hpp"
#include "qsfrac/error.hpp"

namespace qsfrac {

const char* to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::BruteForce: return "BRUTE_FORCE";
    case StrategyKind::Greedy: return "GREEDY";
    case StrategyKind::GreedyWithPairs: return "GREEDY_WITH_PAIRS";
  }
  return "?";
}

StrategyKind strategy_from_string(const std::string& name) {
  if (name == "BRUTE_FORCE" || name == "brute_force" || name == "brute") return StrategyKind::BruteForce;
  if (name == "GREEDY" || name == "greedy") return StrategyKind::Greedy;
  if (name == "GREEDY_WITH_PAIRS" || name == "greedy_with_pairs" || name == "pairs")
    return StrategyKind::GreedyWithPairs;
  throw ValidationError("unknown strategy '" + name + "'");
}

const char* to_string(Certification level) {
  switch (level) {
    case Certification::Exact: return "EXACT";
    case Certification::SingleEdge: return "SINGLE_EDGE";
    case Certification::EdgePairs: return "EDGE_PAIRS";
  }
  return "?";
}

Certification certification_from_string(const std::string& name) {
  if (name == "EXACT") return Certification::Exact;
  if (name == "SINGLE_EDGE") return Certification::SingleEdge;
  if (name == "EDGE_PAIRS") return Certification::EdgePairs;
  throw ValidationError("unknown certification level '" + name + "'");
}

Certification SearchStrategy::certification() const {
  switch (kind) {
    case StrategyKind::BruteForce: return Certification::Exact;
    case StrategyKind::Greedy: return Certification::SingleEdge;
    case StrategyKind::GreedyWithPairs: return Certification::EdgePairs;
  }
  return Certification::Exact;
}

TimeGrid TimeGrid::uniform(double T, int n) {
  if (!(T > 0.0)) throw ValidationError("time horizon must be positive");
  if (n < 1) throw ValidationError("uniform grid needs at least one interval");
  TimeGrid g;
  g.knots.resize(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) g.knots[i] = T * static_cast<double>(i) / static_cast<double>(n);
  g.knots.back() = T;
  return g;
}

TimeGrid TimeGrid::from_knots(std::vector<double> knots) {
  TimeGrid g{std::move(knots)};
  g.validate();
  return g;
}

void TimeGrid::validate() const {
  if (knots.empty()) throw ValidationError("empty time grid");
  if (knots.front() != 0.0) throw ValidationError("time grid must start at 0");
  for (std::size_t i = 1; i < knots.size(); ++i)
    if (!(knots[i] > knots[i - 1])) throw ValidationError("time grid must be strictly increasing");
}

std::vector<int> EvolutionRecord::jump_knots() const {
  std::vector<int> out;
  for (std::size_t i = 1; i < knots.size(); ++i)
    if (!(knots[i].crack == knots[i - 1].crack)) out.push_back(static_cast<int>(i));
  return out;
}

int thread_count_from_env() {
  const char* s = std::getenv("QSFRAC_THREADS");
  if (!s || !*s) return 1;
  char* end = nullptr;
  const long v = std::strtol(s, &end, 10);
  if (end == s || *end != '\0' || v < 1) return 1;
  return static_cast<int>(std::min<long>(v, 256));
}

EnergyBreakdown total_energy(const EnergyModel& model, double t, const BrokenField& u) {
  const ElasticEnergy el = elastic_energy(model, t, u);
  EnergyBreakdown e;
  e.bulk = el.bulk;
  e.body = el.body;
  e.surface_force = el.surface_force;
  e.surface = surface_energy(model.toughness, u.mesh(), u.topology().crack());
  return e;
}

PowerSample power_sample(const EnergyModel& model, double t, const BrokenField& u, RateSide side) {
  const Mesh& mesh = u.mesh();
  const BrokenField rate = BrokenField::interpolate(u.topology_ptr(), model.boundary.nodal_rate(mesh, t, side));
  const auto gu = u.gradient();
  const auto gr = rate.gradient();
  const auto uc = u.centroid_values();
  const auto rc = rate.centroid_values();
  PowerSample ps;
  for (TriId tri = 0; tri < static_cast<TriId>(mesh.triangle_count()); ++tri) {
    const double A = mesh.area(tri);
    ps.bulk += A * stress(model.bulk, tri, gu[tri]).dot(gr[tri]);
    ps.body_dual += A * model.body.dz(model.body.load(mesh, tri, t), uc[tri]) * rc[tri];
  }
  ps.body_rate = body_rate(model.body, mesh, t, uc, side);
  const auto us = u.trace_on_surface_part();
  const auto rs = rate.trace_on_surface_part();
  const auto sedges = mesh.edges_with_label(BoundaryLabel::SurfaceForce);
  for (std::size_t i = 0; i < sedges.size(); ++i)
    ps.surface_dual += mesh.edge_geometry(sedges[i]).length * model.surface.load(mesh, sedges[i], t) * rs[i];
  ps.surface_rate = surface_rate(model.surface, mesh, t, us, side);
  return ps;
}

void evaluate_knot(const EnergyModel& model, KnotState& knot) {
  knot.energy = total_energy(model, knot.t, knot.field);
  knot.power = power_sample(model, knot.t, knot.field, RateSide::Left);
  knot.power_right = power_sample(model, knot.t, knot.field, RateSide::Right);
  knot.has_power = true;
}

namespace {

struct Candidate {
  CrackSet crack;
  BrokenField field;
  double energy = std::numeric_limits<double>::infinity();
  SolveReport solve;
};

Candidate evaluate(const EnergyModel& model, const Mesh& mesh, const CrackSet& crack, double t,
                   const SolveOptions& solve) {
  Candidate c;
  c.crack = crack;
  ElasticSolution s = minimize_elastic(model, DofTopology::build(mesh, crack), t, solve);
  c.energy = s.report.energy + surface_energy(model.toughness, mesh, crack);
  c.field = std::move(s.field);
  c.solve = s.report;
  return c;
}

double tie_tol(double e) { return 1e-9 * (1.0 + std::abs(e)); }

int workers(const EvolutionOptions& o) { return o.threads > 0 ? o.threads : thread_count_from_env(); }

std::vector<EdgeId> candidates_outside(const Mesh& mesh, const CrackSet& base) {
  std::vector<EdgeId> out;
  for (EdgeId e : mesh.crackable_edges())
    if (!base.contains(e)) out.push_back(e);
  return out;
}

// Exact minimum over all supersets of base, with shortlex tie-breaking.
// Sets whose surface cost plus the fully-cracked elastic minimum already
// exceeds the incumbent are skipped: elastic minima decrease as the crack grows.
StepResult exhaustive_search(const EnergyModel& model, const Mesh& mesh, const CrackSet& base, double t,
                             const SearchStrategy& strategy, const EvolutionOptions& options) {
  const std::vector<EdgeId> cand = candidates_outside(mesh, base);
  const std::size_t m = cand.size();
  if (static_cast<int>(m) > strategy.max_edges)
    throw LimitError("brute-force search refused: " + std::to_string(m) + " candidate edges exceed the limit of " +
                     std::to_string(strategy.max_edges) + "; use GREEDY or GREEDY_WITH_PAIRS");
  const int nthreads = workers(options);

  std::vector<double> cost(m);
  for (std::size_t i = 0; i < m; ++i) cost[i] = edge_toughness_cost(model.toughness, mesh, cand[i]);
  const double base_cost = surface_energy(model.toughness, mesh, base);
  double elastic_floor = -std::numeric_limits<double>::infinity();
  if (m > 0) {
    CrackSet full = base;
    for (EdgeId e : cand) full = full.with(e);
    elastic_floor = minimize_elastic(model, DofTopology::build(mesh, full), t, options.solve).report.energy;
  }
  std::vector<double> sorted_cost = cost;
  std::sort(sorted_cost.begin(), sorted_cost.end());

  std::vector<Candidate> kept;  // evaluated sets in shortlex order
  double best = std::numeric_limits<double>::infinity();
  std::size_t evaluated = 0;
  auto prunable = [&](double lower) { return lower > best + 1e-8 * (1.0 + std::abs(best)); };

  std::vector<std::vector<std::size_t>> batch;
  const std::size_t batch_size = static_cast<std::size_t>(std::max(1, nthreads)) * 8;
  auto flush = [&] {
    if (batch.empty()) return;
    std::vector<Candidate> res(batch.size());
    detail::parallel_for(batch.size(), nthreads, [&](std::size_t b) {
      std::vector<EdgeId> edges = base.edges();
      for (std::size_t i : batch[b]) edges.push_back(cand[i]);
      std::sort(edges.begin(), edges.end());
      res[b] = evaluate(model, mesh, CrackSet::unchecked(std::move(edges)), t, options.solve);
    });
    evaluated += res.size();
    for (auto& r : res) {
      best = std::min(best, r.energy);
      kept.push_back(std::move(r));
    }
    batch.clear();
  };

  double smallest_k = 0.0;
  for (std::size_t k = 0; k <= m; ++k) {
    if (k > 0) smallest_k += sorted_cost[k - 1];
    if (k > 0 && prunable(elastic_floor + base_cost + smallest_k)) {
      flush();
      if (prunable(elastic_floor + base_cost + smallest_k)) break;
    }
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    while (true) {
      double c = base_cost;
      for (std::size_t i : idx) c += cost[i];
      if (!(k > 0 && prunable(elastic_floor + c))) {
        batch.push_back(idx);
        if (batch.size() >= batch_size || k == 0) flush();
      }
      // next combination in lexicographic order
      std::size_t pos = k;
      while (pos > 0 && idx[pos - 1] == m - k + pos - 1) --pos;
      if (pos == 0) break;
      ++idx[pos - 1];
      for (std::size_t j = pos; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
    flush();
  }

  const double tol = tie_tol(best);
  for (auto& c : kept) {
    if (c.energy <= best + tol) {
      StepResult r;
      r.crack = std::move(c.crack);
      r.field = std::move(c.field);
      r.energy = c.energy;
      r.solve = c.solve;
      r.certification = Certification::Exact;
      r.evaluated = evaluated;
      return r;
    }
  }
  throw SolverError("exhaustive search evaluated no crack set");
}

StepResult greedy_search(const EnergyModel& model, const Mesh& mesh, const CrackSet& base, double t,
                         const SearchStrategy& strategy, const EvolutionOptions& options) {
  const int nthreads = workers(options);
  Candidate cur = evaluate(model, mesh, base, t, options.solve);
  std::size_t evaluated = 1;
  const bool pairs = strategy.kind == StrategyKind::GreedyWithPairs;

  auto best_of = [&](const std::vector<std::vector<EdgeId>>& moves) {
    std::vector<Candidate> res(moves.size());
    detail::parallel_for(moves.size(), nthreads, [&](std::size_t i) {
      CrackSet s = cur.crack;
      for (EdgeId e : moves[i]) s = s.with(e);
      res[i] = evaluate(model, mesh, s, t, options.solve);
    });
    evaluated += res.size();
    std::size_t arg = res.size();
    for (std::size_t i = 0; i < res.size(); ++i)
      if (arg == res.size() || res[i].energy < res[arg].energy) arg = i;
    return arg == res.size() ? Candidate{} : std::move(res[arg]);
  };

  for (int sweep = 0; sweep < strategy.greedy_sweeps; ++sweep) {
    const std::vector<EdgeId> cand = candidates_outside(mesh, cur.crack);
    if (cand.empty()) break;
    std::vector<std::vector<EdgeId>> singles;
    for (EdgeId e : cand) singles.push_back({e});
    Candidate b = best_of(singles);
    if (b.energy < cur.energy - tie_tol(cur.energy)) {
      cur = std::move(b);
      continue;
    }
    if (!pairs || cand.size() < 2) break;
    std::vector<std::vector<EdgeId>> two;
    for (std::size_t i = 0; i < cand.size(); ++i)
      for (std::size_t j = i + 1; j < cand.size(); ++j) two.push_back({cand[i], cand[j]});
    b = best_of(two);
    if (b.energy < cur.energy - tie_tol(cur.energy)) {
      cur = std::move(b);
      continue;
    }
    break;
  }
  StepResult r;
  r.crack = std::move(cur.crack);
  r.field = std::move(cur.field);
  r.energy = cur.energy;
  r.solve = cur.solve;
  r.certification = strategy.certification();
  r.evaluated = evaluated;
  return r;
}

std::string describe(const CrackSet& c) {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (EdgeId e : c) {
    os << (first ? "" : ",") << e;
    first = false;
  }
  os << '}';
  return os.str();
}

}  // namespace

StepResult incremental_step(const EnergyModel& model, const Mesh& mesh, const CrackSet& prev, double t,
                            const SearchStrategy& strategy, const EvolutionOptions& options) {
  if (strategy.kind == StrategyKind::BruteForce) return exhaustive_search(model, mesh, prev, t, strategy, options);
  return greedy_search(model, mesh, prev, t, strategy, options);
}

MinimalityVerdict check_initial_minimality(const EnergyModel& model, const Mesh& mesh, const CrackSet& crack0,
                                           const BrokenField& u0, const SearchStrategy& strategy,
                                           const EvolutionOptions& options) {
  if (!(u0.topology().crack() == crack0)) throw ValidationError("u0 does not live on the initial crack set");
  MinimalityVerdict v;
  v.level = strategy.certification();
  v.energy = total_energy(model, 0.0, u0).total();
  StepResult best = incremental_step(model, mesh, crack0, 0.0, strategy, options);
  if (best.energy < v.energy - tie_tol(v.energy)) {
    v.passed = false;
    v.witness_crack = best.crack;
    v.witness_field = std::move(best.field);
    v.witness_energy = best.energy;
  }
  return v;
}

EvolutionRecord run_evolution(const EnergyModel& model, const Mesh& mesh, const TimeGrid& grid,
                              const CrackSet& crack0, const SearchStrategy& strategy,
                              const EvolutionOptions& options, const BrokenField* u0) {
  grid.validate();
  model.validate(mesh);
  for (EdgeId e : crack0)
    if (!mesh.is_crackable(e)) throw ValidationError("initial crack edge " + std::to_string(e) + " is not crackable");

  EvolutionRecord rec;
  rec.grid = grid;
  rec.strategy = strategy.kind;
  rec.certification = strategy.certification();
  rec.conforming = model.conforming();
  rec.mesh_hash = mesh.hash();

  KnotState k0;
  k0.t = grid.knots[0];
  k0.crack = crack0;
  if (u0) {
    if (!(u0->topology().crack() == crack0)) throw ValidationError("u0 does not live on the initial crack set");
    k0.field = *u0;
    k0.solve.residual = euler_residual(model, k0.t, k0.field);
  } else {
    ElasticSolution s = minimize_elastic(model, DofTopology::build(mesh, crack0), k0.t, options.solve);
    k0.field = std::move(s.field);
    k0.solve = s.report;
  }
  k0.solve.wall_seconds = 0.0;
  evaluate_knot(model, k0);

  if (options.override_initial_minimality) {
    rec.annotation = "initial minimality not checked (override)";
  } else {
    MinimalityVerdict v;
    try {
      v = check_initial_minimality(model, mesh, crack0, k0.field, strategy, options);
    } catch (const SolverError& e) {
      rec.complete = false;
      rec.failure = std::string("knot 0: ") + e.what();
      rec.knots.push_back(std::move(k0));
      return rec;
    }
    if (!v.passed) {
      std::ostringstream os;
      os.precision(17);
      os << "initial state is not minimal: crack " << describe(*v.witness_crack) << " reaches energy "
         << v.witness_energy << " < " << v.energy;
      throw ValidationError(os.str());
    }
  }
  rec.knots.push_back(std::move(k0));

  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double t = grid.knots[i];
    StepResult step;
    try {
      step = incremental_step(model, mesh, rec.knots.back().crack, t, strategy, options);
    } catch (const SolverError& e) {
      rec.complete = false;
      rec.failure = "knot " + std::to_string(i) + ": " + e.what();
      break;
    }
    KnotState k;
    k.t = t;
    k.crack = std::move(step.crack);
    k.field = std::move(step.field);
    k.solve = step.solve;
    k.solve.wall_seconds = 0.0;
    evaluate_knot(model, k);
    rec.knots.push_back(std::move(k));
  }
  return rec;
}

namespace {

EnvelopeResult envelope(const EvolutionRecord& record, const EnergyModel& model, const Mesh& mesh,
                        const SolveOptions& options, bool left) {
  if (!record.complete) throw ValidationError("envelope requires a complete record");
  EnvelopeResult out;
  out.record = record;
  const std::size_t n = record.knots.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t from;
    if (left) {
      if (i == 0 || record.knots[i].crack == record.knots[i - 1].crack) continue;
      from = i - 1;
    } else {
      if (i + 1 >= n || record.knots[i].crack == record.knots[i + 1].crack) continue;
      from = i + 1;
    }
    KnotState& k = out.record.knots[i];
    k.crack = record.knots[from].crack;
    ElasticSolution s = minimize_elastic(model, DofTopology::build(mesh, k.crack), k.t, options);
    k.field = std::move(s.field);
    k.solve = s.report;
    k.solve.wall_seconds = 0.0;
    evaluate_knot(model, k);
    out.jump_knots.push_back(static_cast<int>(i));
  }
  return out;
}

}  // namespace

EnvelopeResult left_envelope(const EvolutionRecord& record, const EnergyModel& model, const Mesh& mesh,
                             const SolveOptions& options) {
  return envelope(record, model, mesh, options, true);
}

EnvelopeResult right_envelope(const EvolutionRecord& record, const EnergyModel& model, const Mesh& mesh,
                              const SolveOptions& options) {
  return envelope(record, model, mesh, options, false);
}

}  // namespace qsfrac
