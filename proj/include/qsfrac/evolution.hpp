#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qsfrac/broken_space.hpp"
#include "qsfrac/crack_set.hpp"
#include "qsfrac/energy.hpp"
#include "qsfrac/mesh.hpp"
#include "qsfrac/minimize.hpp"

namespace qsfrac {

enum class StrategyKind { BruteForce, Greedy, GreedyWithPairs };
const char* to_string(StrategyKind kind);
StrategyKind strategy_from_string(const std::string& name);

/// How strong the stability guarantee of a strategy is.
enum class Certification { Exact, SingleEdge, EdgePairs };
const char* to_string(Certification level);
Certification certification_from_string(const std::string& name);

struct SearchStrategy {
  StrategyKind kind = StrategyKind::BruteForce;
  int max_edges = 20;       // brute force refuses more candidate edges
  int greedy_sweeps = 1000;  // cap on accepted greedy moves per step
  Certification certification() const;
};

struct TimeGrid {
  std::vector<double> knots;

  /// n uniform subintervals of [0, T], i.e. n + 1 knots.
  static TimeGrid uniform(double T, int n);
  static TimeGrid from_knots(std::vector<double> knots);
  void validate() const;
  std::size_t size() const { return knots.size(); }
  double end() const { return knots.back(); }
};

struct EnergyBreakdown {
  double bulk = 0.0;           // W(grad u)
  double surface = 0.0;        // crack energy of Gamma
  double body = 0.0;           // F(t)(u)
  double surface_force = 0.0;  // G(t)(u)
  double total() const { return bulk + surface - body - surface_force; }
};

/// The five power terms; the balance integrand is
/// bulk - body_dual - body_rate - surface_dual - surface_rate.
struct PowerSample {
  double bulk = 0.0;          // <dW(grad u), grad psi_dot>
  double body_dual = 0.0;     // <dF(t)(u), psi_dot>
  double body_rate = 0.0;     // F_dot(t)(u)
  double surface_dual = 0.0;  // <dG(t)(u), psi_dot>
  double surface_rate = 0.0;  // G_dot(t)(u)
  double total() const { return bulk - body_dual - body_rate - surface_dual - surface_rate; }
};

EnergyBreakdown total_energy(const EnergyModel& model, double t, const BrokenField& u);
/// Left: rates of the interval ending at t (right slope at t = 0). Right:
/// rates of the interval starting at t.
PowerSample power_sample(const EnergyModel& model, double t, const BrokenField& u,
                         RateSide side = RateSide::Left);

struct KnotState {
  double t = 0.0;
  CrackSet crack;
  BrokenField field;
  EnergyBreakdown energy;
  PowerSample power;        // left-interval rates
  PowerSample power_right;  // rates of the interval after the knot
  bool has_power = true;
  SolveReport solve;
};

struct EvolutionRecord {
  TimeGrid grid;
  std::vector<KnotState> knots;
  StrategyKind strategy = StrategyKind::BruteForce;
  Certification certification = Certification::Exact;
  bool complete = true;
  bool conforming = true;
  std::string annotation;  // e.g. an initial-minimality override
  std::string failure;     // reason a partial record stopped
  std::uint64_t config_hash = 0;
  std::uint64_t mesh_hash = 0;
  std::string config_text;  // effective configuration, embedded verbatim

  /// Knots i >= 1 with crack(i) != crack(i - 1).
  std::vector<int> jump_knots() const;
};

struct EvolutionOptions {
  SolveOptions solve{};
  int threads = 0;  // 0: QSFRAC_THREADS or 1
  bool override_initial_minimality = false;
};

/// Worker count from QSFRAC_THREADS (defaults to 1).
int thread_count_from_env();

struct MinimalityVerdict {
  bool passed = true;
  double energy = 0.0;
  std::optional<CrackSet> witness_crack;
  BrokenField witness_field;
  double witness_energy = 0.0;
  Certification level = Certification::Exact;
};

MinimalityVerdict check_initial_minimality(const EnergyModel& model, const Mesh& mesh, const CrackSet& crack0,
                                           const BrokenField& u0, const SearchStrategy& strategy,
                                           const EvolutionOptions& options = {});

struct StepResult {
  CrackSet crack;
  BrokenField field;
  double energy = 0.0;
  SolveReport solve;
  Certification certification = Certification::Exact;
  std::size_t evaluated = 0;  // crack sets whose elastic problem was solved
};

/// Minimizes the total energy at time t over crack sets containing prev.
/// Brute force ties (within 1e-9 (1 + |E|)) go to the shortlex-smallest set.
StepResult incremental_step(const EnergyModel& model, const Mesh& mesh, const CrackSet& prev, double t,
                            const SearchStrategy& strategy, const EvolutionOptions& options = {});

/// The knot 0 state is (u0, crack0); u0 defaults to the elastic minimizer on
/// crack0. A failed step stops the run and returns a record flagged incomplete.
EvolutionRecord run_evolution(const EnergyModel& model, const Mesh& mesh, const TimeGrid& grid,
                              const CrackSet& crack0, const SearchStrategy& strategy,
                              const EvolutionOptions& options = {}, const BrokenField* u0 = nullptr);

/// Fills energy and power of a knot from its field.
void evaluate_knot(const EnergyModel& model, KnotState& knot);

struct EnvelopeResult {
  EvolutionRecord record;
  std::vector<int> jump_knots;  // knots that were replaced
};

/// Left envelope: every knot whose crack jumped takes the previous knot's crack
/// with the elastic minimizer on it. Right envelope: every knot before a jump
/// takes the next knot's crack.
EnvelopeResult left_envelope(const EvolutionRecord& record, const EnergyModel& model, const Mesh& mesh,
                             const SolveOptions& options = {});
EnvelopeResult right_envelope(const EvolutionRecord& record, const EnergyModel& model, const Mesh& mesh,
                              const SolveOptions& options = {});

}  // namespace qsfrac
