#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "qsfrac/evolution.hpp"

namespace qsfrac {

enum class Verdict { Pass, Fail, Inconclusive };
const char* to_string(Verdict v);

struct AuditTolerances {
  double energy = 1e-9;     // relative, scaled by 1 + |E|
  double residual = 1e-8;   // absolute Euler residual
  double jump = -1.0;       // negative: default jump tolerance per knot
  double balance = 5e-3;    // trapezoid gap, relative to 1 + |E(T)|
  double fenchel = 1e-8;    // relative Fenchel-Young gap
  int max_oracle_edges = 20;
};

struct CheckResult {
  std::string name;
  Verdict verdict = Verdict::Pass;
  // Necessary conditions of a level passed (also true on PASS).
  bool conditions_passed = true;
  double margin = 0.0;
  double tolerance = 0.0;
  std::string detail;
  std::vector<int> knots;                             // offending knots
  std::vector<std::pair<int, EdgeId>> edges;          // offending (knot, edge)
  std::vector<std::pair<std::string, double>> metrics;
};

struct AuditReport {
  std::vector<CheckResult> checks;
  /// True when nothing failed; INCONCLUSIVE counts as failure when strict.
  bool passed(bool strict = false) const;
  const CheckResult* find(const std::string& name) const;
  std::string to_text() const;
  std::string to_json() const;
};

CheckResult check_irreversibility(const EvolutionRecord& record);

struct BalanceReport {
  CheckResult result;
  double gap = 0.0;              // max_j |E_j - E_0 - trapezoid sum up to j|
  double gap_excluded = 0.0;     // same with the excluded intervals dropped
  std::vector<double> profile;   // signed cumulative discrepancy per knot
  std::vector<double> interval;  // E_i - E_{i-1} - trapezoid_i per interval i
  // Sum over intervals of |dt_i P_i - (E_i - E_{i-1})|, right-endpoint power.
  double riemann_defect = 0.0;
  double riemann_defect_excluded = 0.0;
  std::vector<int> excluded;     // intervals i (ending at knot i) where the crack changed
};

/// Compares E against the integrated five-term power. Intervals ending at a
/// crack jump are listed as excluded; the verdict uses the full gap.
BalanceReport check_energy_balance(const EvolutionRecord& record, const EnergyModel& model,
                                   const AuditTolerances& tol = {});

enum class StabilityLevel { Euler, OneEdge, Oracle };
const char* to_string(StabilityLevel level);
StabilityLevel stability_level_from_string(const std::string& name);

/// EULER and ONE_EDGE give INCONCLUSIVE when their conditions hold, ORACLE an
/// exact verdict over every superset of each recorded crack. ORACLE solves
/// with conjugate gradients so it does not share the evolution's dense path.
CheckResult check_global_stability(const EvolutionRecord& record, const EnergyModel& model, const Mesh& mesh,
                                   StabilityLevel level, const AuditTolerances& tol = {}, int threads = 0);

/// Checks crack(i) == crack(0) united with the jump supports of knots 0..i.
CheckResult check_structure(const EvolutionRecord& record, const EnergyModel& model,
                            const AuditTolerances& tol = {});

struct DualField {
  std::vector<Vec2> stress;     // dW(grad u) per triangle
  std::vector<double> body;     // -dF(t)(u) per triangle
  std::vector<double> surface;  // -dG(t)(u) per surface-force edge
};

DualField dual_field(const EnergyModel& model, double t, const BrokenField& u);

struct FenchelTerms {
  double primal = 0.0;     // Psi(grad u, u, u)
  double conjugate = 0.0;  // Psi*(sigma)
  double pairing = 0.0;    // <sigma, (grad u, u, u)>
  double gap() const;
  double relative_gap() const;
};

/// Fenchel-Young terms for an arbitrary admissible u against a fixed sigma.
FenchelTerms fenchel_young(const EnergyModel& model, double t, const BrokenField& u, const DualField& sigma);

struct DualCertificate {
  double annihilation = 0.0;  // free-DOF l2 norm of v -> <sigma, (grad v, v, v)>
  FenchelTerms fenchel;
};

DualCertificate dual_certificate(const EnergyModel& model, double t, const BrokenField& u);

struct ProbeRow {
  int knot = 0;
  double s = 0.0;
  double distance = 0.0;  // |t - s|
  double stress = 0.0;    // ||dW(grad u(s)) - dW(grad u(t))||_{p'}
  double gradient = 0.0;  // ||grad u(s) - grad u(t)||_p
  double body = 0.0;      // ||u(s) - u(t)||_q
  double trace = 0.0;     // ||u(s) - u(t)||_{r, surface-force part}
};

struct ProbeReport {
  Verdict verdict = Verdict::Pass;
  std::string detail;
  std::vector<ProbeRow> rows;
  std::array<double, 4> lipschitz{};      // fitted constants per column
  std::array<double, 4> linearity{};      // max deviation from C |t - s|, relative
  double collinearity = 0.0;              // three-point residual of the DOF vectors
};

/// Probes the knots window [t_index - window, t_index - 1] against t_index.
ProbeReport stress_continuity_probe(const EvolutionRecord& record, const EnergyModel& model, int t_index,
                                    int window = 3);

struct AuditSelection {
  bool irreversibility = true;
  bool balance = true;
  bool stability = true;
  StabilityLevel level = StabilityLevel::Oracle;
  bool structure = true;
  bool duality = false;
};

AuditReport run_audit(const EvolutionRecord& record, const EnergyModel& model, const Mesh& mesh,
                      const AuditSelection& selection, const AuditTolerances& tol = {}, int threads = 0);

}  // namespace qsfrac
