#pragma once

#include <vector>

#include <Eigen/Core>

#include "qsfrac/broken_space.hpp"
#include "qsfrac/energy.hpp"

namespace qsfrac {

enum class LinearSolver {
  Auto,               // dense Cholesky up to dense_limit free DOFs, CG beyond
  Dense,
  ConjugateGradient,  // diagonal preconditioner; dense fallback when it stalls
};

struct SolveOptions {
  double tol = 1e-10;  // l2 norm of the free-DOF energy gradient
  int max_iterations = 200;
  LinearSolver solver = LinearSolver::Auto;
  double cg_relative_tol = 1e-10;
  int dense_limit = 200;
  double armijo = 1e-4;
};

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;
  double energy = 0.0;
  double wall_seconds = 0.0;
};

struct ElasticEnergy {
  double bulk = 0.0;           // W(grad u)
  double body = 0.0;           // F(t)(u)
  double surface_force = 0.0;  // G(t)(u)
  double total() const { return bulk - body - surface_force; }
};

ElasticEnergy elastic_energy(const EnergyModel& model, double t, const BrokenField& u);

struct ElasticSolution {
  BrokenField field;
  SolveReport report;
};

/// Minimizes W - F(t) - G(t) over fields on the topology of `crack` with the
/// Dirichlet values psi(t). Quadratic models (p = q = 2) take one exact SPD
/// solve; others use damped Newton with Armijo backtracking. `start`, when
/// given, must live on the same crack set.
ElasticSolution minimize_elastic(const EnergyModel& model, const Mesh& mesh, const CrackSet& crack,
                                 double t, const SolveOptions& options = {},
                                 const BrokenField* start = nullptr);
ElasticSolution minimize_elastic(const EnergyModel& model, TopologyPtr topology, double t,
                                 const SolveOptions& options = {}, const BrokenField* start = nullptr);

/// Assembled energy gradient over all DOFs (the Euler functional applied to
/// nodal basis functions).
Eigen::VectorXd energy_gradient(const EnergyModel& model, double t, const BrokenField& u);

/// l2 norm of the energy gradient restricted to free DOFs, i.e. the dual norm
/// of v -> <dW(grad u), grad v> - <dF(t)(u), v> - <dG(t)(u), v> over the
/// discrete variation space with the coefficient norm.
double euler_residual(const EnergyModel& model, double t, const BrokenField& u);

/// Throws SolverError when lambda_F = 0 and a connected group of triangles has
/// no constrained DOF.
void check_pinned(const EnergyModel& model, const DofTopology& topology);

}  // namespace qsfrac
