#include "qsfrac/minimize.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>

#include "qsfrac/error.hpp"

namespace qsfrac {

namespace {

struct Assembly {
  double energy = 0.0;
  Eigen::VectorXd grad;
  std::vector<Eigen::Triplet<double>> hess;
};

// Energy, gradient and (optionally) Hessian over all DOFs. Triangles are
// visited in index order so the reduction is reproducible.
Assembly assemble(const EnergyModel& model, const DofTopology& topo, double t,
                  const std::vector<double>& x, bool with_hessian) {
  const Mesh& mesh = topo.mesh();
  Assembly a;
  a.grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(topo.dof_count()));
  if (with_hessian) a.hess.reserve(mesh.triangle_count() * 9 + 8);
  const BodyPotential& F = model.body;
  for (TriId tri = 0; tri < static_cast<TriId>(mesh.triangle_count()); ++tri) {
    const auto dofs = topo.triangle_dofs(tri);
    const Eigen::Vector3d ul(x[dofs[0]], x[dofs[1]], x[dofs[2]]);
    const auto B = basis_gradients(mesh, tri);
    const double A = mesh.area(tri);
    const Vec2 xi = B * ul;
    const double uc = ul.sum() / 3.0;
    const double f = F.load(mesh, tri, t);
    a.energy += A * (bulk_energy_density(model.bulk, tri, xi) - F.density(f, uc));
    const Eigen::Vector3d g =
        A * (B.transpose() * stress(model.bulk, tri, xi)) - Eigen::Vector3d::Constant(A * F.dz(f, uc) / 3.0);
    for (int i = 0; i < 3; ++i) a.grad[dofs[i]] += g[i];
    if (with_hessian) {
      const Eigen::Matrix3d H = A * (B.transpose() * stress_jacobian(model.bulk, tri, xi) * B) -
                                Eigen::Matrix3d::Constant(A * F.dzz(uc) / 9.0);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a.hess.emplace_back(dofs[i], dofs[j], H(i, j));
    }
  }
  // G is linear, so it never touches the Hessian.
  const auto sedges = mesh.edges_with_label(BoundaryLabel::SurfaceForce);
  for (EdgeId id : sedges) {
    const Edge& e = mesh.edge(id);
    const TriId tri = e.tri[0];
    const int d0 = topo.dof(tri, mesh.local_index(tri, e.v[0]));
    const int d1 = topo.dof(tri, mesh.local_index(tri, e.v[1]));
    const double L = mesh.edge_geometry(id).length;
    const double g = model.surface.load(mesh, id, t);
    a.energy -= L * g * 0.5 * (x[d0] + x[d1]);
    a.grad[d0] -= 0.5 * L * g;
    a.grad[d1] -= 0.5 * L * g;
  }
  return a;
}

double assemble_energy(const EnergyModel& model, const DofTopology& topo, double t,
                       const std::vector<double>& x) {
  const Mesh& mesh = topo.mesh();
  double e = 0.0;
  for (TriId tri = 0; tri < static_cast<TriId>(mesh.triangle_count()); ++tri) {
    const auto dofs = topo.triangle_dofs(tri);
    const Eigen::Vector3d ul(x[dofs[0]], x[dofs[1]], x[dofs[2]]);
    const Vec2 xi = basis_gradients(mesh, tri) * ul;
    const double f = model.body.load(mesh, tri, t);
    e += mesh.area(tri) * (bulk_energy_density(model.bulk, tri, xi) - model.body.density(f, ul.sum() / 3.0));
  }
  for (EdgeId id : mesh.edges_with_label(BoundaryLabel::SurfaceForce)) {
    const Edge& ed = mesh.edge(id);
    const TriId tri = ed.tri[0];
    const int d0 = topo.dof(tri, mesh.local_index(tri, ed.v[0]));
    const int d1 = topo.dof(tri, mesh.local_index(tri, ed.v[1]));
    e -= mesh.edge_geometry(id).length * model.surface.load(mesh, id, t) * 0.5 * (x[d0] + x[d1]);
  }
  return e;
}

double free_norm(const DofTopology& topo, const Eigen::VectorXd& grad) {
  double s = 0.0;
  for (int d : topo.free_dofs()) s += grad[d] * grad[d];
  return std::sqrt(s);
}

bool is_quadratic(const EnergyModel& m) { return m.bulk.p == 2.0 && (m.body.q == 2.0 || m.body.lambda == 0.0); }

// Solves H_ff * dx = rhs for the free block; returns false if every strategy failed.
bool solve_free(const DofTopology& topo, const std::vector<Eigen::Triplet<double>>& hess,
                const Eigen::VectorXd& rhs, const SolveOptions& opt, Eigen::VectorXd& dx) {
  const auto nf = static_cast<Eigen::Index>(topo.free_dofs().size());
  const bool use_dense = opt.solver == LinearSolver::Dense ||
                         (opt.solver == LinearSolver::Auto && nf <= opt.dense_limit);
  auto dense_solve = [&]() {
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(nf, nf);
    for (const auto& tr : hess) {
      const int i = topo.free_index(tr.row()), j = topo.free_index(tr.col());
      if (i >= 0 && j >= 0) H(i, j) += tr.value();
    }
    double shift = 0.0;
    const double scale = std::max(1e-300, H.diagonal().cwiseAbs().maxCoeff());
    for (int attempt = 0; attempt < 8; ++attempt) {
      Eigen::LLT<Eigen::MatrixXd> llt(H + shift * Eigen::MatrixXd::Identity(nf, nf));
      if (llt.info() == Eigen::Success) {
        dx = llt.solve(rhs);
        if (dx.allFinite()) return true;
      }
      shift = shift == 0.0 ? 1e-12 * scale : shift * 100.0;
    }
    return false;
  };
  if (use_dense) return dense_solve();

  std::vector<Eigen::Triplet<double>> ff;
  ff.reserve(hess.size());
  for (const auto& tr : hess) {
    const int i = topo.free_index(tr.row()), j = topo.free_index(tr.col());
    if (i >= 0 && j >= 0) ff.emplace_back(i, j, tr.value());
  }
  Eigen::SparseMatrix<double> H(nf, nf);
  H.setFromTriplets(ff.begin(), ff.end());
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      cg;
  cg.setTolerance(opt.cg_relative_tol);
  cg.setMaxIterations(std::max<Eigen::Index>(10 * nf, 100));
  cg.compute(H);
  dx = cg.solve(rhs);
  if (cg.info() == Eigen::Success && dx.allFinite()) return true;
  if (nf <= opt.dense_limit) return dense_solve();
  return false;
}

}  // namespace

ElasticEnergy elastic_energy(const EnergyModel& model, double t, const BrokenField& u) {
  const Mesh& mesh = u.mesh();
  ElasticEnergy e;
  const auto grads = u.gradient();
  for (TriId tri = 0; tri < static_cast<TriId>(grads.size()); ++tri)
    e.bulk += mesh.area(tri) * bulk_energy_density(model.bulk, tri, grads[tri]);
  e.body = body_value_and_gradient(model.body, mesh, t, u.centroid_values()).value;
  e.surface_force = surface_value_and_gradient(model.surface, mesh, t, u.trace_on_surface_part()).value;
  return e;
}

void check_pinned(const EnergyModel& model, const DofTopology& topo) {
  if (model.body.lambda > 0.0) return;
  const Mesh& mesh = topo.mesh();
  const std::size_t nd = topo.dof_count();
  std::vector<int> parent(nd);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (TriId t = 0; t < static_cast<TriId>(mesh.triangle_count()); ++t) {
    auto d = topo.triangle_dofs(t);
    for (int k = 1; k < 3; ++k) {
      int a = find(d[0]), b = find(d[k]);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  std::vector<char> pinned(nd, 0);
  for (int d : topo.constrained_dofs()) pinned[find(d)] = 1;
  for (TriId t = 0; t < static_cast<TriId>(mesh.triangle_count()); ++t) {
    const int r = find(topo.dof(t, 0));
    if (!pinned[r]) {
      std::string tris;
      for (TriId s = 0; s < static_cast<TriId>(mesh.triangle_count()); ++s)
        if (find(topo.dof(s, 0)) == r) tris += (tris.empty() ? "" : ",") + std::to_string(s);
      throw SolverError("singular system: floating component of triangles {" + tris +
                        "} has no Dirichlet constraint and lambda_F = 0");
    }
  }
}

Eigen::VectorXd energy_gradient(const EnergyModel& model, double t, const BrokenField& u) {
  return assemble(model, u.topology(), t, u.values(), false).grad;
}

double euler_residual(const EnergyModel& model, double t, const BrokenField& u) {
  return free_norm(u.topology(), energy_gradient(model, t, u));
}

ElasticSolution minimize_elastic(const EnergyModel& model, const Mesh& mesh, const CrackSet& crack,
                                 double t, const SolveOptions& options, const BrokenField* start) {
  return minimize_elastic(model, DofTopology::build(mesh, crack), t, options, start);
}

ElasticSolution minimize_elastic(const EnergyModel& model, TopologyPtr topo, double t,
                                 const SolveOptions& opt, const BrokenField* start) {
  const auto t0 = std::chrono::steady_clock::now();
  check_pinned(model, *topo);
  const Mesh& mesh = topo->mesh();
  const auto psi = model.boundary.nodal(mesh, t);

  std::vector<double> x(topo->dof_count(), 0.0);
  if (start) {
    if (start->topology().crack() != topo->crack() || start->values().size() != x.size())
      throw ValidationError("start field lives on a different crack set");
    x = start->values();
  } else if (!is_quadratic(model)) {
    EnergyModel surrogate = model;
    surrogate.bulk.p = 2.0;
    surrogate.bulk.epsilon = 0.0;
    surrogate.body.q = 2.0;
    surrogate.surface.r = 2.0;
    SolveOptions so = opt;
    so.tol = std::max(opt.tol, 1e-8);
    x = minimize_elastic(surrogate, topo, t, so).field.values();
  }
  for (int d : topo->constrained_dofs()) x[d] = psi[topo->vertex_of_dof(d)];

  ElasticSolution out;
  const auto& free = topo->free_dofs();
  int it = 0;
  Assembly a = assemble(model, *topo, t, x, true);
  double res = free_norm(*topo, a.grad);
  while (res > opt.tol && !free.empty()) {
    if (it >= opt.max_iterations)
      throw SolverError("elastic minimization did not converge within " + std::to_string(opt.max_iterations) +
                        " iterations (residual " + std::to_string(res) + ")");
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(free.size()));
    for (std::size_t i = 0; i < free.size(); ++i) rhs[static_cast<Eigen::Index>(i)] = -a.grad[free[i]];
    Eigen::VectorXd dx;
    if (!solve_free(*topo, a.hess, rhs, opt, dx)) throw SolverError("linear solve failed in elastic minimization");
    ++it;

    const double slope = -rhs.dot(dx);
    double step = 1.0;
    std::vector<double> trial = x;
    bool accepted = false;
    // Below this predicted decrease energy comparisons are roundoff and the residual decides.
    const bool at_roundoff = std::abs(slope) <= 1e-13 * (1.0 + std::abs(a.energy));
    if (is_quadratic(model)) {
      for (std::size_t i = 0; i < free.size(); ++i) trial[free[i]] = x[free[i]] + dx[static_cast<Eigen::Index>(i)];
      accepted = true;
    } else if (!at_roundoff) {
      for (int ls = 0; ls < 60; ++ls) {
        for (std::size_t i = 0; i < free.size(); ++i)
          trial[free[i]] = x[free[i]] + step * dx[static_cast<Eigen::Index>(i)];
        const double et = assemble_energy(model, *topo, t, trial);
        if (et <= a.energy + opt.armijo * step * slope) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
    }
    if (!accepted) {
      // Energy differences are at roundoff; accept the full step only if it lowers the residual.
      for (std::size_t i = 0; i < free.size(); ++i) trial[free[i]] = x[free[i]] + dx[static_cast<Eigen::Index>(i)];
      Assembly b = assemble(model, *topo, t, trial, true);
      const double rb = free_norm(*topo, b.grad);
      if (!(rb < res)) throw SolverError("line search stalled at residual " + std::to_string(res));
      x = std::move(trial);
      a = std::move(b);
      res = rb;
      continue;
    }
    x = std::move(trial);
    a = assemble(model, *topo, t, x, true);
    res = free_norm(*topo, a.grad);
  }

  out.field = BrokenField(topo, std::move(x));
  out.report.iterations = it;
  out.report.residual = res;
  out.report.energy = elastic_energy(model, t, out.field).total();
  out.report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace qsfrac
