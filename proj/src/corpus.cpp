#include "qsfrac/corpus.hpp"

#include "qsfrac/error.hpp"

namespace qsfrac {

namespace {

// Shared header: a 2 x 1 strip clamped left, free top and bottom, 64 knots on [0, 4].
const char* const kStripBase = R"(version = 1
mesh.width = 2
mesh.height = 1
mesh.left = dirichlet
mesh.bottom = neumann
mesh.top = neumann
energy.lambda_f = 1
time.T = 4
time.knots = 64
)";

std::vector<CorpusInstance> build() {
  const std::string base = kStripBase;
  const std::string ramp = "mesh.right = dirichlet\nload.psi.profile = 0 0.5 0\n";
  return {
      {"strip", "two triangles per cell, one brittle interface, boundary ramp psi = t x / width",
       base + ramp + "mesh.nx = 2\nmesh.ny = 1\nmesh.brittle = 1 0 1 1\nload.psi.table = 0:0, 4:4\n"},
      {"strip_tough", "the strip with toughness 1e6 so no crack ever forms",
       base + ramp +
           "mesh.nx = 2\nmesh.ny = 1\nmesh.brittle = 1 0 1 1\nload.psi.table = 0:0, 4:4\n"
           "energy.kappa.weights = 1e6 1e6\n"},
      {"cooperative_pair", "two stacked interface edges that only release energy together",
       base + ramp + "mesh.nx = 2\nmesh.ny = 2\nmesh.brittle = 1 0 1 1\nload.psi.table = 0:0, 4:4\n"},
      {"anisotropic", "weighted l1 toughness on a twelve-edge brittle block",
       base + ramp +
           "mesh.nx = 4\nmesh.ny = 2\nmesh.brittle = 0.5 0 1.5 1\nload.psi.table = 0:0, 4:4\n"
           "energy.kappa.kind = weighted_l1\nenergy.kappa.weights = 2 1\n"},
      {"surface_force", "right side loaded by a traction ramp, interface in the middle",
       base + "mesh.right = surface_force\nmesh.nx = 2\nmesh.ny = 1\nmesh.brittle = 1 0 1 1\n"
              "load.g.table = 0:0, 4:4\n"},
      {"body_force", "body force growing in x, free right side",
       base + "mesh.right = neumann\nmesh.nx = 4\nmesh.ny = 1\nmesh.brittle = 0.5 0 1.5 1\n"
              "load.f.profile = 0 1 0\nload.f.table = 0:0, 4:4\n"},
      {"crossed_elliptic", "crossed diagonals, elliptic toughness increasing in x",
       base + ramp +
           "mesh.nx = 2\nmesh.ny = 1\nmesh.diagonal = crossed\nmesh.brittle = 0.5 0 1.5 1\n"
           "load.psi.table = 0:0, 4:4\nenergy.kappa.kind = elliptic\nenergy.kappa.weights = 1 2\n"
           "energy.kappa.gradient = 1 0.25 0\n"},
      {"zero_load", "the strip with every load identically zero",
       base + "mesh.right = dirichlet\nmesh.nx = 2\nmesh.ny = 1\nmesh.brittle = 1 0 1 1\n"},
      {"p_four", "quartic bulk and surface growth on the strip",
       base + ramp +
           "mesh.nx = 2\nmesh.ny = 1\nmesh.brittle = 1 0 1 1\nload.psi.table = 0:0, 4:8\n"
           "energy.p = 4\nenergy.r = 4\n"},
      {"p_three_halves", "subquadratic regularized bulk energy on the strip",
       base + ramp +
           "mesh.nx = 2\nmesh.ny = 1\nmesh.brittle = 1 0 1 1\nload.psi.table = 0:0, 4:12\n"
           "energy.p = 1.5\nenergy.epsilon = 0.1\n"},
  };
}

}  // namespace

const std::vector<CorpusInstance>& corpus() {
  static const std::vector<CorpusInstance> instances = build();
  return instances;
}

const CorpusInstance& corpus_instance(const std::string& name) {
  for (const auto& c : corpus())
    if (c.name == name) return c;
  throw ConfigError("", "unknown corpus instance '" + name + "'");
}

}  // namespace qsfrac
