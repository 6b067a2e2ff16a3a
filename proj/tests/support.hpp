#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "polyelast/meshgen.hpp"
#include "polyelast/mpsa.hpp"
#include "polyelast/vem.hpp"

namespace testing_support {

using namespace polyelast;

struct NamedMesh {
  std::string name;
  PolyMesh mesh;
};

/// The patch-test mesh set: conforming, twisted, simplicial, honeycomb,
/// hanging-node and thin-layer grids.
inline std::vector<NamedMesh> patch_meshes() {
  return {{"cartesian4", meshgen::cartesian(4, 4)},
          {"twisted8", meshgen::twist(meshgen::cartesian(8, 8))},
          {"triangular6", meshgen::triangular(6, 6)},
          {"hexagonal", meshgen::hexagonal(6, 6)},
          {"two_region3", meshgen::two_region(4, 4, 3, meshgen::RefineMode::both)},
          {"layer10", meshgen::layer(9, 9, 10.0, 1, false)}};
}

struct LinearField {
  Vec2 a;
  Mat2 b;
  Vec2 operator()(const Vec2& x) const { return a + b * x; }
};

inline LinearField random_linear(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  LinearField f;
  f.a = Vec2(u(rng), u(rng));
  f.b << u(rng), u(rng), u(rng), u(rng);
  return f;
}

/// max |u_h - u| / max |u| over nodes (VEM) or cell centroids (MPSA).
inline double vem_patch_error(const PolyMesh& mesh, const MaterialField& mat, const LinearField& g, vem::Variant v) {
  const auto sol = vem::solve(mesh, mat, zero_field(), BoundaryConditions::dirichlet_all(g), {v});
  double err = 0.0, scale = 0.0;
  for (int n = 0; n < mesh.num_nodes(); ++n) {
    err = std::max(err, (sol.displacement(n) - g(mesh.node(n))).cwiseAbs().maxCoeff());
    scale = std::max(scale, g(mesh.node(n)).cwiseAbs().maxCoeff());
  }
  return err / scale;
}

inline double mpsa_patch_error(const PolyMesh& mesh, const MaterialField& mat, const LinearField& g, mpsa::Variant v) {
  mpsa::Options o;
  o.variant = v;
  const auto sol = mpsa::solve(mesh, mat, zero_field(), BoundaryConditions::dirichlet_all(g), o);
  if (!sol.ok()) return 1e300;
  double err = 0.0, scale = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Vec2 x = mesh.cell(c).centroid;
    err = std::max(err, (sol.displacement(c) - g(x)).cwiseAbs().maxCoeff());
    scale = std::max(scale, g(x).cwiseAbs().maxCoeff());
  }
  return err / scale;
}

}  // namespace testing_support
