#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "polyelast/verify.hpp"
#include "support.hpp"

using namespace polyelast;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using testing_support::LinearField;

namespace {

VectorXd interpolate(const PolyMesh& mesh, int cell, const LinearField& g) {
  const Cell& c = mesh.cell(cell);
  VectorXd v(2 * c.size());
  for (int i = 0; i < c.size(); ++i) v.segment<2>(2 * i) = g(mesh.node(c.nodes[i]));
  return v;
}

LinearField sample_field() {
  LinearField g;
  g.a = Vec2(0.3, -0.7);
  g.b << 0.4, -1.1, 0.25, 0.9;
  return g;
}

const vem::Variant all_variants[] = {vem::Variant::standard, vem::Variant::relax, vem::Variant::relax_extra};

}  // namespace

TEST(VemElement, ProjectorReproducesLinears) {
  const PolyMesh mesh = meshgen::mixed_demo();
  const LinearField g = sample_field();
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const vem::Element e = vem::element_projections(mesh, c);
    const VectorXd v = interpolate(mesh, c, g);
    EXPECT_LT((e.P * v - v).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LT((e.P * e.P - e.P).cwiseAbs().maxCoeff(), 1e-12);
    const Vec3 eps = e.WC * v;
    EXPECT_NEAR(eps[0], g.b(0, 0), 1e-13);
    EXPECT_NEAR(eps[1], g.b(1, 1), 1e-13);
    EXPECT_NEAR(eps[2], g.b(0, 1) + g.b(1, 0), 1e-13);
  }
}

// Kernel = rigid motions, energy of a linear field = |K| eps' D eps.
TEST(VemElement, MatrixIsConsistentAndStable) {
  const PolyMesh mesh = meshgen::twist(meshgen::hexagonal(4, 4));
  const auto mat = MaterialField::from_poisson(mesh.num_cells(), 1.3, 0.3);
  const LinearField g = sample_field();
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const MatrixXd a = vem::element_matrix(mesh, mat, c);
    EXPECT_EQ((a - a.transpose()).cwiseAbs().maxCoeff(), 0.0);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(a);
    const auto& ev = es.eigenvalues();
    const double top = ev[ev.size() - 1];
    int zeros = 0;
    for (int k = 0; k < ev.size(); ++k) {
      EXPECT_GT(ev[k], -1e-12 * top);
      zeros += ev[k] < 1e-10 * top;
    }
    EXPECT_EQ(zeros, 3);
    const VectorXd v = interpolate(mesh, c, g);
    const Vec3 eps(g.b(0, 0), g.b(1, 1), g.b(0, 1) + g.b(1, 0));
    EXPECT_NEAR(v.dot(a * v), mesh.cell(c).volume * eps.dot(mat.voigt(c) * eps), 1e-12);
  }
}

TEST(VemElement, RelaxedMatricesShareTheKernel) {
  const PolyMesh mesh = meshgen::triangular(3, 3);
  const auto mat = MaterialField::from_poisson(mesh.num_cells(), 1.0, 0.45);
  for (auto v : {vem::Variant::relax, vem::Variant::relax_extra}) {
    const MatrixXd a = vem::relaxed_element_matrix(mesh, mat, 4, v);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(a);
    int zeros = 0;
    for (int k = 0; k < a.rows(); ++k) zeros += es.eigenvalues()[k] < 1e-10 * es.eigenvalues().maxCoeff();
    EXPECT_EQ(zeros, 3) << vem::to_string(v);
  }
}

TEST(VemGlobal, MatrixIsExactlySymmetric) {
  const PolyMesh mesh = meshgen::perturb(meshgen::twist(meshgen::cartesian(6, 6)), 0.2, 1);
  const auto mat = MaterialField::from_poisson(mesh.num_cells(), 1.0, 0.3);
  verify::Manufactured exact(1.0, mat.lambda(0));
  for (auto v : all_variants) {
    const auto sys = vem::assemble(mesh, mat, exact.force_field(), BoundaryConditions::clamped_sides(), {v});
    EXPECT_EQ(linalg::asymmetry(sys.matrix), 0.0) << vem::to_string(v);
  }
}

TEST(VemPatch, AllVariantsAllMeshes) {
  std::mt19937_64 rng(11);
  for (const auto& [name, mesh] : testing_support::patch_meshes()) {
    const auto mat = MaterialField::from_poisson(mesh.num_cells(), 1.0, 0.3);
    const LinearField g = testing_support::random_linear(rng);
    for (auto v : all_variants)
      EXPECT_LT(testing_support::vem_patch_error(mesh, mat, g, v), 1e-9) << name << ' ' << vem::to_string(v);
  }
}

TEST(VemDivergence, ExactOnLinearFields) {
  const PolyMesh mesh = meshgen::mixed_demo();
  const LinearField g = sample_field();
  VectorXd nodal(2 * mesh.num_nodes());
  for (int n = 0; n < mesh.num_nodes(); ++n) nodal.segment<2>(2 * n) = g(mesh.node(n));
  for (double d : vem::discrete_divergence(mesh, nodal)) EXPECT_NEAR(d, g.b.trace(), 1e-12);
}

TEST(VemSaddle, MatchesEliminatedForm) {
  const PolyMesh mesh = meshgen::twist(meshgen::cartesian(6, 6));
  const auto mat = MaterialField::from_poisson(mesh.num_cells(), 1.0, 0.49);
  const auto prob = verify::manufactured_problem(1.0, mat.lambda(0));
  for (auto v : {vem::Variant::relax, vem::Variant::relax_extra}) {
    const auto a = vem::solve(mesh, mat, prob.body_force, prob.bc, {v, false});
    const auto b = vem::solve(mesh, mat, prob.body_force, prob.bc, {v, true});
    EXPECT_LT((a.nodal - b.nodal).cwiseAbs().maxCoeff(), 1e-10);
    ASSERT_EQ(b.pressure.size(), mesh.num_cells());
    for (int c = 0; c < mesh.num_cells(); ++c) EXPECT_NEAR(b.pressure[c], mat.lambda(c) * b.divergence[c], 1e-8);
  }
}

TEST(VemSaddle, RejectsZeroLambda) {
  const PolyMesh mesh = meshgen::cartesian(2, 2);
  const auto mat = MaterialField::uniform(mesh.num_cells(), 1.0, 0.0);
  EXPECT_THROW(vem::assemble(mesh, mat, zero_field(), BoundaryConditions::clamped_sides(), {vem::Variant::relax, true}),
               ParameterError);
}

// Uniform traction on the right side of a Cartesian bar: linear solution, so
// every variant is exact.
TEST(VemNeumann, UniaxialTension) {
  const PolyMesh mesh = meshgen::cartesian(4, 3);
  const double mu = 1.0, lam = 1.5, t = 0.2;
  const auto mat = MaterialField::uniform(mesh.num_cells(), mu, lam);
  // sigma = diag(t, 0): eps11 = t (lam + 2mu) / (4 mu (lam + mu)), eps22 = -t lam / (4 mu (lam + mu))
  const double e11 = t * (lam + 2 * mu) / (4 * mu * (lam + mu)), e22 = -t * lam / (4 * mu * (lam + mu));
  BoundaryConditions bc;
  bc.set(BoundaryTag::left, {{BcKind::dirichlet, BcKind::neumann}, zero_field()});
  bc.set(BoundaryTag::right, {{BcKind::neumann, BcKind::neumann}, [t](const Vec2&) { return Vec2(t, 0.0); }});
  bc.set(BoundaryTag::top, {{BcKind::neumann, BcKind::neumann}, zero_field()});
  bc.set(BoundaryTag::bottom, {{BcKind::neumann, BcKind::dirichlet}, zero_field()});
  for (auto v : all_variants) {
    const auto sol = vem::solve(mesh, mat, zero_field(), bc, {v});
    for (int n = 0; n < mesh.num_nodes(); ++n) {
      const Vec2& x = mesh.node(n);
      EXPECT_NEAR(sol.displacement(n).x(), e11 * x.x(), 1e-12) << vem::to_string(v);
      EXPECT_NEAR(sol.displacement(n).y(), e22 * x.y(), 1e-12) << vem::to_string(v);
    }
  }
}

TEST(VemConvergence, ManufacturedErrorDrops) {
  const auto mat8 = MaterialField::from_poisson(64, 1.0, 0.3);
  const auto prob = verify::manufactured_problem(1.0, mat8.lambda(0));
  double prev = 0.0;
  for (int n : {8, 16}) {
    const PolyMesh mesh = meshgen::cartesian(n, n);
    const auto mat = MaterialField::from_poisson(mesh.num_cells(), 1.0, 0.3);
    const auto sol = vem::solve(mesh, mat, prob.body_force, prob.bc);
    const double err = verify::error_norms(mesh, *prob.exact, sol).l2_u;
    if (prev > 0) {
      EXPECT_GT(prev / err, 3.0);
    }
    prev = err;
  }
}
