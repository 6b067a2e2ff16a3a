#include <gtest/gtest.h>

#include <sstream>

#include "polyelast/output.hpp"
#include "polyelast/verify.hpp"

using namespace polyelast;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using verify::Method;

namespace {

// Central differences of the displacement give the gradient; differences of
// the tensor law applied to that gradient give the body force.
Mat2 fd_gradient(const verify::ExactSolution& e, const Vec2& x, double h) {
  Mat2 g;
  for (int j = 0; j < 2; ++j) {
    const Vec2 d = h * Vec2::Unit(j);
    g.col(j) = (e.displacement(x + d) - e.displacement(x - d)) / (2 * h);
  }
  return g;
}

Mat2 law(double mu, double lam, const Mat2& g) {
  const Mat2 eps = 0.5 * (g + g.transpose());
  return 2 * mu * eps + lam * eps.trace() * Mat2::Identity();
}

Vec2 fd_force(const verify::ExactSolution& e, const Vec2& x, double h) {
  Vec2 div = Vec2::Zero();
  for (int j = 0; j < 2; ++j) {
    const Vec2 d = h * Vec2::Unit(j);
    const Mat2 sp = law(e.mu(), e.lambda(), e.gradient(x + d));
    const Mat2 sm = law(e.mu(), e.lambda(), e.gradient(x - d));
    div += (sp.col(j) - sm.col(j)) / (2 * h);
  }
  return -div;
}

}  // namespace

TEST(Manufactured, GradientAndForceAgainstFiniteDifferences) {
  const verify::Manufactured e(1.3, 2.2);
  for (double x : {0.13, 0.5, 0.77})
    for (double y : {0.05, 0.41, 0.92}) {
      const Vec2 p(x, y);
      EXPECT_LT((e.gradient(p) - fd_gradient(e, p, 1e-5)).cwiseAbs().maxCoeff(), 1e-6);
      EXPECT_LT((e.body_force(p) - fd_force(e, p, 1e-5)).cwiseAbs().maxCoeff(), 1e-6);
    }
}

TEST(Manufactured, VanishesOnTheBoundary) {
  const verify::Manufactured e(1.0, 1.0);
  for (double t : {0.0, 0.3, 0.8, 1.0}) {
    EXPECT_LT(e.displacement({0.0, t}).norm(), 1e-15);
    EXPECT_LT(e.displacement({1.0, t}).norm(), 1e-15);
    EXPECT_LT(e.displacement({t, 0.0}).norm(), 1e-15);
    EXPECT_LT(e.displacement({t, 1.0}).norm(), 1e-14);
  }
}

TEST(TriangularInterpolant, ReproducesLinearNodalData) {
  const int n = 5;
  const PolyMesh mesh = meshgen::triangular(n, n);
  Mat2 b;
  b << 0.3, -0.6, 1.1, 0.2;
  VectorXd nodal(2 * mesh.num_nodes());
  for (int k = 0; k < mesh.num_nodes(); ++k) nodal.segment<2>(2 * k) = b * mesh.node(k);
  const verify::TriangularInterpolant ip(1.0, 1.0, n, nodal);
  for (double x : {0.0, 0.11, 0.5, 0.93, 1.0})
    for (double y : {0.0, 0.37, 0.66, 1.0}) {
      EXPECT_LT((ip.displacement({x, y}) - b * Vec2(x, y)).norm(), 1e-14);
      EXPECT_LT((ip.gradient({x, y}) - b).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Norms, TributaryWeightsSumToArea) {
  const PolyMesh mesh = meshgen::mixed_demo();
  double s = 0.0;
  for (double w : verify::tributary_weights(mesh)) s += w;
  EXPECT_NEAR(s, mesh.total_volume(), 1e-14);
  EXPECT_NEAR(verify::tensor_norm(Vec3(1, 2, 3)), std::sqrt(1 + 4 + 18.0), 1e-15);
}

TEST(Norms, ExactLinearSolutionHasZeroErrors) {
  const PolyMesh mesh = meshgen::twist(meshgen::cartesian(4, 4));
  const auto mat = MaterialField::from_poisson(mesh.num_cells(), 1.0, 0.3);
  Mat2 b;
  b << 0.2, 0.1, -0.3, 0.4;
  auto exact = std::make_shared<verify::Linear>(1.0, mat.lambda(0), Vec2(0.1, 0.0), b);
  verify::Problem prob{exact->force_field(), BoundaryConditions::dirichlet_all(exact->displacement_field()), exact};
  for (Method m : verify::all_methods()) {
    const auto run = verify::run_method(mesh, mat, prob, m);
    ASSERT_TRUE(run.report.ok()) << verify::to_string(m);
    EXPECT_LT(run.report.l2_u, 1e-12) << verify::to_string(m);
    EXPECT_LT(run.report.l2_div, 1e-11) << verify::to_string(m);
    EXPECT_LT(run.report.linf_stress, 1e-10) << verify::to_string(m);
  }
}

TEST(Rates, FittedSlope) {
  const std::vector<double> h{0.4, 0.2, 0.1, 0.05};
  std::vector<double> e;
  for (double x : h) e.push_back(3.0 * x * x);
  EXPECT_NEAR(verify::fitted_rate(h, e), 2.0, 1e-12);
  e[1] = std::nan("");
  EXPECT_NEAR(verify::fitted_rate(h, e), 2.0, 1e-12);
  EXPECT_TRUE(std::isnan(verify::fitted_rate({0.1}, {0.2})));
}

TEST(Methods, NamesRoundTrip) {
  for (Method m : verify::all_methods()) EXPECT_EQ(verify::parse_method(verify::to_string(m)), m);
  EXPECT_THROW(verify::parse_method("fem"), ParameterError);
  EXPECT_EQ(verify::all_methods().size(), 5u);
}

TEST(Cases, EveryCaseBuildsItsGrid) {
  for (const auto& id : verify::case_ids()) {
    verify::CaseConfig cfg;
    cfg.id = id;
    cfg.level = 4;
    EXPECT_NO_THROW(meshgen::generate(verify::case_grid(cfg))) << id;
  }
  verify::CaseConfig bad;
  bad.id = "7";
  EXPECT_THROW(verify::case_grid(bad), ParameterError);
}

TEST(Cases, CaseGridsFollowTheTable) {
  verify::CaseConfig cfg;
  cfg.level = 4;
  cfg.id = "2b";
  EXPECT_EQ(verify::case_grid(cfg).ny, 28);
  cfg.id = "3";
  cfg.parameter = 10;
  EXPECT_EQ(verify::case_grid(cfg).ny, 40);
  cfg.id = "5a";
  cfg.parameter = -1;
  const auto g = verify::case_grid(cfg);
  EXPECT_EQ(g.nx, 5);
  EXPECT_DOUBLE_EQ(g.layer_width_factor, 20.0);
  cfg.id = "6b";
  EXPECT_TRUE(verify::case_grid(cfg).twist);
  EXPECT_DOUBLE_EQ(verify::case_default_nu("6b"), 0.495);
  EXPECT_DOUBLE_EQ(verify::case_default_nu("1"), 0.3);
}

TEST(Cases, TwoRegionProfile) {
  verify::CaseConfig cfg;
  cfg.id = "4a";
  cfg.level = 4;
  cfg.parameter = 2;
  const auto res = verify::run_case(cfg, {Method::vem, Method::mpsa});
  ASSERT_TRUE(res.interface_x.has_value());
  EXPECT_DOUBLE_EQ(*res.interface_x, 0.5);
  for (const auto& run : res.runs) {
    EXPECT_TRUE(run.report.ok());
    const auto prof = verify::interface_profile(res.mesh, run, *res.interface_x, res.exact.get());
    // seen from the fine side: 2 faces per coarse face
    ASSERT_EQ(prof.size(), 8u);
    for (std::size_t i = 1; i < prof.size(); ++i) EXPECT_GT(prof[i].arclength, prof[i - 1].arclength);
    EXPECT_TRUE(std::isfinite(verify::total_variation_x(prof)));
  }
}

TEST(Cases, StudyNeedsThreeLevels) {
  verify::CaseConfig cfg;
  EXPECT_THROW(verify::convergence_study(cfg, {4, 8}, {Method::vem}), ParameterError);
  const auto s = verify::convergence_study(cfg, {4, 8, 16}, {Method::vem, Method::mpsa});
  EXPECT_EQ(s.reports.size(), 6u);
  ASSERT_EQ(s.rates.size(), 2u);
  for (const auto& r : s.rates) EXPECT_GT(r[0], 1.0);
}

TEST(Cases, LockingReferenceIsClampedAndSags) {
  const auto ref = verify::locking_reference(8, 1.0, 0.495);
  EXPECT_LT(ref->displacement({0.0, 0.5}).norm(), 1e-15);
  EXPECT_LT(ref->displacement({0.5, 0.5}).y(), 0.0);
}

TEST(Output, ErrorCsvHasHeaderAndRows) {
  verify::ErrorReport r;
  r.case_id = "1";
  r.method = "vem";
  r.variant = "standard";
  r.grid = "family=cartesian nx=4";
  std::ostringstream os;
  io::write_error_csv(os, {r, r}, {{"seed", "3"}});
  const std::string s = os.str();
  EXPECT_EQ(s.find("# version="), 0u);
  EXPECT_NE(s.find("# seed=3\n"), std::string::npos);
  EXPECT_NE(s.find(io::error_csv_header()), std::string::npos);
  int lines = 0;
  for (char c : s) lines += c == '\n';
  EXPECT_EQ(lines, 5);
}

TEST(Output, VtkCounts) {
  const PolyMesh mesh = meshgen::mixed_demo();
  std::ostringstream os;
  io::write_vtk(os, mesh, {io::scalar_field("id", std::vector<double>(mesh.num_cells(), 1.0))});
  const std::string s = os.str();
  EXPECT_NE(s.find("CELLS " + std::to_string(mesh.num_cells())), std::string::npos);
  EXPECT_NE(s.find("CELL_DATA " + std::to_string(mesh.num_cells())), std::string::npos);
  EXPECT_THROW(io::write_vtk(os, mesh, {io::scalar_field("bad", {1.0})}), ParameterError);
}
