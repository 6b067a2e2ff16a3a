#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "polyelast/linalg.hpp"

using namespace polyelast;
using namespace polyelast::linalg;

namespace {

SparseMatrix laplacian(int n) {
  TripletBuilder tb(n, n);
  for (int i = 0; i < n; ++i) {
    tb.add(i, i, 2.0);
    if (i > 0) tb.add(i, i - 1, -1.0);
    if (i + 1 < n) tb.add(i, i + 1, -1.0);
  }
  return tb.build();
}

}  // namespace

TEST(TripletBuilder, SumsDuplicates) {
  TripletBuilder tb(2, 2);
  tb.add(0, 0, 1.0);
  tb.add(0, 0, 2.5);
  tb.add(1, 0, 0.0);
  tb.add_block(std::vector<int>{0, 1}, std::vector<int>{1, 0}, Eigen::Matrix2d::Ones());
  const SparseMatrix m = tb.build();
  EXPECT_DOUBLE_EQ(m.coeff(0, 0), 4.5);
  EXPECT_DOUBLE_EQ(m.coeff(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(m.coeff(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(asymmetry(m), 0.0);
}

TEST(TripletBuilder, RejectsNonFinite) {
  TripletBuilder tb(1, 1);
  tb.add(0, 0, std::nan(""));
  EXPECT_THROW(tb.build(), SolverError);
}

TEST(Solvers, SpdAgainstDense) {
  const SparseMatrix a = laplacian(30);
  const VectorXd b = VectorXd::LinSpaced(30, -1.0, 2.0);
  SolveReport rep;
  const VectorXd x = solve_spd(a, b, &rep);
  const VectorXd ref = Eigen::MatrixXd(a).ldlt().solve(b);
  EXPECT_LT((x - ref).lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_LT(rep.relative_residual, 1e-14);
}

TEST(Solvers, SpdRejectsIndefinite) {
  SparseMatrix a = laplacian(5);
  a.coeffRef(2, 2) = -3.0;
  EXPECT_THROW(solve_spd(a, VectorXd::Ones(5)), NotSpdError);
}

TEST(Solvers, GeneralNonsymmetric) {
  TripletBuilder tb(3, 3);
  const double v[3][3] = {{4, 1, 0}, {-2, 5, 1}, {0, 3, 6}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) tb.add(i, j, v[i][j]);
  const SparseMatrix a = tb.build();
  const VectorXd b(Eigen::Vector3d(1, 2, 3));
  const VectorXd x = solve_general(a, b);
  EXPECT_LT((a * x - b).norm(), 1e-14);
  EXPECT_EQ(sparse_rank(a), 3);
}

TEST(Solvers, GeneralSingular) {
  TripletBuilder tb(2, 2);
  tb.add(0, 0, 1.0);
  tb.add(0, 1, 1.0);
  tb.add(1, 0, 1.0);
  tb.add(1, 1, 1.0);
  EXPECT_THROW(solve_general(tb.build(), VectorXd::Ones(2)), SolverError);
}

// Oracle: the KKT system [J'J C'; C 0] solved densely.
TEST(ConstrainedLeastSquares, MatchesKkt) {
  std::srand(3);
  const MatrixXd j = MatrixXd::Random(7, 4), s = MatrixXd::Random(7, 2);
  const MatrixXd c = MatrixXd::Random(2, 4), r = MatrixXd::Random(2, 2);
  const ClsResult res = constrained_least_squares(j, s, c, r);
  MatrixXd kkt = MatrixXd::Zero(6, 6), rhs(6, 2);
  kkt.topLeftCorner(4, 4) = j.transpose() * j;
  kkt.topRightCorner(4, 2) = c.transpose();
  kkt.bottomLeftCorner(2, 4) = c;
  rhs << j.transpose() * s, r;
  const MatrixXd ref = kkt.fullPivLu().solve(rhs).topRows(4);
  EXPECT_LT((res.map - ref).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(res.constraint_rank, 2);
  EXPECT_EQ(res.nullspace.cols(), 0);
  EXPECT_LT(res.constraint_residual, 1e-14);
  EXPECT_LT(res.stationarity, 1e-13);
}

TEST(ConstrainedLeastSquares, ReportsFreeDirections) {
  // x2 appears nowhere: one free direction, minimal norm picks x2 = 0
  MatrixXd j(2, 3), s(2, 1), c(1, 3), r(1, 1);
  j << 1, 0, 0, 0, 0, 0;
  s << 2, 0;
  c << 1, 1, 0;
  r << 5;
  const ClsResult res = constrained_least_squares(j, s, c, r);
  ASSERT_EQ(res.nullspace.cols(), 1);
  EXPECT_NEAR(std::abs(res.nullspace(2, 0)), 1.0, 1e-14);
  EXPECT_NEAR(res.map(0, 0), 2.0, 1e-13);
  EXPECT_NEAR(res.map(1, 0), 3.0, 1e-13);
  EXPECT_NEAR(res.map(2, 0), 0.0, 1e-13);
}

TEST(ConstrainedLeastSquares, InconsistentConstraints) {
  MatrixXd c(2, 2), r(2, 2), j(0, 2), s(0, 2);
  c << 1, 1, 2, 2;
  r << 1, 0, 3, 0;
  EXPECT_THROW(constrained_least_squares(j, s, c, r), InfeasibleError);
  // only the first column is checked strictly; the second is met in the LS sense
  r << 1, 1, 2, 3;
  const ClsResult res = constrained_least_squares(j, s, c, r, 1e-10, 1);
  EXPECT_NEAR(res.map.col(0).sum(), 1.0, 1e-13);
  EXPECT_GT(res.map.col(1).sum(), 1.0);
  EXPECT_LT(res.map.col(1).sum(), 1.5);
}

TEST(ConstrainedLeastSquares, DimensionMismatch) {
  EXPECT_THROW(constrained_least_squares(MatrixXd::Zero(2, 3), MatrixXd::Zero(2, 1), MatrixXd::Zero(1, 2),
                                         MatrixXd::Zero(1, 1)),
               SolverError);
}
