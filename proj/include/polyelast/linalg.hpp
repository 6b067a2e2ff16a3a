#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <Eigen/SparseQR>

#include "polyelast/errors.hpp"

namespace polyelast::linalg {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Accumulates (i, j, v) entries in call order; duplicates are summed at
/// finalization, which keeps the result independent of hash or thread order.
class TripletBuilder {
 public:
  TripletBuilder(int rows, int cols) : rows_(rows), cols_(cols) {}

  void add(int i, int j, double v) {
    if (v != 0.0) entries_.emplace_back(i, j, v);
  }

  template <class Derived>
  void add_block(const std::vector<int>& rows, const std::vector<int>& cols, const Eigen::MatrixBase<Derived>& block) {
    for (std::size_t a = 0; a < rows.size(); ++a)
      for (std::size_t b = 0; b < cols.size(); ++b) add(rows[a], cols[b], block(a, b));
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  SparseMatrix build() const {
    SparseMatrix m(rows_, cols_);
    m.setFromTriplets(entries_.begin(), entries_.end());
    m.makeCompressed();
    for (int k = 0; k < m.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(m, k); it; ++it)
        if (!std::isfinite(it.value())) throw SolverError("non-finite matrix entry");
    return m;
  }

 private:
  int rows_, cols_;
  std::vector<Triplet> entries_;
};

inline double max_abs(const SparseMatrix& a) {
  double m = 0.0;
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

inline double row_sum_norm(const SparseMatrix& a) {
  VectorXd sums = VectorXd::Zero(a.rows());
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) sums[it.row()] += std::abs(it.value());
  return sums.size() ? sums.maxCoeff() : 0.0;
}

/// Exact structural symmetry check: ||A - A^T||_max.
inline double asymmetry(const SparseMatrix& a) {
  SparseMatrix t = a.transpose();
  return max_abs(SparseMatrix(a - t));
}

struct SolveReport {
  double residual = 0.0;           // ||Ax - b||_inf
  double relative_residual = 0.0;  // residual / (||A||_inf ||x||_inf + ||b||_inf)
  int refinement_steps = 0;
};

namespace detail {

template <class Solver>
VectorXd refine_and_check(const Solver& solver, const SparseMatrix& a, const VectorXd& b, double tol,
                          SolveReport* report) {
  VectorXd x = solver.solve(b);
  const double anorm = row_sum_norm(a);
  auto measure = [&](const VectorXd& r) {
    const double scale = anorm * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>();
    return scale > 0.0 ? r.lpNorm<Eigen::Infinity>() / scale : r.lpNorm<Eigen::Infinity>();
  };
  VectorXd r = b - a * x;
  int steps = 0;
  while (measure(r) > tol && steps < 2) {
    x += solver.solve(r);
    r = b - a * x;
    ++steps;
  }
  const double rel = measure(r);
  if (!x.allFinite() || rel > tol)
    throw SolverError("linear solve residual " + std::to_string(rel) + " exceeds tolerance");
  if (report) *report = {r.lpNorm<Eigen::Infinity>(), rel, steps};
  return x;
}

}  // namespace detail

/// Sparse Cholesky solve; throws NotSpdError on a non-positive pivot.
inline VectorXd solve_spd(const SparseMatrix& a, const VectorXd& b, SolveReport* report = nullptr,
                          double tol = 1e-10) {
  if (a.rows() != a.cols() || a.rows() != b.size()) throw SolverError("solve_spd: dimension mismatch");
  Eigen::SimplicialLLT<SparseMatrix> llt(a);
  if (llt.info() == Eigen::NumericalIssue) throw NotSpdError("matrix is not symmetric positive definite");
  if (llt.info() != Eigen::Success) throw SolverError("Cholesky factorization failed");
  return detail::refine_and_check(llt, a, b, tol, report);
}

/// Numerical rank of a sparse matrix via column-pivoted sparse QR.
inline int sparse_rank(const SparseMatrix& a) {
  Eigen::SparseQR<SparseMatrix, Eigen::COLAMDOrdering<int>> qr;
  qr.setPivotThreshold(1e-12 * std::max(max_abs(a), 1e-300));
  qr.compute(a);
  return qr.info() == Eigen::Success ? static_cast<int>(qr.rank()) : -1;
}

/// Sparse LU with partial pivoting for nonsymmetric systems.
inline VectorXd solve_general(const SparseMatrix& a, const VectorXd& b, SolveReport* report = nullptr,
                              double tol = 1e-10) {
  if (a.rows() != a.cols() || a.rows() != b.size()) throw SolverError("solve_general: dimension mismatch");
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success)
    throw SolverError("matrix is singular to working precision (estimated rank " + std::to_string(sparse_rank(a)) +
                      " of " + std::to_string(a.rows()) + ")");
  try {
    return detail::refine_and_check(lu, a, b, tol, report);
  } catch (const SolverError& e) {
    throw SolverError(std::string(e.what()) + " (estimated rank " + std::to_string(sparse_rank(a)) + " of " +
                      std::to_string(a.rows()) + ")");
  }
}

/// Result of min ||J x - S p||^2 subject to C x = R p, as a linear map of p.
struct ClsResult {
  MatrixXd map;        // x = map * p (minimal-norm minimizer)
  MatrixXd nullspace;  // directions changing neither constraints nor objective
  int constraint_rank = 0;
  double constraint_residual = 0.0;  // ||C map - R||_max / scale
  double stationarity = 0.0;         // ||Z^T J^T (J map - S)||_max / scale
  double constraint_conditioning = 1.0;  // smallest kept / largest singular value of scaled C
  double objective_conditioning = 1.0;   // same for J Z
};

/// Nullspace method: row-equilibrate C, split x = x0 + Z y via SVD with rank
/// tolerance rank_tol * sigma_max, then an unconstrained least-squares solve in
/// the nullspace. Throws InfeasibleError naming the inconsistent rows. Only the
/// first `strict_cols` columns of R are checked for consistency (all when
/// negative); the others are met in the least-squares sense.
inline ClsResult constrained_least_squares(const MatrixXd& j, const MatrixXd& s, const MatrixXd& c,
                                           const MatrixXd& r, double rank_tol = 1e-10, int strict_cols = -1) {
  const Eigen::Index n = std::max(j.cols(), c.cols());
  const Eigen::Index m = std::max(s.cols(), r.cols());
  if ((j.rows() && j.cols() != n) || (c.rows() && c.cols() != n) || s.rows() != j.rows() || r.rows() != c.rows() ||
      (s.rows() && s.cols() != m) || (r.rows() && r.cols() != m))
    throw SolverError("constrained_least_squares: dimension mismatch");

  ClsResult out;
  MatrixXd x0 = MatrixXd::Zero(n, m);
  MatrixXd z = MatrixXd::Identity(n, n);
  if (c.rows() > 0) {
    MatrixXd cs = c, rs = r;
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      const double nrm = c.row(i).norm();
      if (nrm > 0.0) {
        cs.row(i) /= nrm;
        rs.row(i) /= nrm;
      }
    }
    Eigen::JacobiSVD<MatrixXd> svd(cs, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() ? sv[0] : 0.0;
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv[i] > rank_tol * smax) ++rank;
    out.constraint_rank = rank;
    if (rank > 0) out.constraint_conditioning = sv[rank - 1] / smax;
    const MatrixXd& u = svd.matrixU();
    const MatrixXd& v = svd.matrixV();
    // Inconsistent part of the right-hand side lies in the left nullspace.
    const Eigen::Index strict = strict_cols < 0 ? m : std::min<Eigen::Index>(strict_cols, m);
    const MatrixXd leak = u.rightCols(cs.rows() - rank).transpose() * rs.leftCols(strict);
    const double rscale = std::max(1.0, rs.cwiseAbs().maxCoeff());
    if (leak.size() && leak.cwiseAbs().maxCoeff() > 1e-9 * rscale) {
      std::string rows;
      const MatrixXd ul = u.rightCols(cs.rows() - rank);
      for (Eigen::Index i = 0; i < cs.rows(); ++i)
        if (ul.row(i).cwiseAbs().maxCoeff() > 1e-6) rows += (rows.empty() ? "" : ",") + std::to_string(i);
      throw InfeasibleError("inconsistent constraints (rows " + rows + ")");
    }
    MatrixXd ut_r = u.leftCols(rank).transpose() * rs;
    for (int i = 0; i < rank; ++i) ut_r.row(i) /= sv[i];
    x0 = v.leftCols(rank) * ut_r;
    z = v.rightCols(n - rank);
    const MatrixXd res = (cs * x0 - rs).leftCols(strict);
    out.constraint_residual = res.size() ? res.cwiseAbs().maxCoeff() / rscale : 0.0;
  }

  MatrixXd y = MatrixXd::Zero(z.cols(), m);
  MatrixXd free_dirs = z;
  if (z.cols() > 0 && j.rows() > 0) {
    const MatrixXd jz = j * z;
    Eigen::JacobiSVD<MatrixXd> svd(jz, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() ? sv[0] : 0.0;
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv[i] > rank_tol * smax) ++rank;
    if (rank > 0) out.objective_conditioning = sv[rank - 1] / smax;
    MatrixXd rhs = svd.matrixU().leftCols(rank).transpose() * (s - j * x0);
    for (int i = 0; i < rank; ++i) rhs.row(i) /= sv[i];
    y = svd.matrixV().leftCols(rank) * rhs;
    free_dirs = z * svd.matrixV().rightCols(z.cols() - rank);
  }
  out.map = x0 + z * y;
  out.nullspace = free_dirs;
  if (j.rows() > 0 && z.cols() > 0) {
    const MatrixXd g = z.transpose() * j.transpose() * (j * out.map - s);
    const double scale = std::max(1.0, j.cwiseAbs().maxCoeff() * (j.cwiseAbs().maxCoeff() * out.map.cwiseAbs().maxCoeff() +
                                                                   s.cwiseAbs().maxCoeff()));
    out.stationarity = g.size() ? g.cwiseAbs().maxCoeff() / scale : 0.0;
  }
  return out;
}

}  // namespace polyelast::linalg
