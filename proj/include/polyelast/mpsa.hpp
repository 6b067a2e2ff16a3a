#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polyelast/boundary.hpp"
#include "polyelast/linalg.hpp"
#include "polyelast/material.hpp"
#include "polyelast/mesh.hpp"

namespace polyelast::mpsa {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Variant { standard, relax_extra };

inline const char* to_string(Variant v) { return v == Variant::standard ? "mpsa" : "mpsa-relax-extra"; }

/// Linear map from {u_K, avg value on sub-face a, avg value on sub-face b}
/// to the 2x2 gradient of the affine interpolant in sub-cell (K,s):
/// G = [ua - uK, ub - uK] * inv([xa - xK, xb - xK]). Rows of `dinv` are the
/// gradient weights of the two sub-face values.
struct GradientMap {
  Mat2 dinv;

  Mat2 apply(const Vec2& uk, const Vec2& ua, const Vec2& ub) const {
    Mat2 u;
    u.col(0) = ua - uk;
    u.col(1) = ub - uk;
    return u * dinv;
  }
};

inline GradientMap local_gradient_map(const Vec2& xk, const Vec2& xa, const Vec2& xb, int cell, int vertex) {
  Mat2 d;
  d.col(0) = xa - xk;
  d.col(1) = xb - xk;
  const double scale = std::max(d.col(0).squaredNorm(), d.col(1).squaredNorm());
  if (std::abs(d.determinant()) <= 1e-12 * scale)
    throw LocalGeometryError("degenerate sub-region (cell " + std::to_string(cell) + ", vertex " +
                             std::to_string(vertex) + "): centroid and sub-face midpoints are collinear");
  return {d.inverse()};
}

/// Force and trace maps of one sub-face (K, s, sigma). Columns follow the
/// region's local cell layout: 2 displacement components per region cell,
/// then one pressure per region cell for the relaxed variant.
struct SubFaceWeights {
  int cell = -1;
  int face = -1;
  int vertex = -1;
  double measure = 0.0;
  Vec2 normal = Vec2::Zero();  // outward for `cell`
  MatrixXd force;              // T = force * x_local + force_const
  Vec2 force_const = Vec2::Zero();
  MatrixXd trace;              // averaged sub-face displacement
  Vec2 trace_const = Vec2::Zero();
};

struct RegionWeights {
  int vertex = -1;
  double conditioning = 1.0;  // worst relative singular value of the local solve
  std::vector<int> cells;
  std::vector<SubFaceWeights> subfaces;
};

struct LocalFailure {
  int vertex = -1;
  std::string reason;  // "local-rank" or "local-geometry"
  std::string detail;
};

struct Weights {
  Variant variant = Variant::standard;
  std::vector<RegionWeights> regions;
  std::vector<LocalFailure> failures;
  std::set<int> fractured;

  bool ok() const { return failures.empty(); }
};

struct Options {
  Variant variant = Variant::standard;
  std::set<int> fracture_faces;
  double rank_tolerance = 1e-10;
  double indeterminacy_tolerance = 1e-8;
};

namespace detail {

inline double harmonic(double a, double b) { return 2.0 * a * b / (a + b); }

}  // namespace detail

/// Local constrained least-squares solve for one interaction region.
///
/// Unknowns are the averaged sub-face values u_{K,s}^sigma (2 per sub-face).
/// Each sub-cell (K,s) carries the affine field through u_K and its two
/// sub-face values; the quadrature-point values u_{K,s}^{sigma,beta} are that
/// field evaluated at the Gauss points. Forces are continuous exactly, the
/// weighted quadrature-point jumps are minimized.
///
/// Throws LocalGeometryError for degenerate sub-cells and SolverError when the
/// minimizer leaves the forces undetermined (rank failure).
inline RegionWeights local_solve(const PolyMesh& mesh, const MaterialField& mat, const InteractionRegion& region,
                                 const BoundaryConditions& bc, const Options& opt) {
  const bool relax = opt.variant == Variant::relax_extra;
  const int s = region.vertex;
  const int nc = static_cast<int>(region.cells.size());
  const int nsf = static_cast<int>(region.subfaces.size());
  const int nu = 2 * nsf;
  const int np = (relax ? 3 : 2) * nc;
  const int m = np + 1;  // last parameter column carries the boundary data

  // T_k = fx * x + fp * p; qp value (k, beta) = qx[k][beta] * x + qp[k][beta] * p.
  MatrixXd fx = MatrixXd::Zero(2 * nsf, nu), fp = MatrixXd::Zero(2 * nsf, m);
  std::vector<std::array<MatrixXd, 2>> qx(nsf), qpar(nsf);
  for (int lc = 0; lc < nc; ++lc) {
    const int c = region.cells[lc];
    std::array<int, 2> pair{-1, -1};
    int found = 0;
    for (int k = 0; k < nsf; ++k)
      if (region.subfaces[k].cell == c && found < 2) pair[found++] = k;
    if (found != 2)
      throw LocalGeometryError("cell " + std::to_string(c) + " has " + std::to_string(found) + " sub-faces at vertex " +
                               std::to_string(s));
    const Vec2& xk = mesh.cell(c).centroid;
    const GradientMap gm = local_gradient_map(xk, region.subfaces[pair[0]].midpoint,
                                              region.subfaces[pair[1]].midpoint, c, s);
    const double mu = mat.mu(c), lam = relax ? 0.0 : mat.lambda(c);
    for (int k : pair) {
      const SubFace& sf = region.subfaces[k];
      const Vec2& n = sf.outward_normal;
      Mat2 msum = Mat2::Zero();
      for (int col = 0; col < 2; ++col) {
        const Vec2 dc = gm.dinv.row(col).transpose();
        const Mat2 mcol =
            sf.measure * (mu * dc.dot(n) * Mat2::Identity() + mu * dc * n.transpose() + lam * n * dc.transpose());
        msum += mcol;
        fx.block(2 * k, 2 * pair[col], 2, 2) += mcol;
      }
      fp.block(2 * k, 2 * lc, 2, 2) -= msum;
      if (relax) fp.block(2 * k, 2 * nc + lc, 2, 1) += sf.measure * n;
      for (int beta = 0; beta < 2; ++beta) {
        qx[k][beta] = MatrixXd::Zero(2, nu);
        qpar[k][beta] = MatrixXd::Zero(2, m);
        double rest = 1.0;
        for (int col = 0; col < 2; ++col) {
          const double phi = gm.dinv.row(col).dot(sf.quad_points[beta] - xk);
          qx[k][beta].block(0, 2 * pair[col], 2, 2) += phi * Mat2::Identity();
          rest -= phi;
        }
        qpar[k][beta].block(0, 2 * lc, 2, 2) += rest * Mat2::Identity();
      }
    }
  }

  // Constraints C x = R p and the jump objective ||J x - S p||.
  std::vector<Eigen::RowVectorXd> crow, rrow, jrow, srow;
  auto add_constraint = [&](const Eigen::RowVectorXd& cx, const Eigen::RowVectorXd& rp) {
    crow.push_back(cx);
    rrow.push_back(rp);
  };
  std::vector<int> partner(nsf, -1);
  for (int k = 0; k < nsf; ++k)
    for (int l = 0; l < nsf; ++l)
      if (l != k && region.subfaces[l].face == region.subfaces[k].face) partner[k] = l;

  for (int k = 0; k < nsf; ++k) {
    const SubFace& sf = region.subfaces[k];
    const Face& face = mesh.face(sf.face);
    if (!face.is_boundary()) {
      const int l = partner[k];
      if (opt.fracture_faces.count(sf.face)) {
        for (int i = 0; i < 2; ++i) add_constraint(fx.row(2 * k + i), -fp.row(2 * k + i));
        continue;
      }
      if (l < k) continue;  // each interior face once
      for (int i = 0; i < 2; ++i)
        add_constraint(fx.row(2 * k + i) + fx.row(2 * l + i), -(fp.row(2 * k + i) + fp.row(2 * l + i)));
      const double w = std::sqrt(detail::harmonic(mat.max_stiffness_eigenvalue(sf.cell),
                                                  mat.max_stiffness_eigenvalue(region.subfaces[l].cell)));
      for (int beta = 0; beta < 2; ++beta)
        for (int i = 0; i < 2; ++i) {
          jrow.push_back(w * (qx[l][beta].row(i) - qx[k][beta].row(i)));
          srow.push_back(-w * (qpar[l][beta].row(i) - qpar[k][beta].row(i)));
        }
      continue;
    }
    const SideCondition& cond = bc.at_face(face);
    const std::array<Vec2, 2> gq{cond.value(sf.quad_points[0]), cond.value(sf.quad_points[1])};
    const Vec2 g = sf.quad_weights[0] * gq[0] + sf.quad_weights[1] * gq[1];
    const double w = std::sqrt(mat.max_stiffness_eigenvalue(sf.cell));
    for (int i = 0; i < 2; ++i) {
      Eigen::RowVectorXd rp = Eigen::RowVectorXd::Zero(m);
      if (cond.dirichlet(i)) {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(nu);
        row[2 * k + i] = 1.0;
        rp[m - 1] = g[i];
        add_constraint(row, rp);
        // the data acts as the neighbour: its quadrature-point jumps join the objective
        for (int beta = 0; beta < 2; ++beta) {
          jrow.push_back(w * qx[k][beta].row(i));
          Eigen::RowVectorXd srow_b = -w * qpar[k][beta].row(i);
          srow_b[m - 1] += w * gq[beta][i];
          srow.push_back(srow_b);
        }
      } else {
        rp = -fp.row(2 * k + i);
        rp[m - 1] += sf.measure * g[i];
        add_constraint(fx.row(2 * k + i), rp);
      }
    }
  }

  MatrixXd c(crow.size(), nu), r(crow.size(), m), j(jrow.size(), nu), sj(jrow.size(), m);
  for (std::size_t i = 0; i < crow.size(); ++i) {
    c.row(i) = crow[i];
    r.row(i) = rrow[i];
  }
  for (std::size_t i = 0; i < jrow.size(); ++i) {
    j.row(i) = jrow[i];
    sj.row(i) = srow[i];
  }
  // Traction data that no pair of sub-cell stresses can match exactly (shear
  // varying across a boundary vertex) is met in the least-squares sense.
  const linalg::ClsResult cls = linalg::constrained_least_squares(j, sj, c, r, opt.rank_tolerance, np);

  // The forces must not depend on what the constraints and the objective
  // leave free. Remaining freedom in the averages (single-cell regions with
  // traction data) is fixed by irrotational sub-cell fields first, then by
  // the smallest sub-cell gradients.
  MatrixXd trace = cls.map;
  if (cls.nullspace.cols() > 0) {
    const MatrixXd& n0 = cls.nullspace;
    const double fscale = std::max(fx.cwiseAbs().maxCoeff(), 1e-300);
    const double leak = (fx * n0).cwiseAbs().maxCoeff() / fscale;
    if (leak > opt.indeterminacy_tolerance)
      throw SolverError("local system at vertex " + std::to_string(s) + " is rank deficient (" +
                        std::to_string(n0.cols()) + " free directions reach the forces)");
    MatrixXd centre = MatrixXd::Zero(nu, m);
    for (int k = 0; k < nsf; ++k) {
      const auto lc = std::find(region.cells.begin(), region.cells.end(), region.subfaces[k].cell) - region.cells.begin();
      centre.block(2 * k, 2 * lc, 2, 2).setIdentity();
    }
    // rot.row(lc) * (trace - centre) = dv/dx - du/dy of sub-cell lc
    MatrixXd rot = MatrixXd::Zero(nc, nu);
    for (int lc = 0; lc < nc; ++lc) {
      const int c = region.cells[lc];
      std::array<int, 2> pair{-1, -1};
      int found = 0;
      for (int k = 0; k < nsf; ++k)
        if (region.subfaces[k].cell == c && found < 2) pair[found++] = k;
      const GradientMap gm = local_gradient_map(mesh.cell(c).centroid, region.subfaces[pair[0]].midpoint,
                                                region.subfaces[pair[1]].midpoint, c, s);
      for (int j = 0; j < 2; ++j) {
        rot(lc, 2 * pair[j] + 1) += gm.dinv(j, 0);
        rot(lc, 2 * pair[j]) -= gm.dinv(j, 1);
      }
    }
    const Eigen::JacobiSVD<MatrixXd> svd(rot * n0, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int rank = 0;
    while (rank < sv.size() && sv[rank] > 1e-10 * sv[0]) ++rank;
    const MatrixXd vr = svd.matrixV().leftCols(rank), vn = svd.matrixV().rightCols(n0.cols() - rank);
    if (rank > 0) {
      const MatrixXd ur = svd.matrixU().leftCols(rank);
      trace -= n0 * (vr * (sv.head(rank).cwiseInverse().asDiagonal() * (ur.transpose() * (rot * (trace - centre)))));
    }
    const MatrixXd n1 = n0 * vn;
    trace -= n1 * (n1.transpose() * (trace - centre));
  }

  RegionWeights out;
  out.vertex = s;
  out.conditioning = std::min(cls.constraint_conditioning, cls.objective_conditioning);
  out.cells = region.cells;
  const MatrixXd force = fx * trace + fp;
  for (int k = 0; k < nsf; ++k) {
    const SubFace& sf = region.subfaces[k];
    SubFaceWeights w;
    w.cell = sf.cell;
    w.face = sf.face;
    w.vertex = s;
    w.measure = sf.measure;
    w.normal = sf.outward_normal;
    w.force = force.block(2 * k, 0, 2, np);
    w.force_const = force.block(2 * k, np, 2, 1);
    w.trace = trace.block(2 * k, 0, 2, np);
    w.trace_const = trace.block(2 * k, np, 2, 1);
    const Face& face = mesh.face(sf.face);
    if (face.is_boundary()) {
      // Neumann components carry exactly the prescribed force.
      const SideCondition& cond = bc.at_face(face);
      const Vec2 g = sf.quad_weights[0] * cond.value(sf.quad_points[0]) +
                     sf.quad_weights[1] * cond.value(sf.quad_points[1]);
      for (int i = 0; i < 2; ++i)
        if (!cond.dirichlet(i)) {
          w.force.row(i).setZero();
          w.force_const[i] = sf.measure * g[i];
        }
    } else if (opt.fracture_faces.count(sf.face)) {
      w.force.setZero();
      w.force_const.setZero();
    }
    out.subfaces.push_back(std::move(w));
  }
  return out;
}

/// Stress weights of every interaction region. Local failures are collected.
inline Weights compute_weights(const PolyMesh& mesh, const MaterialField& mat, const BoundaryConditions& bc,
                               const Options& opt = {}) {
  if (mat.size() != mesh.num_cells()) throw ParameterError("material size does not match the mesh");
  for (int f : opt.fracture_faces) {
    if (f < 0 || f >= mesh.num_faces()) throw ParameterError("fracture face " + std::to_string(f) + " does not exist");
    if (mesh.face(f).is_boundary())
      throw ParameterError("fracture face " + std::to_string(f) + " lies on the boundary");
  }
  Weights w;
  w.variant = opt.variant;
  w.fractured = opt.fracture_faces;
  for (const InteractionRegion& region : interaction_regions(mesh)) {
    try {
      w.regions.push_back(local_solve(mesh, mat, region, bc, opt));
    } catch (const LocalGeometryError& e) {
      w.failures.push_back({region.vertex, "local-geometry", e.what()});
    } catch (const SolverError& e) {
      w.failures.push_back({region.vertex, "local-rank", e.what()});
    }
  }
  return w;
}

/// Global unknowns: 2 displacement components per cell, then one pressure per
/// cell for the relaxed variant.
struct System {
  Variant variant = Variant::standard;
  int cells = 0;
  linalg::SparseMatrix matrix;
  VectorXd rhs;
  int size() const { return (variant == Variant::relax_extra ? 3 : 2) * cells; }
};

namespace detail {

inline int global_column(const RegionWeights& r, int local, int ncells) {
  const int nc = static_cast<int>(r.cells.size());
  if (local < 2 * nc) return 2 * r.cells[local / 2] + local % 2;
  return 2 * ncells + r.cells[local - 2 * nc];
}

}  // namespace detail

/// Momentum rows -sum_sigma T_K^sigma = |K| f(x_K) and, for the relaxed
/// variant, pressure rows |K| p_K - lambda_K sum m u_{K,s}^sigma . n = 0.
inline System assemble(const PolyMesh& mesh, const MaterialField& mat, const VectorField& body_force,
                       const Weights& w) {
  if (!w.ok()) throw SolverError("cannot assemble: " + std::to_string(w.failures.size()) + " local solves failed");
  System sys;
  sys.variant = w.variant;
  sys.cells = mesh.num_cells();
  const int nc = sys.cells;
  const bool relax = w.variant == Variant::relax_extra;
  linalg::TripletBuilder tb(sys.size(), sys.size());
  sys.rhs = VectorXd::Zero(sys.size());
  for (int c = 0; c < nc; ++c) {
    const Vec2 f = body_force(mesh.cell(c).centroid) * mesh.cell(c).volume;
    sys.rhs[2 * c] = f.x();
    sys.rhs[2 * c + 1] = f.y();
    if (relax) tb.add(2 * nc + c, 2 * nc + c, mesh.cell(c).volume);
  }
  for (const RegionWeights& r : w.regions)
    for (const SubFaceWeights& sf : r.subfaces) {
      const int c = sf.cell;
      for (int col = 0; col < sf.force.cols(); ++col) {
        const int g = detail::global_column(r, col, nc);
        tb.add(2 * c, g, -sf.force(0, col));
        tb.add(2 * c + 1, g, -sf.force(1, col));
        if (relax) tb.add(2 * nc + c, g, -mat.lambda(c) * sf.measure * sf.normal.dot(sf.trace.col(col)));
      }
      sys.rhs[2 * c] += sf.force_const.x();
      sys.rhs[2 * c + 1] += sf.force_const.y();
      if (relax) sys.rhs[2 * nc + c] += mat.lambda(c) * sf.measure * sf.normal.dot(sf.trace_const);
    }
  sys.matrix = tb.build();
  return sys;
}

struct Solution {
  Variant variant = Variant::standard;
  std::string status = "ok";
  std::vector<LocalFailure> failures;
  VectorXd cell_displacement;  // 2 per cell
  VectorXd pressure;           // per cell (relaxed variant)
  std::vector<Vec2> face_force;        // K-side force per face (cells[0])
  std::vector<double> divergence;      // per cell
  VectorXd state;                      // full global unknown vector
  linalg::SolveReport report;

  bool ok() const { return status == "ok"; }
  Vec2 displacement(int cell) const { return {cell_displacement[2 * cell], cell_displacement[2 * cell + 1]}; }
};

namespace detail {

inline VectorXd local_values(const RegionWeights& r, const VectorXd& x, int ncells, int cols) {
  VectorXd v(cols);
  for (int col = 0; col < cols; ++col) v[col] = x[global_column(r, col, ncells)];
  return v;
}

}  // namespace detail

/// Sub-face forces summed per face, reported for the face's first cell.
inline std::vector<Vec2> face_forces(const PolyMesh& mesh, const Weights& w, const VectorXd& x) {
  std::vector<Vec2> out(mesh.num_faces(), Vec2::Zero());
  for (const RegionWeights& r : w.regions)
    for (const SubFaceWeights& sf : r.subfaces) {
      if (mesh.face(sf.face).cells[0] != sf.cell) continue;
      const VectorXd v = detail::local_values(r, x, mesh.num_cells(), static_cast<int>(sf.force.cols()));
      out[sf.face] += sf.force * v + sf.force_const;
    }
  return out;
}

/// Sub-face forces on both sides, keyed by (face, side) with side 0 = cells[0].
inline std::vector<std::array<Vec2, 2>> face_forces_both_sides(const PolyMesh& mesh, const Weights& w,
                                                               const VectorXd& x) {
  std::vector<std::array<Vec2, 2>> out(mesh.num_faces(), {Vec2::Zero(), Vec2::Zero()});
  for (const RegionWeights& r : w.regions)
    for (const SubFaceWeights& sf : r.subfaces) {
      const int side = mesh.face(sf.face).cells[0] == sf.cell ? 0 : 1;
      const VectorXd v = detail::local_values(r, x, mesh.num_cells(), static_cast<int>(sf.force.cols()));
      out[sf.face][side] += sf.force * v + sf.force_const;
    }
  return out;
}

/// (1/|K|) sum over sub-faces of m u_{K,s}^sigma . n_{K,sigma}.
inline std::vector<double> cell_divergence(const PolyMesh& mesh, const Weights& w, const VectorXd& x) {
  std::vector<double> div(mesh.num_cells(), 0.0);
  for (const RegionWeights& r : w.regions)
    for (const SubFaceWeights& sf : r.subfaces) {
      const VectorXd v = detail::local_values(r, x, mesh.num_cells(), static_cast<int>(sf.trace.cols()));
      div[sf.cell] += sf.measure * sf.normal.dot(sf.trace * v + sf.trace_const);
    }
  for (int c = 0; c < mesh.num_cells(); ++c) div[c] /= mesh.cell(c).volume;
  return div;
}

/// Global solve with precomputed weights.
inline Solution solve(const PolyMesh& mesh, const MaterialField& mat, const VectorField& body_force, const Weights& w) {
  Solution sol;
  sol.variant = w.variant;
  if (!w.ok()) {
    sol.failures = w.failures;
    sol.status = "failed:" + w.failures.front().reason;
    return sol;
  }
  const System sys = assemble(mesh, mat, body_force, w);
  VectorXd x;
  try {
    x = linalg::solve_general(sys.matrix, sys.rhs, &sol.report);
  } catch (const SolverError& e) {
    sol.status = "failed:singular";
    sol.failures.push_back({-1, "singular", e.what()});
    return sol;
  }
  sol.state = x;
  sol.cell_displacement = x.head(2 * mesh.num_cells());
  if (w.variant == Variant::relax_extra) sol.pressure = x.tail(mesh.num_cells());
  sol.face_force = face_forces(mesh, w, x);
  sol.divergence = cell_divergence(mesh, w, x);
  return sol;
}

inline Solution solve(const PolyMesh& mesh, const MaterialField& mat, const VectorField& body_force,
                      const BoundaryConditions& bc, const Options& opt = {}) {
  return solve(mesh, mat, body_force, compute_weights(mesh, mat, bc, opt));
}

}  // namespace polyelast::mpsa
