#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polyelast/boundary.hpp"
#include "polyelast/linalg.hpp"
#include "polyelast/material.hpp"
#include "polyelast/mesh.hpp"

namespace polyelast::vem {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Variant { standard, relax, relax_extra };

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::standard: return "vem";
    case Variant::relax: return "vem-relax";
    case Variant::relax_extra: return "vem-relax-extra";
  }
  return "?";
}

/// Projection data of one cell. Local dofs are (u_x, u_y) per node in loop
/// order; x_bar is the vertex average, which makes the translation rows of
/// W_R reproduce affine fields.
struct Element {
  int cell = -1;
  int n = 0;
  Vec2 x_bar = Vec2::Zero();
  double volume = 0.0;
  std::vector<Vec2> q;  // q_i = (1/|K|) sum_{sigma ni i} (|sigma|/2) n_{K,sigma}
  MatrixXd NR, NC, WR, WC, P;
};

inline Element element_projections(const PolyMesh& mesh, int cell) {
  const Cell& c = mesh.cell(cell);
  const double scale = cell_diameter(mesh, cell);
  if (!(c.volume > 1e-14 * scale * scale)) throw AssemblyError("cell " + std::to_string(cell) + " is degenerate");
  Element e;
  e.cell = cell;
  e.n = c.size();
  e.volume = c.volume;
  const int n = e.n;
  for (int i = 0; i < n; ++i) e.x_bar += mesh.node(c.nodes[i]);
  e.x_bar /= n;

  e.q.assign(n, Vec2::Zero());
  for (int lf = 0; lf < n; ++lf) {
    const Face& f = mesh.face(c.faces[lf]);
    const Vec2 w = 0.5 * f.area * c.outward_normal(lf, mesh.faces());
    e.q[lf] += w;
    e.q[(lf + 1) % n] += w;
  }
  for (auto& v : e.q) v /= c.volume;

  e.NR.setZero(2 * n, 3);
  e.NC.setZero(2 * n, 3);
  e.WR.setZero(3, 2 * n);
  e.WC.setZero(3, 2 * n);
  for (int i = 0; i < n; ++i) {
    const Vec2 d = mesh.node(c.nodes[i]) - e.x_bar;
    const Vec2& q = e.q[i];
    e.NR(2 * i, 0) = 1.0;
    e.NR(2 * i + 1, 1) = 1.0;
    e.NR(2 * i, 2) = -d.y();
    e.NR(2 * i + 1, 2) = d.x();
    e.NC(2 * i, 0) = d.x();
    e.NC(2 * i + 1, 1) = d.y();
    e.NC(2 * i, 2) = 0.5 * d.y();
    e.NC(2 * i + 1, 2) = 0.5 * d.x();
    e.WR(0, 2 * i) = 1.0 / n;
    e.WR(1, 2 * i + 1) = 1.0 / n;
    e.WR(2, 2 * i) = -0.5 * q.y();
    e.WR(2, 2 * i + 1) = 0.5 * q.x();
    e.WC(0, 2 * i) = q.x();
    e.WC(1, 2 * i + 1) = q.y();
    e.WC(2, 2 * i) = q.y();
    e.WC(2, 2 * i + 1) = q.x();
  }
  e.P = e.NR * e.WR + e.NC * e.WC;
  return e;
}

/// Row vector mapping local nodal dofs to the cell-average divergence.
inline VectorXd divergence_row(const Element& e) {
  VectorXd g(2 * e.n);
  for (int i = 0; i < e.n; ++i) {
    g[2 * i] = e.q[i].x();
    g[2 * i + 1] = e.q[i].y();
  }
  return g;
}

/// Consistency part |K| W_C^T D W_C plus the scalar stabilization
/// (I-P)^T tau (I-P), tau the mean diagonal of the consistency part.
inline MatrixXd stabilized_matrix(const Element& e, const Mat3& d, double* tau_out = nullptr) {
  const MatrixXd cons = e.volume * e.WC.transpose() * d * e.WC;
  const double tau = cons.trace() / (2.0 * e.n);
  const MatrixXd ip = MatrixXd::Identity(2 * e.n, 2 * e.n) - e.P;
  MatrixXd a = cons + tau * ip.transpose() * ip;
  if (tau_out) *tau_out = tau;
  return 0.5 * (a + a.transpose());
}

/// Standard element matrix.
inline MatrixXd element_matrix(const PolyMesh& mesh, const MaterialField& mat, int cell) {
  return stabilized_matrix(element_projections(mesh, cell), mat.voigt(cell));
}

/// Local operator of any variant. For relax_extra the local dofs are the 2n
/// nodal ones followed by one bubble amplitude per cell face (loop order,
/// measured along the global face normal).
struct LocalOperator {
  MatrixXd shear;  // 2 mu a_mu^h (+ bubble stabilization), or the full matrix for standard
  VectorXd div;    // integral of div over K per local dof (empty for standard)
};

inline LocalOperator local_operator(const PolyMesh& mesh, const MaterialField& mat, int cell, Variant v) {
  const Element e = element_projections(mesh, cell);
  LocalOperator op;
  if (v == Variant::standard) {
    op.shear = stabilized_matrix(e, mat.voigt(cell));
    return op;
  }
  double tau = 0.0;
  const MatrixXd a_mu = stabilized_matrix(e, voigt_stiffness(mat.mu(cell), 0.0), &tau);
  const VectorXd g = e.volume * divergence_row(e);
  if (v == Variant::relax) {
    op.shear = a_mu;
    op.div = g;
    return op;
  }
  // Face bubbles: amplitude b_f of the normal field b_f psi n_f with psi the
  // quadratic edge bubble (integral 2|f|/3). They enter the average strain
  // through the boundary integral and have no linear part.
  const Cell& c = mesh.cell(cell);
  const int n = e.n;
  MatrixXd wc(3, 3 * n), p = MatrixXd::Zero(3 * n, 3 * n);
  wc << e.WC, MatrixXd::Zero(3, n);
  op.div = VectorXd::Zero(3 * n);
  op.div.head(2 * n) = g;
  for (int lf = 0; lf < n; ++lf) {
    const Vec2 nn = c.outward_normal(lf, mesh.faces());
    const double flux = c.signs[lf] * (2.0 / 3.0) * mesh.face(c.faces[lf]).area;
    wc.col(2 * n + lf) = flux / e.volume * Vec3(nn.x() * nn.x(), nn.y() * nn.y(), 2.0 * nn.x() * nn.y());
    op.div[2 * n + lf] = flux;
  }
  p.topLeftCorner(2 * n, 2 * n) = e.NR * e.WR;
  p.topRows(2 * n) += e.NC * wc;
  const MatrixXd ip = MatrixXd::Identity(3 * n, 3 * n) - p;
  const MatrixXd a = e.volume * wc.transpose() * voigt_stiffness(mat.mu(cell), 0.0) * wc + tau * ip.transpose() * ip;
  op.shear = 0.5 * (a + a.transpose());
  return op;
}

/// Element matrix of a relaxed variant in eliminated form: shear + lambda/|K| div div^T.
inline MatrixXd relaxed_element_matrix(const PolyMesh& mesh, const MaterialField& mat, int cell, Variant v) {
  const LocalOperator op = local_operator(mesh, mat, cell, v);
  if (v == Variant::standard) return op.shear;
  return op.shear + (mat.lambda(cell) / mesh.cell(cell).volume) * op.div * op.div.transpose();
}

struct Options {
  Variant variant = Variant::standard;
  bool saddle = false;  // explicit per-cell pressure (relax variants)
};

/// Global dof layout: 2 per node, then bubbles (relax_extra), then pressures (saddle).
struct DofMap {
  int nodes = 0, bubbles = 0, pressures = 0;
  int node(int n, int comp) const { return 2 * n + comp; }
  int bubble(int f) const { return 2 * nodes + f; }
  int pressure(int c) const { return 2 * nodes + bubbles + c; }
  int size() const { return 2 * nodes + bubbles + pressures; }
};

struct System {
  Options options;
  DofMap dofs;
  linalg::SparseMatrix matrix;
  VectorXd rhs;
  std::vector<char> fixed;  // Dirichlet mask
  VectorXd fixed_values;
};

namespace detail {

inline const double gauss3_t[3] = {0.5 - 0.5 * std::sqrt(0.6), 0.5, 0.5 + 0.5 * std::sqrt(0.6)};
inline const double gauss3_w[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

inline std::vector<int> local_dofs(const PolyMesh& mesh, const DofMap& dm, int cell, bool with_bubbles) {
  const Cell& c = mesh.cell(cell);
  std::vector<int> ids;
  for (int nd : c.nodes) {
    ids.push_back(dm.node(nd, 0));
    ids.push_back(dm.node(nd, 1));
  }
  if (with_bubbles)
    for (int f : c.faces) ids.push_back(dm.bubble(f));
  return ids;
}

// Dirichlet values per dof; conflicting prescriptions at shared nodes throw.
inline void collect_dirichlet(const PolyMesh& mesh, const BoundaryConditions& bc, const DofMap& dm,
                              std::vector<char>& fixed, VectorXd& values) {
  fixed.assign(dm.size(), 0);
  values = VectorXd::Zero(dm.size());
  auto pin = [&](int dof, double v, const std::string& what) {
    if (fixed[dof]) {
      const double tol = 1e-12 * std::max({1.0, std::abs(v), std::abs(values[dof])});
      if (std::abs(values[dof] - v) > tol) throw AssemblyError("conflicting Dirichlet values at " + what);
      return;
    }
    fixed[dof] = 1;
    values[dof] = v;
  };
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& face = mesh.face(f);
    if (!face.is_boundary()) continue;
    const SideCondition& sc = bc.at_face(face);
    for (int comp = 0; comp < 2; ++comp) {
      if (!sc.dirichlet(comp)) continue;
      for (int nd : face.nodes) pin(dm.node(nd, comp), sc.value(mesh.node(nd))[comp], "node " + std::to_string(nd));
    }
    if (dm.bubbles == 0) continue;
    const bool pinned = (sc.dirichlet(0) && sc.dirichlet(1)) ||
                        (sc.dirichlet(0) && std::abs(face.normal.y()) < 1e-12) ||
                        (sc.dirichlet(1) && std::abs(face.normal.x()) < 1e-12);
    if (!pinned) continue;
    // amplitude of the quadratic normal bubble matching the nonlinear part of g
    const Vec2 a = mesh.node(face.nodes[0]);
    const Vec2 b = mesh.node(face.nodes[1]);
    const Vec2 ga = sc.value(a), gb = sc.value(b);
    double flux = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double t = gauss3_t[k];
      const Vec2 gl = (1 - t) * ga + t * gb;
      flux += gauss3_w[k] * (sc.value((1 - t) * a + t * b) - gl).dot(face.normal);
    }
    pin(dm.bubble(f), 1.5 * flux, "face " + std::to_string(f));
  }
}

}  // namespace detail

/// Global system for -div sigma = f with the given boundary conditions.
inline System assemble(const PolyMesh& mesh, const MaterialField& mat, const VectorField& body_force,
                       const BoundaryConditions& bc, const Options& opt = {}) {
  if (mat.size() != mesh.num_cells()) throw ParameterError("material size does not match the mesh");
  const Variant v = opt.variant;
  const bool extra = v == Variant::relax_extra;
  const bool saddle = opt.saddle && v != Variant::standard;
  System sys;
  sys.options = opt;
  sys.dofs.nodes = mesh.num_nodes();
  sys.dofs.bubbles = extra ? mesh.num_faces() : 0;
  sys.dofs.pressures = saddle ? mesh.num_cells() : 0;
  const DofMap& dm = sys.dofs;
  if (saddle)
    for (int c = 0; c < mesh.num_cells(); ++c)
      if (!(mat.lambda(c) > 0.0)) throw ParameterError("saddle form needs lambda > 0 in every cell");

  linalg::TripletBuilder tb(dm.size(), dm.size());
  sys.rhs = VectorXd::Zero(dm.size());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Cell& cell = mesh.cell(c);
    const auto ids = detail::local_dofs(mesh, dm, c, extra);
    const LocalOperator op = local_operator(mesh, mat, c, v);
    if (v == Variant::standard || !saddle) {
      MatrixXd a = op.shear;
      if (v != Variant::standard) a += (mat.lambda(c) / cell.volume) * op.div * op.div.transpose();
      tb.add_block(ids, ids, 0.5 * (a + a.transpose()));
    } else {
      tb.add_block(ids, ids, op.shear);
      const int p = dm.pressure(c);
      for (std::size_t k = 0; k < ids.size(); ++k) {
        tb.add(ids[k], p, op.div[k]);
        tb.add(p, ids[k], op.div[k]);
      }
      tb.add(p, p, -cell.volume / mat.lambda(c));
    }
    const Vec2 load = body_force(cell.centroid) * cell.volume / cell.size();
    for (int nd : cell.nodes) {
      sys.rhs[dm.node(nd, 0)] += load.x();
      sys.rhs[dm.node(nd, 1)] += load.y();
    }
    if (extra) {
      // integral of a face bubble over K taken as |K| |f| / |dK|; exact for
      // the quadratic edge bubble on triangles
      double perimeter = 0.0;
      for (int f : cell.faces) perimeter += mesh.face(f).area;
      const Vec2 fk = body_force(cell.centroid) * cell.volume / perimeter;
      for (int f : cell.faces) sys.rhs[dm.bubble(f)] += mesh.face(f).area * fk.dot(mesh.face(f).normal);
    }
  }

  // tractions on Neumann components
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& face = mesh.face(f);
    if (!face.is_boundary()) continue;
    const SideCondition& sc = bc.at_face(face);
    if (!sc.any_neumann()) continue;
    const Vec2 a = mesh.node(face.nodes[0]);
    const Vec2 b = mesh.node(face.nodes[1]);
    Vec2 total = Vec2::Zero();
    double bubble_load = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double t = detail::gauss3_t[k];
      Vec2 tr = sc.value((1 - t) * a + t * b);
      for (int comp = 0; comp < 2; ++comp)
        if (sc.dirichlet(comp)) tr[comp] = 0.0;
      total += detail::gauss3_w[k] * face.area * tr;
      bubble_load += detail::gauss3_w[k] * face.area * 4 * t * (1 - t) * tr.dot(face.normal);
    }
    for (int nd : face.nodes) {
      sys.rhs[dm.node(nd, 0)] += 0.5 * total.x();
      sys.rhs[dm.node(nd, 1)] += 0.5 * total.y();
    }
    if (extra) sys.rhs[dm.bubble(f)] += bubble_load;
  }

  linalg::SparseMatrix a = tb.build();
  detail::collect_dirichlet(mesh, bc, dm, sys.fixed, sys.fixed_values);
  sys.rhs -= a * sys.fixed_values;
  a.prune([&](const int& i, const int& j, const double&) { return !sys.fixed[i] && !sys.fixed[j]; });
  linalg::TripletBuilder diag(dm.size(), dm.size());
  for (int d = 0; d < dm.size(); ++d)
    if (sys.fixed[d]) {
      diag.add(d, d, 1.0);
      sys.rhs[d] = sys.fixed_values[d];
    }
  sys.matrix = a + diag.build();
  return sys;
}

struct Solution {
  Variant variant = Variant::standard;
  VectorXd nodal;     // 2 per node
  VectorXd bubbles;   // per face (relax_extra) or empty
  VectorXd pressure;  // per cell (saddle) or empty
  std::vector<double> divergence;  // cell-average divergence
  std::vector<Vec3> stress;        // Voigt [s11, s22, s12] per cell
  linalg::SolveReport report;

  Vec2 displacement(int node) const { return {nodal[2 * node], nodal[2 * node + 1]}; }
};

/// Cell-average divergence (1/|K|) int_{dK} u.n with u linear on edges plus
/// the bubble fluxes when present.
inline std::vector<double> discrete_divergence(const PolyMesh& mesh, const VectorXd& nodal,
                                               const VectorXd& bubbles = {}) {
  std::vector<double> div(mesh.num_cells(), 0.0);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Cell& cell = mesh.cell(c);
    const int n = cell.size();
    double flux = 0.0;
    for (int lf = 0; lf < n; ++lf) {
      const Face& f = mesh.face(cell.faces[lf]);
      const int a = cell.nodes[lf], b = cell.nodes[(lf + 1) % n];
      const Vec2 ua(nodal[2 * a], nodal[2 * a + 1]);
      const Vec2 ub(nodal[2 * b], nodal[2 * b + 1]);
      flux += 0.5 * f.area * (ua + ub).dot(cell.outward_normal(lf, mesh.faces()));
      if (bubbles.size()) flux += cell.signs[lf] * (2.0 / 3.0) * f.area * bubbles[cell.faces[lf]];
    }
    div[c] = flux / cell.volume;
  }
  return div;
}

/// Cell stress 2 mu eps_K + lambda div_K I, with eps_K = W_C u the projected
/// strain. For the standard variant div_K = tr(eps_K) and this equals D W_C u.
inline std::vector<Vec3> recover_stress(const PolyMesh& mesh, const MaterialField& mat, const VectorXd& nodal,
                                        const std::vector<double>& divergence) {
  std::vector<Vec3> out(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Element e = element_projections(mesh, c);
    VectorXd local(2 * e.n);
    for (int i = 0; i < e.n; ++i) {
      const int nd = mesh.cell(c).nodes[i];
      local[2 * i] = nodal[2 * nd];
      local[2 * i + 1] = nodal[2 * nd + 1];
    }
    const Vec3 eps = e.WC * local;
    const double mu = mat.mu(c), lam = mat.lambda(c);
    out[c] = Vec3(2 * mu * eps[0] + lam * divergence[c], 2 * mu * eps[1] + lam * divergence[c], mu * eps[2]);
  }
  return out;
}

inline std::vector<Vec3> recover_stress(const PolyMesh& mesh, const MaterialField& mat, const VectorXd& nodal) {
  return recover_stress(mesh, mat, nodal, discrete_divergence(mesh, nodal));
}

inline Solution solve(const PolyMesh& mesh, const MaterialField& mat, const VectorField& body_force,
                      const BoundaryConditions& bc, const Options& opt = {}) {
  const System sys = assemble(mesh, mat, body_force, bc, opt);
  Solution sol;
  sol.variant = opt.variant;
  const bool saddle = sys.dofs.pressures > 0;
  const VectorXd x = saddle ? linalg::solve_general(sys.matrix, sys.rhs, &sol.report)
                            : linalg::solve_spd(sys.matrix, sys.rhs, &sol.report);
  sol.nodal = x.head(2 * sys.dofs.nodes);
  if (sys.dofs.bubbles) sol.bubbles = x.segment(2 * sys.dofs.nodes, sys.dofs.bubbles);
  if (saddle) sol.pressure = x.tail(sys.dofs.pressures);
  sol.divergence = discrete_divergence(mesh, sol.nodal, sol.bubbles);
  sol.stress = recover_stress(mesh, mat, sol.nodal, sol.divergence);
  return sol;
}

}  // namespace polyelast::vem
