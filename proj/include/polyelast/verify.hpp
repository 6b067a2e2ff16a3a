#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "polyelast/boundary.hpp"
#include "polyelast/material.hpp"
#include "polyelast/mesh.hpp"
#include "polyelast/meshgen.hpp"
#include "polyelast/mpsa.hpp"
#include "polyelast/vem.hpp"

namespace polyelast::verify {

/// Displacement field with closed-form gradient; stress and divergence
/// follow from the isotropic law with the stored Lamé pair.
class ExactSolution {
 public:
  ExactSolution(double mu, double lambda) : mu_(mu), lambda_(lambda) {}
  virtual ~ExactSolution() = default;

  virtual Vec2 displacement(const Vec2& x) const = 0;
  /// G(i, j) = d u_i / d x_j
  virtual Mat2 gradient(const Vec2& x) const = 0;
  /// f with -div sigma(u) = f.
  virtual Vec2 body_force(const Vec2& x) const = 0;

  double mu() const { return mu_; }
  double lambda() const { return lambda_; }
  double divergence(const Vec2& x) const { return gradient(x).trace(); }
  Mat2 stress(const Vec2& x) const {
    const Mat2 g = gradient(x);
    return isotropic_stress(mu_, lambda_, 0.5 * (g + g.transpose()));
  }
  Vec3 voigt_stress(const Vec2& x) const {
    const Mat2 s = stress(x);
    return {s(0, 0), s(1, 1), s(0, 1)};
  }

  VectorField displacement_field() const {
    return [this](const Vec2& x) { return displacement(x); };
  }
  VectorField force_field() const {
    return [this](const Vec2& x) { return body_force(x); };
  }

 private:
  double mu_, lambda_;
};

/// u1 = x(1-x) sin(2 pi y), u2 = sin(2 pi x) sin(2 pi y) on the unit square.
class Manufactured final : public ExactSolution {
 public:
  using ExactSolution::ExactSolution;

  Vec2 displacement(const Vec2& p) const override {
    const double x = p.x(), y = p.y();
    return {x * (1 - x) * std::sin(tp * y), std::sin(tp * x) * std::sin(tp * y)};
  }

  Mat2 gradient(const Vec2& p) const override {
    const double x = p.x(), y = p.y();
    const double sx = std::sin(tp * x), cx = std::cos(tp * x), sy = std::sin(tp * y), cy = std::cos(tp * y);
    Mat2 g;
    g << (1 - 2 * x) * sy, tp * x * (1 - x) * cy,
         tp * cx * sy, tp * sx * cy;
    return g;
  }

  Vec2 body_force(const Vec2& p) const override {
    const double x = p.x(), y = p.y();
    const double sx = std::sin(tp * x), cx = std::cos(tp * x), sy = std::sin(tp * y), cy = std::cos(tp * y);
    const double u1xx = -2 * sy;
    const double u1xy = tp * (1 - 2 * x) * cy;
    const double u1yy = -tp * tp * x * (1 - x) * sy;
    const double u2xx = -tp * tp * sx * sy;
    const double u2xy = tp * tp * cx * cy;
    const double u2yy = -tp * tp * sx * sy;
    const double mu = this->mu(), lam = lambda();
    const double div1 = 2 * mu * u1xx + lam * (u1xx + u2xy) + mu * (u1yy + u2xy);
    const double div2 = mu * (u1xy + u2xx) + 2 * mu * u2yy + lam * (u1xy + u2yy);
    return {-div1, -div2};
  }

 private:
  static constexpr double tp = 2.0 * std::numbers::pi;
};

/// u = a + B x, zero body force.
class Linear final : public ExactSolution {
 public:
  Linear(double mu, double lambda, Vec2 a, Mat2 b) : ExactSolution(mu, lambda), a_(a), b_(b) {}
  Vec2 displacement(const Vec2& x) const override { return a_ + b_ * x; }
  Mat2 gradient(const Vec2&) const override { return b_; }
  Vec2 body_force(const Vec2&) const override { return Vec2::Zero(); }

 private:
  Vec2 a_;
  Mat2 b_;
};

/// Piecewise-linear interpolant of nodal values on an untwisted
/// `triangular(n, n)` grid; stands in for an exact solution when none exists.
class TriangularInterpolant final : public ExactSolution {
 public:
  TriangularInterpolant(double mu, double lambda, int n, Eigen::VectorXd nodal)
      : ExactSolution(mu, lambda), n_(n), nodal_(std::move(nodal)) {}

  Vec2 displacement(const Vec2& x) const override {
    const auto [ids, bary] = locate(x);
    Vec2 u = Vec2::Zero();
    for (int k = 0; k < 3; ++k) u += bary[k] * value(ids[k]);
    return u;
  }

  Mat2 gradient(const Vec2& x) const override {
    const auto [ids, bary] = locate(x);
    const Vec2 p0 = point(ids[0]), p1 = point(ids[1]), p2 = point(ids[2]);
    Mat2 e;
    e.col(0) = p1 - p0;
    e.col(1) = p2 - p0;
    Mat2 du;
    du.col(0) = value(ids[1]) - value(ids[0]);
    du.col(1) = value(ids[2]) - value(ids[0]);
    return du * e.inverse();
  }

  Vec2 body_force(const Vec2&) const override { return Vec2::Zero(); }

 private:
  Vec2 point(int id) const { return {static_cast<double>(id % (n_ + 1)) / n_, static_cast<double>(id / (n_ + 1)) / n_}; }
  Vec2 value(int id) const { return {nodal_[2 * id], nodal_[2 * id + 1]}; }

  std::pair<std::array<int, 3>, std::array<double, 3>> locate(const Vec2& x) const {
    const double fx = std::clamp(x.x(), 0.0, 1.0) * n_, fy = std::clamp(x.y(), 0.0, 1.0) * n_;
    const int i = std::min(static_cast<int>(fx), n_ - 1), j = std::min(static_cast<int>(fy), n_ - 1);
    const double s = fx - i, t = fy - j;
    const int a = j * (n_ + 1) + i, b = a + 1, c = b + n_ + 1, d = a + n_ + 1;
    // same diagonal pattern as meshgen::triangular
    if ((i + j) % 2 == 0) {
      if (s >= t) return {{a, b, c}, {1 - s, s - t, t}};
      return {{a, c, d}, {1 - t, s, t - s}};
    }
    if (s + t <= 1) return {{a, b, d}, {1 - s - t, s, t}};
    return {{b, c, d}, {1 - t, s + t - 1, 1 - s}};
  }

  int n_;
  Eigen::VectorXd nodal_;
};

enum class Method { vem, vem_relax, vem_relax_extra, mpsa, mpsa_relax_extra };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::vem: return "vem";
    case Method::vem_relax: return "vem-relax";
    case Method::vem_relax_extra: return "vem-relax-extra";
    case Method::mpsa: return "mpsa";
    case Method::mpsa_relax_extra: return "mpsa-relax-extra";
  }
  return "?";
}

inline std::vector<Method> all_methods() {
  return {Method::vem, Method::vem_relax, Method::vem_relax_extra, Method::mpsa, Method::mpsa_relax_extra};
}

inline Method parse_method(const std::string& s) {
  for (Method m : all_methods())
    if (s == to_string(m)) return m;
  throw ParameterError("unknown method '" + s + "'");
}

inline bool is_vem(Method m) { return m == Method::vem || m == Method::vem_relax || m == Method::vem_relax_extra; }

inline std::string family_of(Method m) { return is_vem(m) ? "vem" : "mpsa"; }

inline std::string variant_of(Method m) {
  switch (m) {
    case Method::vem:
    case Method::mpsa: return "standard";
    case Method::vem_relax: return "relax";
    default: return "relax-extra";
  }
}

inline vem::Variant vem_variant(Method m) {
  return m == Method::vem ? vem::Variant::standard : m == Method::vem_relax ? vem::Variant::relax : vem::Variant::relax_extra;
}

inline mpsa::Variant mpsa_variant(Method m) {
  return m == Method::mpsa ? mpsa::Variant::standard : mpsa::Variant::relax_extra;
}

struct ErrorReport {
  std::string case_id;
  std::string method;   // vem | mpsa
  std::string variant;  // standard | relax | relax-extra
  std::string grid;
  double h = 0.0;
  int dofs = 0;
  double l2_u = 0.0, linf_u = 0.0;
  double l2_div = 0.0, linf_div = 0.0;
  double l2_stress = 0.0, linf_stress = 0.0;
  std::string stress_convention;  // vem-cellwise-stress | mpsa-face-force
  std::uint64_t seed = 0;
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

inline double tensor_norm(const Vec3& voigt) {
  return std::sqrt(voigt[0] * voigt[0] + voigt[1] * voigt[1] + 2 * voigt[2] * voigt[2]);
}

/// Tributary node weights: each cell gives |K|/n_K to each of its nodes.
inline std::vector<double> tributary_weights(const PolyMesh& mesh) {
  std::vector<double> w(mesh.num_nodes(), 0.0);
  for (const Cell& c : mesh.cells())
    for (int n : c.nodes) w[n] += c.volume / c.size();
  return w;
}

namespace detail {

inline void divergence_errors(const PolyMesh& mesh, const ExactSolution& exact, const std::vector<double>& div,
                              ErrorReport& r) {
  double l2 = 0.0, linf = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const double e = std::abs(div[c] - exact.divergence(mesh.cell(c).centroid));
    l2 += mesh.cell(c).volume * e * e;
    linf = std::max(linf, e);
  }
  r.l2_div = std::sqrt(l2);
  r.linf_div = linf;
}

}  // namespace detail

/// Nodal displacement, cell divergence and cellwise stress errors.
inline ErrorReport error_norms(const PolyMesh& mesh, const ExactSolution& exact, const vem::Solution& sol) {
  ErrorReport r;
  r.method = "vem";
  r.stress_convention = "vem-cellwise-stress";
  r.h = max_cell_diameter(mesh);
  r.dofs = static_cast<int>(sol.nodal.size() + sol.bubbles.size() + sol.pressure.size());
  const auto w = tributary_weights(mesh);
  double l2 = 0.0, linf = 0.0;
  for (int n = 0; n < mesh.num_nodes(); ++n) {
    const double e = (sol.displacement(n) - exact.displacement(mesh.node(n))).norm();
    l2 += w[n] * e * e;
    linf = std::max(linf, e);
  }
  r.l2_u = std::sqrt(l2);
  r.linf_u = linf;
  detail::divergence_errors(mesh, exact, sol.divergence, r);
  l2 = linf = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const double e = tensor_norm(sol.stress[c] - exact.voigt_stress(mesh.cell(c).centroid));
    l2 += mesh.cell(c).volume * e * e;
    linf = std::max(linf, e);
  }
  r.l2_stress = std::sqrt(l2);
  r.linf_stress = linf;
  return r;
}

/// Cell-centre displacement, cell divergence and face traction errors (exact
/// traction taken at the face midpoint).
inline ErrorReport error_norms(const PolyMesh& mesh, const ExactSolution& exact, const mpsa::Solution& sol) {
  ErrorReport r;
  r.method = "mpsa";
  r.stress_convention = "mpsa-face-force";
  r.h = max_cell_diameter(mesh);
  r.dofs = static_cast<int>(sol.cell_displacement.size() + sol.pressure.size());
  r.status = sol.status;
  if (!sol.ok()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.l2_u = r.linf_u = r.l2_div = r.linf_div = r.l2_stress = r.linf_stress = nan;
    return r;
  }
  double l2 = 0.0, linf = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const double e = (sol.displacement(c) - exact.displacement(mesh.cell(c).centroid)).norm();
    l2 += mesh.cell(c).volume * e * e;
    linf = std::max(linf, e);
  }
  r.l2_u = std::sqrt(l2);
  r.linf_u = linf;
  detail::divergence_errors(mesh, exact, sol.divergence, r);
  l2 = linf = 0.0;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& face = mesh.face(f);
    const Vec2 t = exact.stress(face.centroid) * face.normal;
    const double e = (sol.face_force[f] / face.area - t).norm();
    l2 += face.area * e * e;
    linf = std::max(linf, e);
  }
  r.l2_stress = std::sqrt(l2);
  r.linf_stress = linf;
  return r;
}

/// Body force, boundary conditions and (optionally) the exact solution.
struct Problem {
  VectorField body_force;
  BoundaryConditions bc;
  std::shared_ptr<const ExactSolution> exact;
};

inline Problem manufactured_problem(double mu, double lambda) {
  auto exact = std::make_shared<Manufactured>(mu, lambda);
  return {exact->force_field(), BoundaryConditions::dirichlet_all(exact->displacement_field()), exact};
}

struct RunOptions {
  bool saddle = false;
  std::set<int> fracture_faces;
};

/// Result of one method on one mesh.
struct MethodRun {
  Method method = Method::vem;
  ErrorReport report;
  std::optional<vem::Solution> vem;
  std::optional<mpsa::Solution> mpsa;
  std::optional<mpsa::Weights> weights;
};

inline MethodRun run_method(const PolyMesh& mesh, const MaterialField& mat, const Problem& prob, Method m,
                            const RunOptions& opt = {}) {
  MethodRun run;
  run.method = m;
  if (is_vem(m)) {
    if (!opt.fracture_faces.empty()) throw ParameterError("fracture faces are only supported by MPSA");
    try {
      run.vem = vem::solve(mesh, mat, prob.body_force, prob.bc, {vem_variant(m), opt.saddle});
      if (prob.exact) {
        run.report = error_norms(mesh, *prob.exact, *run.vem);
      } else {
        run.report.method = "vem";
        run.report.stress_convention = "vem-cellwise-stress";
        run.report.h = max_cell_diameter(mesh);
      }
    } catch (const SolverError&) {
      run.report.method = "vem";
      run.report.status = "failed:solver";
    }
  } else {
    mpsa::Options o;
    o.variant = mpsa_variant(m);
    o.fracture_faces = opt.fracture_faces;
    run.weights = mpsa::compute_weights(mesh, mat, prob.bc, o);
    run.mpsa = mpsa::solve(mesh, mat, prob.body_force, *run.weights);
    if (prob.exact) {
      run.report = error_norms(mesh, *prob.exact, *run.mpsa);
    } else {
      run.report.method = "mpsa";
      run.report.stress_convention = "mpsa-face-force";
      run.report.status = run.mpsa->status;
      run.report.h = max_cell_diameter(mesh);
    }
  }
  run.report.variant = variant_of(m);
  return run;
}

/// Least-squares slope of log(error) against log(h) over finite positive samples.
inline double fitted_rate(const std::vector<double>& h, const std::vector<double>& err) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(err[i] > 0.0) || !std::isfinite(err[i]) || !(h[i] > 0.0)) continue;
    const double x = std::log(h[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const double den = n * sxx - sx * sx;
  if (std::abs(den) < 1e-300) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / den;
}

// --------------------------------------------------------------------------
// Cases

inline const std::vector<std::string>& case_ids() {
  static const std::vector<std::string> ids{"1", "2a", "2b", "2c", "3", "4a", "4b", "4c", "5a", "5b", "5c", "6a", "6b", "6c"};
  return ids;
}

/// Parameters of one case run. `level` is the base resolution n; `parameter`
/// is the case-specific knob (refinement ratio, layer width factor, ...);
/// negative means the case default.
struct CaseConfig {
  std::string id = "1";
  int level = 8;
  double parameter = -1.0;
  int layer_refinement = -1;
  std::uint64_t seed = 0;
  double perturb = 0.1;
  double mu = 1.0;
  double nu = -1.0;  // case default when negative
};

inline void check_case_id(const std::string& id) {
  for (const auto& c : case_ids())
    if (c == id) return;
  throw ParameterError("unknown case id '" + id + "'");
}

inline double case_default_parameter(const std::string& id) {
  if (id == "2b" || id == "2c") return 7.0;
  if (id == "3") return 5.0;
  if (id == "4a" || id == "4b") return 10.0;
  if (id == "4c") return 20.0;
  if (id == "5a" || id == "5b" || id == "5c") return 20.0;
  return 0.0;
}

inline double case_default_nu(const std::string& id) { return id[0] == '6' ? 0.495 : 0.3; }

/// Grid of a case at resolution n.
inline meshgen::GridSpec case_grid(const CaseConfig& cfg) {
  check_case_id(cfg.id);
  const std::string& id = cfg.id;
  const int n = cfg.level;
  const double param = cfg.parameter >= 0 ? cfg.parameter : case_default_parameter(id);
  meshgen::GridSpec g;
  g.nx = g.ny = n;
  g.rng_seed = cfg.seed;
  if (id == "1") {
    g.twist = true;
    g.perturb_amplitude = cfg.perturb;
  } else if (id == "2a") {
    g.family = meshgen::Family::mixed;
  } else if (id == "2b" || id == "2c") {
    // cells of aspect ratio `param` on the unit square
    g.family = id == "2b" ? meshgen::Family::hexagonal : meshgen::Family::triangular;
    g.ny = static_cast<int>(std::lround(param * n));
  } else if (id == "3") {
    g.ny = static_cast<int>(std::lround(param * n));
    g.twist = true;
  } else if (id == "4a" || id == "4b") {
    g.family = meshgen::Family::two_region;
    g.refinement_factor = static_cast<int>(std::lround(param));
    g.refine_mode = id == "4a" ? meshgen::RefineMode::both : meshgen::RefineMode::y_only;
  } else if (id == "4c") {
    g.family = meshgen::Family::interface_nodes;
    g.extra_interface_nodes = static_cast<int>(std::lround(param));
  } else if (id[0] == '5') {
    g.family = meshgen::Family::layer;
    g.nx = n % 2 ? n : n + 1;  // odd column count centres the layer
    g.layer_width_factor = param;
    g.refinement_factor = id == "5a" ? 1 : (cfg.layer_refinement > 0 ? cfg.layer_refinement : 10);
    g.twist = id == "5c";
  } else if (id == "6a") {
    g.family = meshgen::Family::hexagonal;
    g.twist = true;
  } else if (id == "6b") {
    g.family = meshgen::Family::triangular;
    g.twist = true;
  } else if (id == "6c") {
    g.twist = true;
  }
  return g;
}

/// x-coordinate of the interface line whose force profile a case reports, if any.
inline std::optional<double> case_interface(const std::string& id, const meshgen::GridSpec& g) {
  if (id == "4a" || id == "4b") return 0.5;
  if (id == "4c") return meshgen::interface_x(g.nx);
  if (id == "5a" || id == "5b") return meshgen::layer_interface_x(g.nx, g.layer_width_factor);
  return std::nullopt;
}

/// Overkill reference for Case 6: VEM-relax-extra on the untwisted
/// triangular(n, n) grid.
inline std::shared_ptr<const ExactSolution> locking_reference(int n, double mu, double nu) {
  const PolyMesh mesh = meshgen::triangular(n, n);
  const double lambda = lambda_from_poisson(mu, nu);
  const auto mat = MaterialField::uniform(mesh.num_cells(), mu, lambda);
  const VectorField f = [](const Vec2&) { return Vec2(0.0, -1.0); };
  const vem::Solution sol = vem::solve(mesh, mat, f, BoundaryConditions::clamped_sides(), {vem::Variant::relax_extra});
  return std::make_shared<TriangularInterpolant>(mu, lambda, n, sol.nodal);
}

/// Relative L2 distance between two references sampled at the nodes of triangular(n, n).
inline double reference_difference(const ExactSolution& a, const ExactSolution& b, int n) {
  const PolyMesh mesh = meshgen::triangular(n, n);
  const auto w = tributary_weights(mesh);
  double num = 0, den = 0;
  for (int k = 0; k < mesh.num_nodes(); ++k) {
    const Vec2& x = mesh.node(k);
    num += w[k] * (a.displacement(x) - b.displacement(x)).squaredNorm();
    den += w[k] * b.displacement(x).squaredNorm();
  }
  return std::sqrt(num / den);
}

struct InterfaceSample {
  int face = -1;
  double arclength = 0.0;
  Vec2 force = Vec2::Zero();  // traction on the +x normal, per unit length
  Vec2 exact = Vec2::Zero();
};

/// Faces on the vertical line x = xi, sorted by height.
inline std::vector<int> interface_faces(const PolyMesh& mesh, double xi) {
  std::vector<int> faces;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& face = mesh.face(f);
    if (face.is_boundary()) continue;
    const Vec2& a = mesh.node(face.nodes[0]);
    const Vec2& b = mesh.node(face.nodes[1]);
    if (std::abs(a.x() - xi) < 1e-9 && std::abs(b.x() - xi) < 1e-9) faces.push_back(f);
  }
  std::sort(faces.begin(), faces.end(), [&](int p, int q) { return mesh.face(p).centroid.y() < mesh.face(q).centroid.y(); });
  return faces;
}

/// Traction profile along x = xi seen from the cells on the right of the line.
/// VEM uses the right cell's stress times +x; MPSA the right cell's face force.
inline std::vector<InterfaceSample> interface_profile(const PolyMesh& mesh, const MethodRun& run, double xi,
                                                      const ExactSolution* exact) {
  std::vector<InterfaceSample> out;
  const Vec2 ex(1.0, 0.0);
  std::vector<std::array<Vec2, 2>> both;
  if (run.mpsa && run.mpsa->ok()) both = mpsa::face_forces_both_sides(mesh, *run.weights, run.mpsa->state);
  for (int f : interface_faces(mesh, xi)) {
    const Face& face = mesh.face(f);
    const int side = mesh.cell(face.cells[0]).centroid.x() > xi ? 0 : 1;
    const int right = face.cells[side];
    InterfaceSample s;
    s.face = f;
    s.arclength = face.centroid.y();
    if (run.vem) {
      const Vec3& v = run.vem->stress[right];
      s.force = Vec2(v[0], v[2]);
    } else if (!both.empty()) {
      s.force = -both[f][side] / face.area;
    } else {
      s.force = Vec2::Constant(std::numeric_limits<double>::quiet_NaN());
    }
    if (exact) s.exact = exact->stress(face.centroid) * ex;
    out.push_back(s);
  }
  return out;
}

inline double total_variation_x(const std::vector<InterfaceSample>& p) {
  double tv = 0.0;
  for (std::size_t i = 1; i < p.size(); ++i) tv += std::abs(p[i].force.x() - p[i - 1].force.x());
  return tv;
}

struct CaseResult {
  CaseConfig config;
  meshgen::GridSpec grid;
  PolyMesh mesh;
  std::vector<MethodRun> runs;
  std::optional<double> interface_x;
  std::shared_ptr<const ExactSolution> exact;
};

/// Drives grid generation, assembly, solve and norms for one case level.
inline CaseResult run_case(const CaseConfig& cfg, const std::vector<Method>& methods,
                           std::shared_ptr<const ExactSolution> reference = nullptr) {
  CaseResult res;
  res.config = cfg;
  res.grid = case_grid(cfg);
  res.mesh = meshgen::generate(res.grid);
  const double nu = cfg.nu >= 0 ? cfg.nu : case_default_nu(cfg.id);
  const double lambda = lambda_from_poisson(cfg.mu, nu);
  const auto mat = MaterialField::uniform(res.mesh.num_cells(), cfg.mu, lambda);
  Problem prob;
  if (cfg.id[0] == '6') {
    prob.body_force = [](const Vec2&) { return Vec2(0.0, -1.0); };
    prob.bc = BoundaryConditions::clamped_sides();
    prob.exact = reference ? reference : locking_reference(4 * cfg.level, cfg.mu, nu);
  } else {
    prob = manufactured_problem(cfg.mu, lambda);
  }
  res.exact = prob.exact;
  res.interface_x = case_interface(cfg.id, res.grid);
  for (Method m : methods) {
    MethodRun run = run_method(res.mesh, mat, prob, m);
    run.report.case_id = cfg.id;
    run.report.grid = res.grid.to_key_values();
    run.report.seed = cfg.seed;
    res.runs.push_back(std::move(run));
  }
  return res;
}

struct StudyResult {
  std::vector<ErrorReport> reports;  // level-major, method-minor
  std::vector<Method> methods;
  /// rates[method] = {l2_u, l2_div, linf_u, linf_div}
  std::vector<std::array<double, 4>> rates;
};

inline StudyResult convergence_study(CaseConfig cfg, const std::vector<int>& levels, const std::vector<Method>& methods) {
  if (levels.size() < 3) throw ParameterError("a convergence study needs at least 3 levels");
  StudyResult out;
  out.methods = methods;
  for (int n : levels) {
    cfg.level = n;
    CaseResult r = run_case(cfg, methods);
    for (auto& run : r.runs) out.reports.push_back(run.report);
  }
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    std::vector<double> h, a, b, c, d;
    for (std::size_t li = 0; li < levels.size(); ++li) {
      const ErrorReport& rep = out.reports[li * methods.size() + mi];
      if (!rep.ok()) continue;
      h.push_back(rep.h);
      a.push_back(rep.l2_u);
      b.push_back(rep.l2_div);
      c.push_back(rep.linf_u);
      d.push_back(rep.linf_div);
    }
    out.rates.push_back({fitted_rate(h, a), fitted_rate(h, b), fitted_rate(h, c), fitted_rate(h, d)});
  }
  return out;
}

}  // namespace polyelast::verify
