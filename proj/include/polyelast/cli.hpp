#pragma once

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "polyelast/boundary.hpp"
#include "polyelast/material.hpp"
#include "polyelast/mesh_io.hpp"
#include "polyelast/meshgen.hpp"
#include "polyelast/output.hpp"
#include "polyelast/verify.hpp"

namespace polyelast::cli {

enum ExitCode { ok = 0, numerical_failure = 1, usage_error = 2 };

struct RunConfig {
  // grid
  std::string family = "cartesian";
  int nx = 4, ny = 4;
  bool twist = false;
  double perturb = 0.0;
  std::uint64_t seed = 0;
  double aspect = 1.0;
  int refinement = 1;
  std::string mode = "both";
  double width_factor = 1.0;
  int layer_refinement = 1;
  int extra_nodes = 0;
  std::string mesh_file;
  // problem
  std::string method = "vem";
  double mu = 1.0, nu = 0.3;
  bool nu_set = false;
  std::string material_file;
  std::string bc = "dirichlet-all";
  std::string fracture_file;
  bool saddle = false;
  // case / study
  std::string case_id;
  std::string levels;
  int level = 0;
  double parameter = -1.0;
  // output
  std::string out;
  std::string vtk;
  std::string profile;
};

inline meshgen::GridSpec grid_spec(const RunConfig& c) {
  meshgen::GridSpec g;
  g.family = meshgen::parse_family(c.family);
  g.nx = c.nx;
  g.ny = c.ny;
  g.twist = c.twist;
  g.perturb_amplitude = c.perturb;
  g.aspect_ratio = c.aspect;
  g.refinement_factor = g.family == meshgen::Family::layer ? c.layer_refinement : c.refinement;
  if (c.mode == "both")
    g.refine_mode = meshgen::RefineMode::both;
  else if (c.mode == "y-only")
    g.refine_mode = meshgen::RefineMode::y_only;
  else
    throw ParameterError("unknown refinement mode '" + c.mode + "'");
  g.layer_width_factor = c.width_factor;
  g.extra_interface_nodes = c.extra_nodes;
  g.rng_seed = c.seed;
  g.validate();
  return g;
}

inline std::vector<verify::Method> parse_methods(const std::string& s) {
  if (s == "all") return verify::all_methods();
  std::vector<verify::Method> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(verify::parse_method(item));
  if (out.empty()) throw ParameterError("no method given");
  return out;
}

/// "N" -> N levels 4, 8, ..., 4*2^(N-1); "a..b" -> refinement factors
/// a, 2a, 4a, ... <= b of a base resolution of 4 cells.
inline std::vector<int> parse_levels(const std::string& s) {
  std::vector<int> out;
  const auto dots = s.find("..");
  try {
    if (dots == std::string::npos) {
      const int n = std::stoi(s);
      if (n < 1 || n > 12) throw ParameterError("level count must lie in [1, 12]");
      for (int k = 0; k < n; ++k) out.push_back(4 << k);
    } else {
      const int a = std::stoi(s.substr(0, dots)), b = std::stoi(s.substr(dots + 2));
      if (a < 1 || b < a) throw ParameterError("bad level range '" + s + "'");
      for (int r = a; r <= b; r *= 2) out.push_back(4 * r);
    }
  } catch (const std::logic_error&) {
    throw ParameterError("cannot parse levels '" + s + "'");
  }
  return out;
}

inline std::set<int> read_face_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open fracture face file '" + path + "'");
  std::set<int> faces;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    faces.insert(std::stoi(line));
  }
  return faces;
}

/// Output stream: the file named by `path`, or `fallback` when empty.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw ParameterError("cannot write '" + path + "'");
    }
    os_ = file_ ? file_.get() : &fallback;
  }
  std::ostream& operator*() { return *os_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_;
};

inline io::Metadata echo(const std::string& command, const RunConfig& c) {
  io::Metadata m{{"command", command}};
  if (!c.case_id.empty()) m.emplace_back("case", c.case_id);
  if (c.mesh_file.empty() && c.case_id.empty()) m.emplace_back("grid", grid_spec(c).to_key_values());
  if (!c.mesh_file.empty()) m.emplace_back("mesh_file", c.mesh_file);
  m.emplace_back("seed", std::to_string(c.seed));
  if (command != "mesh") {
    m.emplace_back("method", c.method);
    if (c.material_file.empty()) {
      m.emplace_back("mu", io::format_double(c.mu));
      if (c.case_id.empty() || c.nu_set) m.emplace_back("nu", io::format_double(c.nu));
    } else {
      m.emplace_back("material", c.material_file);
    }
    if (command == "solve") m.emplace_back("bc", c.bc);
    if (c.saddle) m.emplace_back("saddle", "1");
  }
  if (!c.levels.empty()) m.emplace_back("levels", c.levels);
  if (c.level > 0) m.emplace_back("level", std::to_string(c.level));
  if (c.parameter >= 0) m.emplace_back("parameter", io::format_double(c.parameter));
  return m;
}

inline int cmd_mesh(const RunConfig& c, std::ostream& out) {
  const PolyMesh mesh = meshgen::generate(grid_spec(c));
  Sink sink(c.out, out);
  std::vector<std::string> meta{std::string("version=") + io::version};
  for (const auto& [k, v] : echo("mesh", c)) meta.push_back(k + "=" + v);
  io::write_mesh(*sink, mesh, meta);
  return ok;
}

inline int cmd_solve(const RunConfig& c, std::ostream& out) {
  const PolyMesh mesh = c.mesh_file.empty() ? meshgen::generate(grid_spec(c)) : io::read_mesh_file(c.mesh_file);
  const MaterialField mat = c.material_file.empty() ? MaterialField::from_poisson(mesh.num_cells(), c.mu, c.nu)
                                                    : read_material_file(c.material_file, mesh.num_cells());
  verify::Problem prob;
  if (c.bc == "dirichlet-all") {
    if (!mat.is_uniform()) throw ParameterError("the manufactured problem needs a uniform material");
    prob = verify::manufactured_problem(mat.mu(0), mat.lambda(0));
  } else if (c.bc == "case6") {
    prob.body_force = [](const Vec2&) { return Vec2(0.0, -1.0); };
    prob.bc = BoundaryConditions::clamped_sides();
  } else {
    throw ParameterError("unknown boundary preset '" + c.bc + "'");
  }
  verify::RunOptions opt;
  opt.saddle = c.saddle;
  if (!c.fracture_file.empty()) opt.fracture_faces = read_face_list(c.fracture_file);
  std::vector<verify::ErrorReport> rows;
  bool failed = false;
  for (verify::Method m : parse_methods(c.method)) {
    verify::MethodRun run = verify::run_method(mesh, mat, prob, m, opt);
    run.report.case_id = "solve";
    run.report.grid = c.mesh_file.empty() ? grid_spec(c).to_key_values() : c.mesh_file;
    run.report.seed = c.seed;
    failed |= !run.report.ok();
    if (!c.vtk.empty()) {
      Sink v(c.vtk + "_" + verify::to_string(m) + ".vtk", out);
      io::write_solution_vtk(*v, mesh, run);
    }
    rows.push_back(run.report);
  }
  Sink sink(c.out, out);
  io::write_error_csv(*sink, rows, echo("solve", c));
  return failed ? numerical_failure : ok;
}

inline void write_rates(std::ostream& os, const verify::StudyResult& s) {
  for (std::size_t k = 0; k < s.methods.size(); ++k)
    os << "# rate method=" << verify::to_string(s.methods[k]) << " l2_u=" << io::format_double(s.rates[k][0])
       << " l2_div=" << io::format_double(s.rates[k][1]) << " linf_u=" << io::format_double(s.rates[k][2])
       << " linf_div=" << io::format_double(s.rates[k][3]) << '\n';
}

inline verify::CaseConfig case_config(const RunConfig& c) {
  verify::check_case_id(c.case_id);
  verify::CaseConfig cfg;
  cfg.id = c.case_id;
  cfg.seed = c.seed;
  cfg.parameter = c.parameter;
  cfg.mu = c.mu;
  if (c.nu_set) cfg.nu = c.nu;
  if (c.layer_refinement > 1) cfg.layer_refinement = c.layer_refinement;
  if (c.level > 0) cfg.level = c.level;
  return cfg;
}

inline int cmd_case(const RunConfig& c, std::ostream& out, bool study) {
  const verify::CaseConfig cfg = case_config(c);
  const auto methods = parse_methods(c.method);
  std::vector<verify::ErrorReport> rows;
  bool failed = false;
  Sink sink(c.out, out);
  if (study || !c.levels.empty()) {
    const auto levels = parse_levels(c.levels.empty() ? "5" : c.levels);
    const verify::StudyResult s = verify::convergence_study(cfg, levels, methods);
    for (const auto& r : s.reports) failed |= !r.ok();
    io::write_error_csv(*sink, s.reports, echo(study ? "study" : "case", c));
    write_rates(*sink, s);
    return failed ? numerical_failure : ok;
  }
  const verify::CaseResult res = verify::run_case(cfg, methods);
  for (const auto& run : res.runs) {
    rows.push_back(run.report);
    failed |= !run.report.ok();
    if (!c.vtk.empty()) {
      Sink v(c.vtk + "_" + verify::to_string(run.method) + ".vtk", out);
      io::write_solution_vtk(*v, res.mesh, run);
    }
    if (!c.profile.empty() && res.interface_x) {
      Sink p(c.profile + "_" + verify::to_string(run.method) + ".csv", out);
      auto meta = echo("case", c);
      meta.emplace_back("interface_x", io::format_double(*res.interface_x));
      io::write_profile_csv(*p, verify::interface_profile(res.mesh, run, *res.interface_x, res.exact.get()), meta);
    }
  }
  io::write_error_csv(*sink, rows, echo("case", c));
  return failed ? numerical_failure : ok;
}

/// Replaces `--config FILE` by the `--key value` pairs of its key=value lines.
inline std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] != "--config") {
      out.push_back(args[i]);
      continue;
    }
    if (i + 1 >= args.size()) throw ParameterError("--config needs a file name");
    std::ifstream in(args[++i]);
    if (!in) throw ParameterError("cannot open config file '" + args[i] + "'");
    std::string line;
    while (std::getline(in, line)) {
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos || line[first] == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ParameterError("config line without '=': " + line);
      auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r"), b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
      };
      const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
      out.push_back("--" + key);
      if (value != "true") out.push_back(value);
    }
  }
  return out;
}

inline void add_grid_options(CLI::App* app, RunConfig& c) {
  app->add_option("--family", c.family, "cartesian|triangular|hexagonal|mixed|two-region|layer|interface-nodes");
  app->add_option("--nx", c.nx, "cells in x");
  app->add_option("--ny", c.ny, "cells in y");
  app->add_flag("--twist", c.twist, "apply the smooth twist map");
  app->add_option("--perturb", c.perturb, "random node perturbation, fraction of the local edge length");
  app->add_option("--aspect", c.aspect, "stretch factor in x");
  app->add_option("--refinement", c.refinement, "refinement factor of the right region");
  app->add_option("--mode", c.mode, "both|y-only");
  app->add_option("--width-factor", c.width_factor, "layer width reduction factor");
  app->add_option("--layer-refinement", c.layer_refinement, "y-refinement inside the layer");
  app->add_option("--extra-nodes", c.extra_nodes, "extra nodes per interface face");
}

inline void add_problem_options(CLI::App* app, RunConfig& c) {
  app->add_option("--method", c.method, "vem|vem-relax|vem-relax-extra|mpsa|mpsa-relax-extra|all (comma list allowed)");
  app->add_option("--mu", c.mu, "shear modulus");
  app->add_option("--nu", c.nu, "Poisson ratio")->each([&c](const std::string&) { c.nu_set = true; });
  app->add_option("--material", c.material_file, "per-cell CSV cell_id,mu,lambda");
  app->add_flag("--saddle", c.saddle, "solve relaxed VEM in (u, p) saddle form");
  app->add_option("--out", c.out, "output file (default stdout)");
  app->add_option("--vtk", c.vtk, "VTK file prefix");
}

/// Entry point; returns the process exit code.
inline int run(const std::vector<std::string>& raw, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Polygonal-mesh linear elasticity: VEM and MPSA", "polyelast"};
  app.require_subcommand(1);
  app.set_version_flag("--version", io::version);
  auto* mesh = app.add_subcommand("mesh", "generate a mesh");
  add_grid_options(mesh, c);
  mesh->add_option("--seed", c.seed, "random seed");
  mesh->add_option("--out", c.out, "output file (default stdout)");

  auto* solve = app.add_subcommand("solve", "solve one problem on one mesh");
  add_grid_options(solve, c);
  add_problem_options(solve, c);
  solve->add_option("--seed", c.seed, "random seed");
  solve->add_option("--mesh-file", c.mesh_file, "polymesh2d input instead of a generated grid");
  solve->add_option("--bc", c.bc, "dirichlet-all (manufactured) | case6 (clamped sides, gravity)");
  solve->add_option("--fracture-faces", c.fracture_file, "file with one decoupled face id per line (MPSA)");

  auto* cs = app.add_subcommand("case", "run one of the numbered test cases");
  cs->add_option("id", c.case_id, "case id")->required();
  add_problem_options(cs, c);
  cs->add_option("--seed", c.seed, "random seed");
  cs->add_option("--level", c.level, "base resolution n");
  cs->add_option("--levels", c.levels, "N or a..b: run a refinement ladder");
  cs->add_option("--param", c.parameter, "case parameter (ratio, width factor, extra nodes)");
  cs->add_option("--layer-refinement", c.layer_refinement, "y-refinement inside the layer (cases 5b, 5c)");
  cs->add_option("--profile", c.profile, "interface force profile CSV prefix");

  auto* st = app.add_subcommand("study", "convergence study with fitted rates");
  st->add_option("--case", c.case_id, "case id")->required();
  add_problem_options(st, c);
  st->add_option("--seed", c.seed, "random seed");
  st->add_option("--levels", c.levels, "N or a..b")->required();
  st->add_option("--param", c.parameter, "case parameter");

  try {
    std::vector<std::string> args = expand_config(raw);
    std::reverse(args.begin(), args.end());  // CLI11 takes the vector in reverse
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForVersion&) {
    out << io::version << '\n';
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return usage_error;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << '\n';
    return usage_error;
  }

  try {
    if (*mesh) return cmd_mesh(c, out);
    if (*solve) return cmd_solve(c, out);
    if (*cs) return cmd_case(c, out, false);
    return cmd_case(c, out, true);
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << '\n';
    return usage_error;
  } catch (const MeshError& e) {
    err << "error: " << e.what() << '\n';
    return usage_error;
  } catch (const Error& e) {
    err << "failed: " << e.what() << '\n';
    return numerical_failure;
  }
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace polyelast::cli
