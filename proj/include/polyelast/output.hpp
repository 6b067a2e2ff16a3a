#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "polyelast/mesh.hpp"
#include "polyelast/mesh_io.hpp"
#include "polyelast/verify.hpp"

namespace polyelast::io {

inline constexpr const char* version = "polyelast 0.1.0";

using Metadata = std::vector<std::pair<std::string, std::string>>;

inline void write_metadata(std::ostream& os, const Metadata& meta) {
  os << "# version=" << version << '\n';
  for (const auto& [k, v] : meta) os << "# " << k << '=' << v << '\n';
}

inline const char* error_csv_header() {
  return "case,method,variant,grid,h,dofs,l2_u,linf_u,l2_div,linf_div,l2_stress,linf_stress,stress_convention,seed,status";
}

// grid specs contain spaces and '=' but never commas or quotes
inline std::string csv_field(const std::string& s) {
  return s.find_first_of(",\"\n") == std::string::npos ? s : '"' + s + '"';
}

inline void write_error_row(std::ostream& os, const verify::ErrorReport& r) {
  os << csv_field(r.case_id) << ',' << r.method << ',' << r.variant << ',' << csv_field(r.grid) << ','
     << format_double(r.h) << ',' << r.dofs << ',' << format_double(r.l2_u) << ',' << format_double(r.linf_u) << ','
     << format_double(r.l2_div) << ',' << format_double(r.linf_div) << ',' << format_double(r.l2_stress) << ','
     << format_double(r.linf_stress) << ',' << r.stress_convention << ',' << r.seed << ',' << r.status << '\n';
}

inline void write_error_csv(std::ostream& os, const std::vector<verify::ErrorReport>& rows, const Metadata& meta = {}) {
  write_metadata(os, meta);
  os << error_csv_header() << '\n';
  for (const auto& r : rows) write_error_row(os, r);
}

inline void write_profile_csv(std::ostream& os, const std::vector<verify::InterfaceSample>& profile,
                              const Metadata& meta = {}) {
  write_metadata(os, meta);
  os << "face_id,arclength,Fx,Fy,Fx_exact,Fy_exact\n";
  for (const auto& s : profile)
    os << s.face << ',' << format_double(s.arclength) << ',' << format_double(s.force.x()) << ','
       << format_double(s.force.y()) << ',' << format_double(s.exact.x()) << ',' << format_double(s.exact.y()) << '\n';
}

/// Named per-cell or per-point data for the VTK writer; `components` is 1 or 3.
struct VtkField {
  std::string name;
  int components = 1;
  std::vector<double> values;
};

/// Legacy ASCII VTK unstructured grid with polygon cells.
inline void write_vtk(std::ostream& os, const PolyMesh& mesh, const std::vector<VtkField>& cell_data,
                      const std::vector<VtkField>& point_data = {}, const std::string& title = "polyelast") {
  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.num_nodes() << " double\n";
  for (const auto& p : mesh.nodes()) os << format_double(p.x()) << ' ' << format_double(p.y()) << " 0\n";
  std::size_t total = 0;
  for (const auto& c : mesh.cells()) total += c.nodes.size() + 1;
  os << "CELLS " << mesh.num_cells() << ' ' << total << '\n';
  for (const auto& c : mesh.cells()) {
    os << c.nodes.size();
    for (int n : c.nodes) os << ' ' << n;
    os << '\n';
  }
  os << "CELL_TYPES " << mesh.num_cells() << '\n';
  for (int c = 0; c < mesh.num_cells(); ++c) os << "7\n";
  auto emit = [&](const std::vector<VtkField>& fields, std::size_t count, const char* section) {
    if (fields.empty()) return;
    os << section << ' ' << count << '\n';
    for (const auto& f : fields) {
      if (f.values.size() != count * f.components) throw ParameterError("VTK field '" + f.name + "' has wrong size");
      if (f.components == 1)
        os << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
      else
        os << "VECTORS " << f.name << " double\n";
      for (std::size_t i = 0; i < count; ++i) {
        for (int k = 0; k < f.components; ++k) os << (k ? " " : "") << format_double(f.values[i * f.components + k]);
        os << '\n';
      }
    }
  };
  emit(cell_data, mesh.num_cells(), "CELL_DATA");
  emit(point_data, mesh.num_nodes(), "POINT_DATA");
}

/// Pads 2D vectors with a zero z-component.
inline VtkField vector_field(std::string name, const std::vector<Vec2>& v) {
  VtkField f{std::move(name), 3, {}};
  f.values.reserve(3 * v.size());
  for (const auto& x : v) f.values.insert(f.values.end(), {x.x(), x.y(), 0.0});
  return f;
}

inline VtkField scalar_field(std::string name, std::vector<double> v) { return {std::move(name), 1, std::move(v)}; }

/// Cell and point fields of a single method run.
inline void write_solution_vtk(std::ostream& os, const PolyMesh& mesh, const verify::MethodRun& run) {
  std::vector<VtkField> cells, points;
  if (run.vem) {
    std::vector<Vec2> u(mesh.num_nodes());
    for (int n = 0; n < mesh.num_nodes(); ++n) u[n] = run.vem->displacement(n);
    points.push_back(vector_field("displacement", u));
    cells.push_back(scalar_field("divergence", run.vem->divergence));
    std::vector<double> sxx, syy, sxy;
    for (const auto& s : run.vem->stress) {
      sxx.push_back(s[0]);
      syy.push_back(s[1]);
      sxy.push_back(s[2]);
    }
    cells.push_back(scalar_field("stress_xx", sxx));
    cells.push_back(scalar_field("stress_yy", syy));
    cells.push_back(scalar_field("stress_xy", sxy));
  } else if (run.mpsa && run.mpsa->ok()) {
    std::vector<Vec2> u(mesh.num_cells());
    for (int c = 0; c < mesh.num_cells(); ++c) u[c] = run.mpsa->displacement(c);
    cells.push_back(vector_field("displacement", u));
    cells.push_back(scalar_field("divergence", run.mpsa->divergence));
    if (run.mpsa->pressure.size())
      cells.push_back(scalar_field("pressure", {run.mpsa->pressure.begin(), run.mpsa->pressure.end()}));
  }
  write_vtk(os, mesh, cells, points, std::string("polyelast ") + verify::to_string(run.method));
}

}  // namespace polyelast::io
