#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "polyelast/mesh.hpp"

namespace polyelast::io {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Writes the `polymesh2d 1` text format. Metadata lines are emitted as
/// `# ...` comments right after the header line.
inline void write_mesh(std::ostream& os, const PolyMesh& mesh,
                       const std::vector<std::string>& metadata = {}) {
  os << "polymesh2d 1\n";
  for (const auto& line : metadata) os << "# " << line << '\n';
  os << "nodes " << mesh.num_nodes() << '\n';
  for (const auto& p : mesh.nodes()) os << format_double(p.x()) << ' ' << format_double(p.y()) << '\n';
  os << "cells " << mesh.num_cells() << '\n';
  for (const auto& c : mesh.cells()) {
    os << c.nodes.size();
    for (int n : c.nodes) os << ' ' << n;
    os << '\n';
  }
}

inline PolyMesh read_mesh(std::istream& is) {
  std::string line;
  auto next = [&]() -> bool {
    while (std::getline(is, line)) {
      const auto pos = line.find_first_not_of(" \t\r");
      if (pos == std::string::npos || line[pos] == '#') continue;
      return true;
    }
    return false;
  };
  if (!next() || line.rfind("polymesh2d 1", 0) != 0) throw MeshError("missing 'polymesh2d 1' header");

  auto read_count = [&](const char* keyword) {
    if (!next()) throw MeshError(std::string("missing '") + keyword + "' section");
    std::istringstream ls(line);
    std::string kw;
    long count = -1;
    ls >> kw >> count;
    if (kw != keyword || count < 0) throw MeshError(std::string("malformed '") + keyword + "' line: " + line);
    return count;
  };

  const long n_nodes = read_count("nodes");
  std::vector<Vec2> nodes;
  nodes.reserve(n_nodes);
  for (long i = 0; i < n_nodes; ++i) {
    if (!next()) throw MeshError("truncated node list");
    std::istringstream ls(line);
    std::string xs, ys;
    if (!(ls >> xs >> ys)) throw MeshError("malformed node line: " + line);
    nodes.emplace_back(std::stod(xs), std::stod(ys));
  }
  const long n_cells = read_count("cells");
  std::vector<std::vector<int>> loops;
  loops.reserve(n_cells);
  for (long i = 0; i < n_cells; ++i) {
    if (!next()) throw MeshError("truncated cell list");
    std::istringstream ls(line);
    int k = 0;
    if (!(ls >> k) || k < 3) throw MeshError("malformed cell line: " + line);
    std::vector<int> loop(k);
    for (int& id : loop)
      if (!(ls >> id)) throw MeshError("malformed cell line: " + line);
    loops.push_back(std::move(loop));
  }
  return PolyMesh(std::move(nodes), std::move(loops));
}

inline PolyMesh read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file " + path);
  return read_mesh(in);
}

}  // namespace polyelast::io
