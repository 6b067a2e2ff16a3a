#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "polyelast/mesh.hpp"

namespace polyelast::meshgen {

enum class Family { cartesian, triangular, hexagonal, mixed, two_region, layer, interface_nodes };
enum class RefineMode { both, y_only };

inline const char* to_string(Family f) {
  switch (f) {
    case Family::cartesian: return "cartesian";
    case Family::triangular: return "triangular";
    case Family::hexagonal: return "hexagonal";
    case Family::mixed: return "mixed";
    case Family::two_region: return "two-region";
    case Family::layer: return "layer";
    case Family::interface_nodes: return "interface-nodes";
  }
  return "?";
}

inline Family parse_family(const std::string& s) {
  for (Family f : {Family::cartesian, Family::triangular, Family::hexagonal, Family::mixed,
                   Family::two_region, Family::layer, Family::interface_nodes})
    if (s == to_string(f)) return f;
  throw ParameterError("unknown grid family '" + s + "'");
}

/// Parameters selecting one grid of a family.
struct GridSpec {
  Family family = Family::cartesian;
  int nx = 4;
  int ny = 4;
  bool twist = false;
  double perturb_amplitude = 0.0;
  double aspect_ratio = 1.0;
  int refinement_factor = 1;
  RefineMode refine_mode = RefineMode::both;
  double layer_width_factor = 1.0;
  int extra_interface_nodes = 0;
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (nx < 1 || ny < 1) throw ParameterError("cell counts must be >= 1");
    if (!(perturb_amplitude >= 0.0 && perturb_amplitude < 0.5))
      throw ParameterError("perturb_amplitude must lie in [0, 0.5)");
    if (!(aspect_ratio >= 1.0)) throw ParameterError("aspect_ratio must be >= 1");
    if (refinement_factor < 1) throw ParameterError("refinement_factor must be >= 1");
    if (!(layer_width_factor >= 1.0)) throw ParameterError("layer_width_factor must be >= 1");
    if (extra_interface_nodes < 0) throw ParameterError("extra_interface_nodes must be >= 0");
  }

  /// `key=value` pairs, space separated, for reproducibility headers.
  std::string to_key_values() const {
    std::ostringstream os;
    os.precision(17);
    os << "family=" << to_string(family) << " nx=" << nx << " ny=" << ny << " twist=" << (twist ? 1 : 0)
       << " perturb=" << perturb_amplitude << " aspect=" << aspect_ratio
       << " refinement=" << refinement_factor
       << " mode=" << (refine_mode == RefineMode::both ? "both" : "y-only")
       << " width_factor=" << layer_width_factor << " extra_nodes=" << extra_interface_nodes
       << " seed=" << rng_seed;
    return os.str();
  }
};

namespace detail {

struct Soup {
  std::vector<Vec2> points;
  std::vector<std::vector<int>> loops;

  void append(const Soup& other) {
    const int offset = static_cast<int>(points.size());
    points.insert(points.end(), other.points.begin(), other.points.end());
    for (auto loop : other.loops) {
      for (int& id : loop) id += offset;
      loops.push_back(std::move(loop));
    }
  }
};

inline Soup quad_block(double x0, double x1, double y0, double y1, int nx, int ny) {
  Soup s;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const double x = i == nx ? x1 : x0 + (x1 - x0) * i / nx;
      const double y = j == ny ? y1 : y0 + (y1 - y0) * j / ny;
      s.points.emplace_back(x, y);
    }
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) s.loops.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
  return s;
}

inline Soup quad_block_columns(const std::vector<double>& xs, double y0, double y1, int ny) {
  Soup s;
  const int nx = static_cast<int>(xs.size()) - 1;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) s.points.emplace_back(xs[i], j == ny ? y1 : y0 + (y1 - y0) * j / ny);
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) s.loops.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
  return s;
}

// Two triangles per quad; the diagonal alternates in a checkerboard pattern.
inline Soup tri_block(double x0, double x1, double y0, double y1, int nx, int ny) {
  Soup s = quad_block(x0, x1, y0, y1, nx, ny);
  std::vector<std::vector<int>> tris;
  tris.reserve(2 * s.loops.size());
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const auto& q = s.loops[j * nx + i];
      if ((i + j) % 2 == 0) {
        tris.push_back({q[0], q[1], q[2]});
        tris.push_back({q[0], q[2], q[3]});
      } else {
        tris.push_back({q[0], q[1], q[3]});
        tris.push_back({q[1], q[2], q[3]});
      }
    }
  s.loops = std::move(tris);
  return s;
}

// Honeycomb in brick-wall layout: even rows hold nx bricks, odd rows are
// shifted by half a brick (half bricks at both ends). Zig-zag lines give
// hexagons with valence-3 interior nodes; the outer lines stay straight.
inline Soup hex_block(double x0, double x1, double y0, double y1, int nx, int ny) {
  Soup s;
  const double hy = (y1 - y0) / ny;
  const double delta = hy / 6.0;
  const int nk = 2 * nx + 1;
  for (int j = 0; j <= ny; ++j)
    for (int k = 0; k < nk; ++k) {
      const double x = k == nk - 1 ? x1 : x0 + (x1 - x0) * k / (2.0 * nx);
      double y = j == ny ? y1 : y0 + hy * j;
      if (j > 0 && j < ny) y += ((j + k) % 2 == 1) ? -delta : delta;
      s.points.emplace_back(x, y);
    }
  auto id = [nk](int k, int j) { return j * nk + k; };
  for (int j = 0; j < ny; ++j) {
    if (j % 2 == 0) {
      for (int i = 0; i < nx; ++i) {
        const int k = 2 * i;
        s.loops.push_back({id(k, j), id(k + 1, j), id(k + 2, j), id(k + 2, j + 1), id(k + 1, j + 1), id(k, j + 1)});
      }
    } else {
      s.loops.push_back({id(0, j), id(1, j), id(1, j + 1), id(0, j + 1)});
      for (int i = 1; i < nx; ++i) {
        const int k = 2 * i - 1;
        s.loops.push_back({id(k, j), id(k + 1, j), id(k + 2, j), id(k + 2, j + 1), id(k + 1, j + 1), id(k, j + 1)});
      }
      s.loops.push_back({id(nk - 2, j), id(nk - 1, j), id(nk - 1, j + 1), id(nk - 2, j + 1)});
    }
  }
  return s;
}

// Merges coincident points and inserts every point lying inside a cell edge
// into that edge (hanging nodes). Points referenced by no loop after the
// insertion are dropped.
inline PolyMesh stitch(const Soup& soup, double tol = 1e-10) {
  std::vector<int> rep(soup.points.size());
  std::vector<Vec2> uniq;
  std::map<std::pair<long long, long long>, std::vector<int>> buckets;
  for (std::size_t i = 0; i < soup.points.size(); ++i) {
    const Vec2& p = soup.points[i];
    const long long bx = std::llround(p.x() / (4 * tol));
    const long long by = std::llround(p.y() / (4 * tol));
    int found = -1;
    for (long long dx = -1; dx <= 1 && found < 0; ++dx)
      for (long long dy = -1; dy <= 1 && found < 0; ++dy) {
        auto it = buckets.find({bx + dx, by + dy});
        if (it == buckets.end()) continue;
        for (int u : it->second)
          if ((uniq[u] - p).lpNorm<Eigen::Infinity>() <= tol) {
            found = u;
            break;
          }
      }
    if (found < 0) {
      found = static_cast<int>(uniq.size());
      uniq.push_back(p);
      buckets[{bx, by}].push_back(found);
    }
    rep[i] = found;
  }

  std::vector<std::vector<int>> loops;
  loops.reserve(soup.loops.size());
  for (const auto& loop : soup.loops) {
    std::vector<int> merged;
    for (int id : loop) {
      const int r = rep[id];
      if (merged.empty() || merged.back() != r) merged.push_back(r);
    }
    while (merged.size() > 1 && merged.front() == merged.back()) merged.pop_back();
    std::vector<int> out;
    const std::size_t n = merged.size();
    for (std::size_t e = 0; e < n; ++e) {
      const int a = merged[e];
      const int b = merged[(e + 1) % n];
      out.push_back(a);
      const Vec2 pa = uniq[a];
      const Vec2 d = uniq[b] - pa;
      const double len2 = d.squaredNorm();
      const Vec2 lo = pa.cwiseMin(uniq[b]).array() - tol;
      const Vec2 hi = pa.cwiseMax(uniq[b]).array() + tol;
      std::vector<std::pair<double, int>> inside;
      for (int u = 0; u < static_cast<int>(uniq.size()); ++u) {
        const Vec2& p = uniq[u];
        if (u == a || u == b || p.x() < lo.x() || p.x() > hi.x() || p.y() < lo.y() || p.y() > hi.y()) continue;
        const double t = (p - pa).dot(d) / len2;
        if (t <= 1e-12 || t >= 1.0 - 1e-12) continue;
        if ((pa + t * d - p).norm() <= tol) inside.emplace_back(t, u);
      }
      std::sort(inside.begin(), inside.end());
      for (const auto& [t, u] : inside) out.push_back(u);
    }
    loops.push_back(std::move(out));
  }

  std::vector<int> renumber(uniq.size(), -1);
  std::vector<Vec2> nodes;
  for (auto& loop : loops)
    for (int& id : loop) {
      if (renumber[id] < 0) {
        renumber[id] = static_cast<int>(nodes.size());
        nodes.push_back(uniq[id]);
      }
      id = renumber[id];
    }
  return PolyMesh(std::move(nodes), std::move(loops));
}

inline PolyMesh remap_nodes(const PolyMesh& mesh, std::vector<Vec2> nodes, const char* what) {
  try {
    return PolyMesh(std::move(nodes), mesh.cell_loops());
  } catch (const MeshError& e) {
    throw GenerationError(std::string(what) + " produced an invalid mesh: " + e.what());
  }
}

}  // namespace detail

/// Uniform nx x ny quadrilaterals on the unit square.
inline PolyMesh cartesian(int nx, int ny) {
  if (nx < 1 || ny < 1) throw ParameterError("cartesian: nx, ny must be >= 1");
  auto s = detail::quad_block(0.0, 1.0, 0.0, 1.0, nx, ny);
  return PolyMesh(std::move(s.points), std::move(s.loops));
}

/// Alternating-diagonal triangulation of the nx x ny Cartesian grid.
inline PolyMesh triangular(int nx, int ny) {
  if (nx < 1 || ny < 1) throw ParameterError("triangular: nx, ny must be >= 1");
  auto s = detail::tri_block(0.0, 1.0, 0.0, 1.0, nx, ny);
  return PolyMesh(std::move(s.points), std::move(s.loops));
}

/// Honeycomb with ny rows of nx bricks clipped to the unit square; boundary
/// cells are quadrilaterals or pentagons.
inline PolyMesh hexagonal(int nx, int ny) {
  if (nx < 1 || ny < 1) throw ParameterError("hexagonal: nx, ny must be >= 1");
  auto s = detail::hex_block(0.0, 1.0, 0.0, 1.0, nx, ny);
  return PolyMesh(std::move(s.points), std::move(s.loops));
}

/// Smooth deformation x -> x + 0.05 sin(3 pi x) sin(3 pi y) (both components),
/// with nodes on the bounding box pinned.
inline Vec2 twist_map(const Vec2& p) {
  using std::numbers::pi;
  const double d = 0.05 * std::sin(3.0 * pi * p.x()) * std::sin(3.0 * pi * p.y());
  return {p.x() + d, p.y() + d};
}

inline PolyMesh twist(const PolyMesh& mesh) {
  std::vector<Vec2> nodes(mesh.nodes().begin(), mesh.nodes().end());
  for (int n = 0; n < mesh.num_nodes(); ++n)
    if (!mesh.on_boundary(n)) nodes[n] = twist_map(nodes[n]);
  return detail::remap_nodes(mesh, std::move(nodes), "twist");
}

/// Moves each interior node by a uniform random vector in [-a h, a h]^2,
/// h being the shortest edge incident to the node.
inline PolyMesh perturb(const PolyMesh& mesh, double amplitude, std::uint64_t seed) {
  if (!(amplitude >= 0.0 && amplitude < 0.5)) throw ParameterError("perturb: amplitude must lie in [0, 0.5)");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<Vec2> nodes(mesh.nodes().begin(), mesh.nodes().end());
  for (int n = 0; n < mesh.num_nodes(); ++n) {
    const double rx = unit(rng);
    const double ry = unit(rng);
    if (mesh.on_boundary(n)) continue;
    double h = std::numeric_limits<double>::infinity();
    for (int f : mesh.node_faces(n)) h = std::min(h, mesh.face(f).area);
    nodes[n] += amplitude * h * Vec2(rx, ry);
  }
  try {
    return PolyMesh(std::move(nodes), mesh.cell_loops());
  } catch (const MeshError& e) {
    throw GenerationError(std::string("perturb produced an invalid mesh (try a smaller amplitude): ") + e.what());
  }
}

/// Scales x-coordinates by the aspect ratio.
inline PolyMesh stretched(const PolyMesh& mesh, double aspect_ratio) {
  if (!(aspect_ratio >= 1.0)) throw ParameterError("stretched: aspect ratio must be >= 1");
  std::vector<Vec2> nodes(mesh.nodes().begin(), mesh.nodes().end());
  for (auto& p : nodes) p.x() *= aspect_ratio;
  return detail::remap_nodes(mesh, std::move(nodes), "stretch");
}

/// Left half [0,0.5] holds nx x ny coarse cells, the right half the same
/// block refined by `refinement` in both directions or in y only. Coarse
/// cells on the interface carry the hanging nodes.
inline PolyMesh two_region(int nx, int ny, int refinement, RefineMode mode) {
  if (nx < 1 || ny < 1) throw ParameterError("two_region: nx, ny must be >= 1");
  if (refinement < 1) throw ParameterError("two_region: refinement must be >= 1");
  detail::Soup soup = detail::quad_block(0.0, 0.5, 0.0, 1.0, nx, ny);
  const int rx = mode == RefineMode::both ? refinement : 1;
  soup.append(detail::quad_block(0.5, 1.0, 0.0, 1.0, nx * rx, ny * refinement));
  return detail::stitch(soup);
}

/// Cartesian grid where column nx/2 is replaced by a layer `width_factor`
/// times thinner than the other (uniform) columns, optionally refined in y
/// inside the layer and twisted.
inline PolyMesh layer(int nx, int ny, double width_factor, int layer_refinement, bool apply_twist) {
  if (nx < 2 || ny < 1) throw ParameterError("layer: need nx >= 2, ny >= 1");
  if (!(width_factor >= 1.0)) throw ParameterError("layer: width factor must be >= 1");
  if (layer_refinement < 1) throw ParameterError("layer: refinement must be >= 1");
  const int L = nx / 2;
  const double w = 1.0 / (nx - 1 + 1.0 / width_factor);
  std::vector<double> xs(nx + 1, 0.0);
  for (int i = 0; i < nx; ++i) xs[i + 1] = xs[i] + (i == L ? w / width_factor : w);
  xs[nx] = 1.0;
  detail::Soup soup;
  if (L > 0) soup.append(detail::quad_block_columns({xs.begin(), xs.begin() + L + 1}, 0.0, 1.0, ny));
  soup.append(detail::quad_block_columns({xs[L], xs[L + 1]}, 0.0, 1.0, ny * layer_refinement));
  if (L + 1 < nx) soup.append(detail::quad_block_columns({xs.begin() + L + 1, xs.end()}, 0.0, 1.0, ny));
  PolyMesh mesh = detail::stitch(soup);
  return apply_twist ? twist(mesh) : mesh;
}

/// x-position of the interface used by `layer` (left edge of the layer).
inline double layer_interface_x(int nx, double width_factor) {
  const int L = nx / 2;
  const double w = 1.0 / (nx - 1 + 1.0 / width_factor);
  return L * w;
}

/// Cartesian grid whose faces on the vertical line x = (nx/2)/nx each carry
/// n_extra equally spaced extra nodes, shared by the cells on both sides.
inline PolyMesh interface_extra_nodes(int nx, int ny, int n_extra) {
  if (nx < 2 || ny < 1) throw ParameterError("interface_extra_nodes: need nx >= 2, ny >= 1");
  if (n_extra < 0) throw ParameterError("interface_extra_nodes: n_extra must be >= 0");
  detail::Soup soup = detail::quad_block(0.0, 1.0, 0.0, 1.0, nx, ny);
  const double xi = static_cast<double>(nx / 2) / nx;
  for (int j = 0; j < ny; ++j)
    for (int k = 1; k <= n_extra; ++k)
      soup.points.emplace_back(xi, (j + static_cast<double>(k) / (n_extra + 1)) / ny);
  return detail::stitch(soup);
}

inline double interface_x(int nx) { return static_cast<double>(nx / 2) / nx; }

/// Fixed composite: triangles on the left third, quadrilaterals in the middle
/// (different vertical resolution, so hanging nodes on both interfaces),
/// hexagons on the right third; twisted.
inline PolyMesh mixed_demo() {
  detail::Soup soup = detail::tri_block(0.0, 1.0 / 3.0, 0.0, 1.0, 2, 6);
  soup.append(detail::quad_block(1.0 / 3.0, 2.0 / 3.0, 0.0, 1.0, 2, 9));
  soup.append(detail::hex_block(2.0 / 3.0, 1.0, 0.0, 1.0, 2, 6));
  return twist(detail::stitch(soup));
}

/// Builds the grid described by a GridSpec. Perturbation is applied after the
/// twist, stretching last.
inline PolyMesh generate(const GridSpec& spec) {
  spec.validate();
  PolyMesh mesh;
  bool twisted = false;
  switch (spec.family) {
    case Family::cartesian: mesh = cartesian(spec.nx, spec.ny); break;
    case Family::triangular: mesh = triangular(spec.nx, spec.ny); break;
    case Family::hexagonal: mesh = hexagonal(spec.nx, spec.ny); break;
    case Family::mixed:
      mesh = mixed_demo();
      twisted = true;
      break;
    case Family::two_region: mesh = two_region(spec.nx, spec.ny, spec.refinement_factor, spec.refine_mode); break;
    case Family::layer:
      mesh = layer(spec.nx, spec.ny, spec.layer_width_factor, spec.refinement_factor, spec.twist);
      twisted = spec.twist;
      break;
    case Family::interface_nodes: mesh = interface_extra_nodes(spec.nx, spec.ny, spec.extra_interface_nodes); break;
  }
  if (spec.twist && !twisted) mesh = twist(mesh);
  if (spec.perturb_amplitude > 0.0) mesh = perturb(mesh, spec.perturb_amplitude, spec.rng_seed);
  if (spec.aspect_ratio != 1.0) mesh = stretched(mesh, spec.aspect_ratio);
  return mesh;
}

}  // namespace polyelast::meshgen
