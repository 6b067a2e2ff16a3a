#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "polyelast/errors.hpp"

namespace polyelast {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

enum class BoundaryTag : std::uint8_t { interior, left, right, bottom, top, other };

inline const char* to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::interior: return "interior";
    case BoundaryTag::left: return "left";
    case BoundaryTag::right: return "right";
    case BoundaryTag::bottom: return "bottom";
    case BoundaryTag::top: return "top";
    case BoundaryTag::other: return "other";
  }
  return "?";
}

/// Straight edge between two nodes. The normal points out of cells[0]
/// (into cells[1] for interior faces).
struct Face {
  std::array<int, 2> nodes{-1, -1};
  std::array<int, 2> cells{-1, -1};
  double area = 0.0;
  Vec2 normal = Vec2::Zero();
  Vec2 centroid = Vec2::Zero();
  BoundaryTag tag = BoundaryTag::interior;

  bool is_boundary() const { return cells[1] < 0; }
  int other_cell(int cell) const { return cells[0] == cell ? cells[1] : cells[0]; }
};

/// Counter-clockwise polygon. faces[i] joins nodes[i] and nodes[i+1];
/// signs[i] is +1 when the face normal is outward for this cell.
struct Cell {
  std::vector<int> nodes;
  std::vector<int> faces;
  std::vector<int> signs;
  double volume = 0.0;
  Vec2 centroid = Vec2::Zero();

  int size() const { return static_cast<int>(nodes.size()); }
  Vec2 outward_normal(int local_face, std::span<const Face> all_faces) const {
    return static_cast<double>(signs[local_face]) * all_faces[faces[local_face]].normal;
  }
};

namespace detail {

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

inline double polygon_area(std::span<const Vec2> pts) {
  double twice = 0.0;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) twice += cross(pts[i], pts[(i + 1) % n]);
  return 0.5 * twice;
}

inline bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p, double tol) {
  return p.x() >= std::min(a.x(), b.x()) - tol && p.x() <= std::max(a.x(), b.x()) + tol &&
         p.y() >= std::min(a.y(), b.y()) - tol && p.y() <= std::max(a.y(), b.y()) + tol;
}

// Closed-segment intersection test with an orientation tolerance.
inline bool segments_touch(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d, double tol) {
  const double o1 = cross(b - a, c - a);
  const double o2 = cross(b - a, d - a);
  const double o3 = cross(d - c, a - c);
  const double o4 = cross(d - c, b - c);
  const double eps = tol * tol;
  if (((o1 > eps && o2 < -eps) || (o1 < -eps && o2 > eps)) &&
      ((o3 > eps && o4 < -eps) || (o3 < -eps && o4 > eps)))
    return true;
  if (std::abs(o1) <= eps && on_segment(a, b, c, tol)) return true;
  if (std::abs(o2) <= eps && on_segment(a, b, d, tol)) return true;
  if (std::abs(o3) <= eps && on_segment(c, d, a, tol)) return true;
  if (std::abs(o4) <= eps && on_segment(c, d, b, tol)) return true;
  return false;
}

inline bool is_simple_polygon(std::span<const Vec2> pts, double scale) {
  const int n = static_cast<int>(pts.size());
  const double tol = 1e-12 * scale;
  for (int i = 0; i < n; ++i) {
    const Vec2& a = pts[i];
    const Vec2& b = pts[(i + 1) % n];
    // consecutive edges may be collinear (hanging nodes) but must not fold back
    const Vec2& c = pts[(i + 2) % n];
    if (std::abs(cross(b - a, c - b)) <= tol * tol && (b - a).dot(c - b) < 0.0) return false;
    for (int j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_touch(a, b, pts[j], pts[(j + 1) % n], tol)) return false;
    }
  }
  return true;
}

}  // namespace detail

/// Immutable 2D polygonal mesh with full topology and geometry.
class PolyMesh {
 public:
  static constexpr double boundary_tolerance = 1e-9;

  PolyMesh() = default;

  /// Builds topology and geometry from node coordinates and counter-clockwise
  /// node loops. Faces are deduplicated by node pair; collinear hanging nodes
  /// are kept as separate faces.
  PolyMesh(std::vector<Vec2> nodes, std::vector<std::vector<int>> cell_loops)
      : nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw MeshError("mesh has no nodes");
    Vec2 lo = nodes_.front(), hi = nodes_.front();
    for (const auto& p : nodes_) {
      if (!std::isfinite(p.x()) || !std::isfinite(p.y())) throw MeshError("non-finite node coordinate");
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    bbox_lo_ = lo;
    bbox_hi_ = hi;
    const double scale = std::max((hi - lo).maxCoeff(), 1e-300);

    std::map<std::pair<int, int>, int> face_of_pair;
    std::map<std::vector<int>, int> seen_cells;
    cells_.reserve(cell_loops.size());
    for (std::size_t ci = 0; ci < cell_loops.size(); ++ci) {
      auto& loop = cell_loops[ci];
      const int c = static_cast<int>(ci);
      const std::string name = "cell " + std::to_string(c);
      if (loop.size() < 3) throw MeshError(name + " has fewer than 3 nodes");
      for (int id : loop)
        if (id < 0 || id >= static_cast<int>(nodes_.size()))
          throw MeshError(name + " references invalid node " + std::to_string(id));
      {
        auto key = loop;
        std::sort(key.begin(), key.end());
        if (std::adjacent_find(key.begin(), key.end()) != key.end())
          throw MeshError(name + " repeats a node");
        auto [it, inserted] = seen_cells.emplace(key, c);
        if (!inserted)
          throw MeshError(name + " duplicates cell " + std::to_string(it->second));
      }
      std::vector<Vec2> pts;
      pts.reserve(loop.size());
      for (int id : loop) pts.push_back(nodes_[id]);
      const double area = detail::polygon_area(pts);
      if (std::abs(area) <= 1e-14 * scale * scale) throw MeshError(name + " is degenerate (zero area)");
      if (area < 0.0) throw MeshError(name + " is not counter-clockwise (negative area)");
      if (!detail::is_simple_polygon(pts, scale)) throw MeshError(name + " is not a simple polygon");

      Cell cell;
      cell.nodes = loop;
      cell.volume = area;
      Vec2 cen = Vec2::Zero();
      const int n = static_cast<int>(pts.size());
      for (int i = 0; i < n; ++i) {
        const Vec2& a = pts[i];
        const Vec2& b = pts[(i + 1) % n];
        cen += detail::cross(a, b) * (a + b);
      }
      cell.centroid = cen / (6.0 * area);

      for (int i = 0; i < n; ++i) {
        const int a = loop[i];
        const int b = loop[(i + 1) % n];
        const auto key = std::minmax(a, b);
        auto it = face_of_pair.find({key.first, key.second});
        if (it == face_of_pair.end()) {
          Face f;
          f.nodes = {a, b};
          f.cells = {c, -1};
          const Vec2 d = nodes_[b] - nodes_[a];
          f.area = d.norm();
          f.normal = Vec2(d.y(), -d.x()) / f.area;
          f.centroid = 0.5 * (nodes_[a] + nodes_[b]);
          const int fid = static_cast<int>(faces_.size());
          faces_.push_back(f);
          face_of_pair.emplace(std::pair{key.first, key.second}, fid);
          cell.faces.push_back(fid);
          cell.signs.push_back(+1);
        } else {
          Face& f = faces_[it->second];
          if (f.cells[1] >= 0)
            throw MeshError("non-manifold face between nodes " + std::to_string(a) + " and " +
                            std::to_string(b) + " (more than two cells, at " + name + ")");
          if (f.nodes[0] != b || f.nodes[1] != a)
            throw MeshError("inconsistent orientation between " + name + " and cell " +
                            std::to_string(f.cells[0]));
          f.cells[1] = c;
          cell.faces.push_back(it->second);
          cell.signs.push_back(-1);
        }
      }
      cells_.push_back(std::move(cell));
    }

    node_faces_.assign(nodes_.size(), {});
    node_cells_.assign(nodes_.size(), {});
    for (int f = 0; f < num_faces(); ++f) {
      Face& face = faces_[f];
      for (int n : face.nodes) node_faces_[n].push_back(f);
      face.tag = face.is_boundary() ? classify_boundary(face) : BoundaryTag::interior;
    }
    for (int c = 0; c < num_cells(); ++c)
      for (int n : cells_[c].nodes) node_cells_[n].push_back(c);
    for (int n = 0; n < num_nodes(); ++n)
      if (node_cells_[n].empty()) throw MeshError("node " + std::to_string(n) + " belongs to no cell");
  }

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_faces() const { return static_cast<int>(faces_.size()); }
  int num_cells() const { return static_cast<int>(cells_.size()); }

  std::span<const Vec2> nodes() const { return nodes_; }
  std::span<const Face> faces() const { return faces_; }
  std::span<const Cell> cells() const { return cells_; }
  const Vec2& node(int i) const { return nodes_[i]; }
  const Face& face(int i) const { return faces_[i]; }
  const Cell& cell(int i) const { return cells_[i]; }

  std::span<const int> node_faces(int n) const { return node_faces_[n]; }
  std::span<const int> node_cells(int n) const { return node_cells_[n]; }

  const Vec2& bbox_min() const { return bbox_lo_; }
  const Vec2& bbox_max() const { return bbox_hi_; }

  bool on_boundary(int node) const {
    const Vec2& p = nodes_[node];
    return std::abs(p.x() - bbox_lo_.x()) <= boundary_tolerance ||
           std::abs(p.x() - bbox_hi_.x()) <= boundary_tolerance ||
           std::abs(p.y() - bbox_lo_.y()) <= boundary_tolerance ||
           std::abs(p.y() - bbox_hi_.y()) <= boundary_tolerance;
  }

  double total_volume() const {
    double v = 0.0;
    for (const auto& c : cells_) v += c.volume;
    return v;
  }

  /// Nodes of a cell in loop order.
  std::vector<Vec2> cell_points(int c) const {
    std::vector<Vec2> pts;
    for (int n : cells_[c].nodes) pts.push_back(nodes_[n]);
    return pts;
  }

  /// Original loops, e.g. for re-meshing after a node map.
  std::vector<std::vector<int>> cell_loops() const {
    std::vector<std::vector<int>> loops;
    loops.reserve(cells_.size());
    for (const auto& c : cells_) loops.push_back(c.nodes);
    return loops;
  }

 private:
  BoundaryTag classify_boundary(const Face& f) const {
    const Vec2& a = nodes_[f.nodes[0]];
    const Vec2& b = nodes_[f.nodes[1]];
    auto near = [](double v, double t) { return std::abs(v - t) <= boundary_tolerance; };
    if (near(a.x(), bbox_lo_.x()) && near(b.x(), bbox_lo_.x())) return BoundaryTag::left;
    if (near(a.x(), bbox_hi_.x()) && near(b.x(), bbox_hi_.x())) return BoundaryTag::right;
    if (near(a.y(), bbox_lo_.y()) && near(b.y(), bbox_lo_.y())) return BoundaryTag::bottom;
    if (near(a.y(), bbox_hi_.y()) && near(b.y(), bbox_hi_.y())) return BoundaryTag::top;
    return BoundaryTag::other;
  }

  std::vector<Vec2> nodes_;
  std::vector<Face> faces_;
  std::vector<Cell> cells_;
  std::vector<std::vector<int>> node_faces_;
  std::vector<std::vector<int>> node_cells_;
  Vec2 bbox_lo_ = Vec2::Zero();
  Vec2 bbox_hi_ = Vec2::Zero();
};

inline PolyMesh build_mesh(std::vector<Vec2> nodes, std::vector<std::vector<int>> cell_loops) {
  return PolyMesh(std::move(nodes), std::move(cell_loops));
}

/// Largest distance between two nodes of the cell.
inline double cell_diameter(const PolyMesh& mesh, int cell) {
  const auto& nodes = mesh.cell(cell).nodes;
  double d2 = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j = i + 1; j < nodes.size(); ++j)
      d2 = std::max(d2, (mesh.node(nodes[i]) - mesh.node(nodes[j])).squaredNorm());
  return std::sqrt(d2);
}

inline double max_cell_diameter(const PolyMesh& mesh) {
  double h = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) h = std::max(h, cell_diameter(mesh, c));
  return h;
}

/// Half of a face seen from one of its vertices and one adjacent cell.
struct SubFace {
  int cell = -1;
  int face = -1;
  int local_face = -1;  // index of the face inside the cell loop
  double measure = 0.0;
  Vec2 midpoint = Vec2::Zero();
  std::array<Vec2, 2> quad_points{Vec2::Zero(), Vec2::Zero()};
  std::array<double, 2> quad_weights{0.5, 0.5};
  Vec2 outward_normal = Vec2::Zero();  // n_{K,sigma}
};

/// Cells and sub-faces around one mesh vertex.
struct InteractionRegion {
  int vertex = -1;
  std::vector<int> cells;
  std::vector<int> faces;
  std::vector<SubFace> subfaces;
  bool boundary = false;
};

/// One interaction region per node. Sub-face measure is half the edge
/// length; the two quadrature points are the 2-point Gauss points of the
/// half edge, so their weighted average is the half-edge midpoint.
inline std::vector<InteractionRegion> interaction_regions(const PolyMesh& mesh) {
  static const double g = 0.5 / std::sqrt(3.0);
  std::vector<InteractionRegion> regions(mesh.num_nodes());
  for (int s = 0; s < mesh.num_nodes(); ++s) {
    InteractionRegion& r = regions[s];
    r.vertex = s;
    const Vec2& xs = mesh.node(s);
    auto cells = mesh.node_cells(s);
    r.cells.assign(cells.begin(), cells.end());
    std::sort(r.cells.begin(), r.cells.end());
    auto faces = mesh.node_faces(s);
    r.faces.assign(faces.begin(), faces.end());
    std::sort(r.faces.begin(), r.faces.end());
    for (int f : r.faces) {
      const Face& face = mesh.face(f);
      if (face.is_boundary()) r.boundary = true;
      const Vec2 mid = 0.5 * (xs + face.centroid);
      for (int side = 0; side < 2; ++side) {
        const int c = face.cells[side];
        if (c < 0) continue;
        SubFace sf;
        sf.cell = c;
        sf.face = f;
        const Cell& cell = mesh.cell(c);
        for (int lf = 0; lf < cell.size(); ++lf)
          if (cell.faces[lf] == f) sf.local_face = lf;
        sf.measure = 0.5 * face.area;
        sf.midpoint = mid;
        const Vec2 d = face.centroid - xs;
        sf.quad_points = {xs + (0.5 - g) * d, xs + (0.5 + g) * d};
        sf.outward_normal = (side == 0 ? 1.0 : -1.0) * face.normal;
        r.subfaces.push_back(sf);
      }
    }
  }
  return regions;
}

}  // namespace polyelast
