#pragma once

#include <array>
#include <functional>
#include <string>

#include "polyelast/mesh.hpp"

namespace polyelast {

using VectorField = std::function<Vec2(const Vec2&)>;

inline VectorField zero_field() {
  return [](const Vec2&) { return Vec2::Zero().eval(); };
}

enum class BcKind : std::uint8_t { dirichlet, neumann };

/// Condition on one boundary side. Each component is either a prescribed
/// displacement or a prescribed traction; `value` returns the displacement
/// for Dirichlet components and the traction for Neumann ones.
struct SideCondition {
  std::array<BcKind, 2> kind{BcKind::dirichlet, BcKind::dirichlet};
  VectorField value = zero_field();

  bool dirichlet(int comp) const { return kind[comp] == BcKind::dirichlet; }
  bool any_dirichlet() const { return dirichlet(0) || dirichlet(1); }
  bool any_neumann() const { return !dirichlet(0) || !dirichlet(1); }
};

class BoundaryConditions {
 public:
  BoundaryConditions() = default;

  /// Prescribed displacement g on every boundary face.
  static BoundaryConditions dirichlet_all(VectorField g) {
    BoundaryConditions bc;
    for (auto& s : bc.sides_) s = {{BcKind::dirichlet, BcKind::dirichlet}, g};
    return bc;
  }

  /// Clamped left and right sides, traction-free top and bottom.
  static BoundaryConditions clamped_sides() {
    BoundaryConditions bc = dirichlet_all(zero_field());
    bc.set(BoundaryTag::top, {{BcKind::neumann, BcKind::neumann}, zero_field()});
    bc.set(BoundaryTag::bottom, {{BcKind::neumann, BcKind::neumann}, zero_field()});
    return bc;
  }

  void set(BoundaryTag tag, SideCondition c) { sides_[index(tag)] = std::move(c); }
  const SideCondition& at(BoundaryTag tag) const { return sides_[index(tag)]; }
  const SideCondition& at_face(const Face& f) const { return at(f.tag); }

 private:
  static int index(BoundaryTag tag) {
    if (tag == BoundaryTag::interior) throw ParameterError("no boundary condition on interior faces");
    return static_cast<int>(tag) - 1;
  }
  std::array<SideCondition, 5> sides_{};
};

}  // namespace polyelast
