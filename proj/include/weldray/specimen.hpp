#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "weldray/elastic.hpp"
#include "weldray/orientation.hpp"

namespace weldray {

enum class RegionKind { ferritic, stainless, buttering, weld };

const char* to_string(RegionKind kind);
RegionKind region_kind_from_string(const std::string& s);

struct Region {
  std::string name;
  RegionKind kind = RegionKind::weld;
  std::vector<Vec2> polygon;  // (x, z) mm, either winding
  int material = 0;           // index into Specimen::materials
  OrientationSource orientation = ConstantOrientation{};
};

struct BoundaryHit {
  Vec2 point;
  Vec2 normal;     // unit, pointing out of the region that was left
  double t = 0.0;  // fraction along the query segment
  int edge = -1;
};

// Planar weld cross-section. x runs across the weld with the root centre
// at the origin, z runs up from the inner (root side) surface.
struct Specimen {
  std::string name;
  std::vector<ElasticMaterial> materials;
  std::vector<Region> regions;  // ordered; lower index wins on shared edges
  double inner_z = 0.0;
  double outer_z = 0.0;

  double thickness() const { return outer_z - inner_z; }

  // Throws ContractViolation on invalid materials, self-intersecting or
  // overlapping polygons, or inconsistent surface levels.
  void validate() const;

  // Lowest-index region containing x (edges inclusive), or -1.
  int locate(const Vec2& x) const;
  bool region_contains(int region, const Vec2& x) const;

  // First crossing of segment a->b with the boundary of `region`.
  std::optional<BoundaryHit> first_crossing(int region, const Vec2& a,
                                            const Vec2& b) const;

  // True when the edge lies on the inner or outer surface.
  bool is_surface_edge(int region, int edge) const;

  const ElasticMaterial& material_of(int region) const {
    return materials[regions[region].material];
  }
};

struct OrientationQuery {
  int region = -1;
  RegionKind kind = RegionKind::weld;
  const ElasticMaterial* material = nullptr;
  double theta = 0.0;  // radians; 0 for isotropic materials
};

// Throws DomainError when the point is outside every region.
OrientationQuery orientation_at(const Specimen& specimen, double x_mm,
                                double z_mm);

// d a_ijkl / d x_n of the density-normalised rotated stiffness in
// mm^2/us^2 per mm, index 0 for x and 1 for z.
using StiffnessGradient = std::array<Voigt6, 2>;

// Central differences with step h. Empty when the stencil leaves the
// region containing (x, z); the ray engine then treats the crossing as an
// interface event.
std::optional<StiffnessGradient> stiffness_gradient(const Specimen& specimen,
                                                    double x_mm, double z_mm,
                                                    double h_mm = 0.05);

}  // namespace weldray
