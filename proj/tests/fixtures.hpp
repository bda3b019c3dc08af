#pragma once

#include <string>

#include "weldray/io.hpp"

namespace weldray::testing {

inline std::vector<Vec2> rectangle(double x0, double x1, double z0, double z1) {
  return {{x0, z0}, {x1, z0}, {x1, z1}, {x0, z1}};
}

// One-region block of `material` between z = 0 and z = thickness.
inline Specimen block(const ElasticMaterial& material, double thickness = 30.0,
                      double half_width = 200.0, OrientationSource orientation = ConstantOrientation{},
                      RegionKind kind = RegionKind::ferritic) {
  Specimen s;
  s.name = "block";
  s.materials = {material};
  s.inner_z = 0.0;
  s.outer_z = thickness;
  s.regions.push_back(
      Region{"block", kind, rectangle(-half_width, half_width, 0.0, thickness), 0, orientation});
  return s;
}

inline ElasticMaterial ferritic_steel() { return make_isotropic("ferritic", 5900.0, 3230.0, 7850.0); }
inline ElasticMaterial stainless_steel() { return make_isotropic("stainless", 5800.0, 3100.0, 7900.0); }

inline Specimen dmw_specimen(const std::string& which = "ogilvy") {
  return load_specimen(std::string(WELDRAY_DATA_DIR) + "/specimens/dmw_" + which + ".json");
}

}  // namespace weldray::testing
