#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <variant>
#include <vector>

#include "weldray/elastic.hpp"

namespace weldray {

// Grain angle and its spatial gradient (rad, rad/mm). Angles are
// measured from +x towards +z and are only meaningful modulo pi.
struct OrientationSample {
  double theta = 0.0;
  Vec2 grad = Vec2::Zero();
};

// Closed-form V-weld orientation law. D and alpha give the chamfer
// geometry, T and eta control how fast grains turn towards the walls.
struct OgilvyParams {
  double D_mm = 4.25;
  double alpha_deg = 17.8;
  double T = 0.75;
  double eta = 1.0;

  void validate() const;
};

double ogilvy_angle(const OgilvyParams& params, double x_mm, double z_mm);

// Analytic gradient. At x = 0 the one-sided limit is returned; the
// stiffness field is continuous there because +pi/2 and -pi/2 describe the
// same grain axis.
OrientationSample ogilvy_sample(const OgilvyParams& params, double x_mm,
                                double z_mm);

// Rectangular lattice of grain angles, node (ix, iz) at
// origin + (ix * dx, iz * dz), stored with x varying fastest.
struct OrientationGrid {
  Vec2 origin = Vec2::Zero();
  Vec2 spacing = Vec2::Ones();
  int nx = 0;
  int nz = 0;
  std::vector<double> angles;  // radians in (-pi/2, pi/2]
  double smoothing_radius_mm = 0.0;
  double lipschitz = 0.0;  // max |d theta| / distance between adjacent nodes

  double at(int ix, int iz) const { return angles[iz * nx + ix]; }
  double& at(int ix, int iz) { return angles[iz * nx + ix]; }
  Vec2 max_corner() const {
    return origin + Vec2(spacing.x() * (nx - 1), spacing.y() * (nz - 1));
  }
  bool contains(double x, double z) const;
  void validate() const;
};

// Bilinear interpolation. Throws DomainError outside the lattice hull.
double grid_angle(const OrientationGrid& grid, double x_mm, double z_mm);

// Same as grid_angle with the in-cell gradient; points outside the hull
// are clamped onto it.
OrientationSample grid_sample(const OrientationGrid& grid, double x_mm,
                              double z_mm);

// Gaussian smoothing with sigma = radius (radius 0 returns the input).
OrientationGrid smooth_grid(const OrientationGrid& grid, double radius_mm);

// Largest |d theta| per unit length over adjacent node pairs, taking the
// pi-periodicity of grain axes into account.
double lattice_lipschitz(const OrientationGrid& grid);

// CSV with header x_mm,z_mm,theta_deg; rows may come in any order but must
// fill a rectangular lattice.
OrientationGrid read_orientation_csv(std::istream& in);
OrientationGrid read_orientation_csv(const std::filesystem::path& path);
void write_orientation_csv(std::ostream& out, const OrientationGrid& grid);

struct ConstantOrientation {
  double theta = 0.0;
};

struct OgilvyOrientation {
  OgilvyParams params;
};

struct GridOrientation {
  std::shared_ptr<const OrientationGrid> grid;
};

using OrientationSource =
    std::variant<ConstantOrientation, OgilvyOrientation, GridOrientation>;

OrientationSample sample_orientation(const OrientationSource& source,
                                     const Vec2& x);

inline bool is_uniform(const OrientationSource& source) {
  return std::holds_alternative<ConstantOrientation>(source);
}

}  // namespace weldray
