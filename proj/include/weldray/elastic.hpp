#pragma once

#include <array>
#include <map>
#include <string>

#include <Eigen/Dense>

namespace weldray {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Voigt6 = Eigen::Matrix<double, 6, 6>;

// Voigt order is 11, 22, 33, 23, 13, 12. Tensor axes 1 and 2 span the
// weld cross-section (x and z), axis 3 runs along the weld bead.
constexpr int voigt_index(int i, int j) {
  if (i == j) return i;
  const int s = i + j;
  return s == 3 ? 3 : (s == 2 ? 4 : 5);
}

struct ElasticMaterial {
  std::string name;
  Voigt6 stiffness_gpa = Voigt6::Zero();
  double density = 0.0;  // kg/m^3
  // qL attenuation keyed by frequency in MHz, dB/mm.
  std::map<double, double> attenuation_db_per_mm;

  // Throws ContractViolation when the stiffness is not symmetric and
  // positive definite, the density is not positive or an attenuation
  // value is negative.
  void validate() const;

  bool is_isotropic(double rel_tol = 1e-9) const;

  // Coefficient at `freq_mhz`. Unlisted frequencies use the nearest listed
  // one scaled by (f / f_listed)^exponent.
  double attenuation_at(double freq_mhz, double exponent = 0.0) const;

  // Density-normalised stiffness C/rho in mm^2/us^2, i.e. (km/s)^2.
  Voigt6 normalized_mm_us() const { return stiffness_gpa * (1.0e3 / density); }
};

ElasticMaterial make_isotropic(std::string name, double vl_m_s, double vt_m_s,
                               double density);

// Orthotropic stiffness from the nine constants in the order
// C11 C22 C33 C23 C13 C12 C44 C55 C66.
Voigt6 orthotropic_stiffness(const std::array<double, 9>& c);

// Nickel alloy 182 weld metal.
ElasticMaterial alloy182();

// Full fourth-rank component C_ijkl (0-based indices) of a Voigt matrix.
inline double tensor_component(const Voigt6& c, int i, int j, int k, int l) {
  return c(voigt_index(i, j), voigt_index(k, l));
}

// Rotation by `theta` about tensor axis 3; takes axis 1 to (cos, sin, 0).
Mat3 rotation_about_bead(double theta);

// Bond transformation of the stiffness for a rotation of `theta` about
// the weld-bead axis.
Voigt6 rotate_stiffness(const Voigt6& c, double theta);

// Gamma_ik = a_ijkl n_j n_l in (m/s)^2 for the material rotated by theta.
Mat3 christoffel_matrix(const ElasticMaterial& material, double theta,
                        const Vec3& n);

enum class WaveMode { qL = 0, qT1 = 1, qT2 = 2 };

struct ChristoffelSolution {
  Vec3 direction;
  std::array<double, 3> eigenvalues{};  // (m/s)^2, descending
  std::array<Vec3, 3> polarizations;    // matching eigenvalues
  std::array<WaveMode, 3> modes{WaveMode::qL, WaveMode::qT1, WaveMode::qT2};
  // degenerate[k] flags eigenvalues k and k+1 within 1e-6 relative.
  std::array<bool, 2> degenerate{false, false};

  double phase_velocity(WaveMode m) const;
};

ChristoffelSolution solve_christoffel(const ElasticMaterial& material,
                                      double theta, const Vec3& n);

// V_i = a_ijkl p_l g_j g_k. p in s/m, result in m/s. Throws
// ContractViolation when (p, g) does not satisfy G = 1 within 1e-6.
Vec3 energy_velocity(const ElasticMaterial& material, double theta,
                     const Vec3& p, const Vec3& g);

}  // namespace weldray
