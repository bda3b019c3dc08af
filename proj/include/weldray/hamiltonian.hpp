#pragma once

#include <array>
#include <vector>

#include "weldray/elastic.hpp"
#include "weldray/specimen.hpp"

namespace weldray {

// Christoffel matrix of an unrotated material restricted to slowness
// vectors in the section plane (third component zero), in mm^2/us^2.
class PlaneChristoffel {
 public:
  explicit PlaneChristoffel(const ElasticMaterial& material);

  Mat3 gamma(const Vec2& q) const;
  // d Gamma / d q_k.
  Mat3 gamma_derivative(int k, const Vec2& q) const;

  struct QL {
    double G = 0.0;             // largest eigenvalue
    Vec2 grad = Vec2::Zero();   // dG/dq
    Vec3 polarization = Vec3::Zero();
  };
  QL qL(const Vec2& q) const;

 private:
  Mat3 a11_, a22_, b12_;
};

// G(x, p) for the qL branch and its first derivatives.
struct HamiltonianEval {
  double G = 0.0;
  Vec2 Gx = Vec2::Zero();
  Vec2 Gp = Vec2::Zero();
  Vec3 polarization = Vec3::Zero();  // tensor frame
  double theta = 0.0;
};

// Second derivatives; xp(i, j) = d^2 G / dx_i dp_j.
struct HamiltonianHessian {
  Mat2 xx = Mat2::Zero();
  Mat2 xp = Mat2::Zero();
  Mat2 pp = Mat2::Zero();
};

// Read-only, per-frequency view of a specimen used by the ray engine.
// G(x, p) = G0(R(-theta(x)) p): the slowness is rotated into the grain
// frame instead of rotating the stiffness.
class Medium {
 public:
  Medium(Specimen specimen, double frequency_mhz,
         double attenuation_exponent = 0.0);

  const Specimen& specimen() const { return specimen_; }
  double frequency_mhz() const { return frequency_; }

  HamiltonianEval eval(int region, const Vec2& x, const Vec2& p) const;

  // Central differences of the analytic first derivatives, relative
  // step 1e-6.
  HamiltonianHessian hessian(int region, const Vec2& x, const Vec2& p) const;

  // qL phase slowness magnitude along unit direction n.
  double slowness(int region, const Vec2& x, const Vec2& n) const;

  bool uniform(int region) const { return uniform_[region]; }
  double attenuation_db_per_mm(int region) const { return attenuation_[region]; }
  double density(int region) const { return specimen_.material_of(region).density; }

 private:
  Specimen specimen_;
  double frequency_;
  std::vector<PlaneChristoffel> christoffel_;  // per region
  std::vector<char> uniform_;
  std::vector<char> isotropic_;
  std::vector<double> attenuation_;
};

}  // namespace weldray
