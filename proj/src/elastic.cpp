#include "weldray/elastic.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "weldray/errors.hpp"

namespace weldray {

namespace {

Voigt6 normalized_si(const ElasticMaterial& m) {
  return m.stiffness_gpa * (1.0e9 / m.density);
}

void fix_sign(Vec3& v) {
  for (int i = 0; i < 3; ++i) {
    if (std::abs(v[i]) > 1e-12) {
      if (v[i] < 0) v = -v;
      return;
    }
  }
}

void require_unit(const Vec3& n) {
  if (!n.allFinite() || std::abs(n.norm() - 1.0) > 1e-9) {
    throw ContractViolation(
        fmt::format("direction must be a unit vector, |n| = {}", n.norm()));
  }
}

}  // namespace

void ElasticMaterial::validate() const {
  const double scale = stiffness_gpa.cwiseAbs().maxCoeff();
  if (!(scale > 0) || !stiffness_gpa.allFinite()) {
    throw ContractViolation(fmt::format("material '{}': empty stiffness", name));
  }
  if ((stiffness_gpa - stiffness_gpa.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * scale) {
    throw ContractViolation(
        fmt::format("material '{}': stiffness is not symmetric", name));
  }
  Eigen::SelfAdjointEigenSolver<Voigt6> es(stiffness_gpa,
                                           Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 0) {
    throw ContractViolation(
        fmt::format("material '{}': stiffness is not positive definite", name));
  }
  if (!(density > 0)) {
    throw ContractViolation(
        fmt::format("material '{}': density must be positive", name));
  }
  for (const auto& [f, a] : attenuation_db_per_mm) {
    if (!(f > 0) || !(a >= 0)) {
      throw ContractViolation(fmt::format(
          "material '{}': invalid attenuation {} dB/mm at {} MHz", name, a, f));
    }
  }
}

bool ElasticMaterial::is_isotropic(double rel_tol) const {
  const double c11 = stiffness_gpa(0, 0);
  const double c44 = stiffness_gpa(3, 3);
  Voigt6 iso = Voigt6::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) iso(i, j) = c11 - 2 * c44;
    iso(i, i) = c11;
    iso(i + 3, i + 3) = c44;
  }
  return (stiffness_gpa - iso).cwiseAbs().maxCoeff() <= rel_tol * c11;
}

double ElasticMaterial::attenuation_at(double freq_mhz, double exponent) const {
  if (attenuation_db_per_mm.empty()) return 0.0;
  auto best = attenuation_db_per_mm.begin();
  for (auto it = attenuation_db_per_mm.begin();
       it != attenuation_db_per_mm.end(); ++it) {
    if (std::abs(it->first - freq_mhz) < std::abs(best->first - freq_mhz)) {
      best = it;
    }
  }
  if (best->first == freq_mhz || exponent == 0.0) return best->second;
  return best->second * std::pow(freq_mhz / best->first, exponent);
}

ElasticMaterial make_isotropic(std::string name, double vl_m_s, double vt_m_s,
                               double density) {
  ElasticMaterial m;
  m.name = std::move(name);
  m.density = density;
  const double c11 = density * vl_m_s * vl_m_s * 1e-9;
  const double c44 = density * vt_m_s * vt_m_s * 1e-9;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) m.stiffness_gpa(i, j) = c11 - 2 * c44;
    m.stiffness_gpa(i, i) = c11;
    m.stiffness_gpa(i + 3, i + 3) = c44;
  }
  return m;
}

Voigt6 orthotropic_stiffness(const std::array<double, 9>& c) {
  Voigt6 s = Voigt6::Zero();
  s(0, 0) = c[0];
  s(1, 1) = c[1];
  s(2, 2) = c[2];
  s(1, 2) = s(2, 1) = c[3];
  s(0, 2) = s(2, 0) = c[4];
  s(0, 1) = s(1, 0) = c[5];
  s(3, 3) = c[6];
  s(4, 4) = c[7];
  s(5, 5) = c[8];
  return s;
}

ElasticMaterial alloy182() {
  ElasticMaterial m;
  m.name = "alloy182";
  m.stiffness_gpa = orthotropic_stiffness(
      {236.1, 255.8, 255.8, 130.5, 137.9, 135.4, 81.4, 111.4, 111.9});
  m.density = 8260.0;
  m.attenuation_db_per_mm = {{2.0, 0.292}};
  return m;
}

Mat3 rotation_about_bead(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Mat3 r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

Voigt6 rotate_stiffness(const Voigt6& c, double theta) {
  const Mat3 r = rotation_about_bead(theta);
  // Bond matrix M with C' = M C M^T.
  Voigt6 m;
  constexpr int pair[6][2] = {{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}};
  for (int row = 0; row < 6; ++row) {
    const int i = pair[row][0];
    const int j = pair[row][1];
    for (int col = 0; col < 6; ++col) {
      const int k = pair[col][0];
      const int l = pair[col][1];
      m(row, col) = (k == l) ? r(i, k) * r(j, l)
                             : r(i, k) * r(j, l) + r(i, l) * r(j, k);
    }
  }
  Voigt6 out = m * c * m.transpose();
  return 0.5 * (out + out.transpose());
}

Mat3 christoffel_matrix(const ElasticMaterial& material, double theta,
                        const Vec3& n) {
  require_unit(n);
  const Voigt6 a = rotate_stiffness(normalized_si(material), theta);
  Mat3 gamma = Mat3::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int k = i; k < 3; ++k) {
      double sum = 0.0;
      for (int j = 0; j < 3; ++j) {
        for (int l = 0; l < 3; ++l) {
          sum += tensor_component(a, i, j, k, l) * n[j] * n[l];
        }
      }
      gamma(i, k) = gamma(k, i) = sum;
    }
  }
  return gamma;
}

double ChristoffelSolution::phase_velocity(WaveMode m) const {
  return std::sqrt(eigenvalues[static_cast<int>(m)]);
}

ChristoffelSolution solve_christoffel(const ElasticMaterial& material,
                                      double theta, const Vec3& n) {
  const Mat3 gamma = christoffel_matrix(material, theta, n);
  Eigen::SelfAdjointEigenSolver<Mat3> es(gamma);
  ChristoffelSolution sol;
  sol.direction = n;
  // Eigen sorts ascending.
  for (int k = 0; k < 3; ++k) {
    sol.eigenvalues[k] = es.eigenvalues()[2 - k];
    sol.polarizations[k] = es.eigenvectors().col(2 - k).normalized();
    fix_sign(sol.polarizations[k]);
  }
  for (int k = 0; k < 2; ++k) {
    const double gap = sol.eigenvalues[k] - sol.eigenvalues[k + 1];
    sol.degenerate[k] = gap < 1e-6 * std::abs(sol.eigenvalues[k]);
  }
  return sol;
}

Vec3 energy_velocity(const ElasticMaterial& material, double theta,
                     const Vec3& p, const Vec3& g) {
  const Voigt6 a = rotate_stiffness(normalized_si(material), theta);
  double gm = 0.0;
  Vec3 v = Vec3::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) {
        for (int l = 0; l < 3; ++l) {
          const double aijkl = tensor_component(a, i, j, k, l);
          gm += aijkl * p[j] * p[l] * g[i] * g[k];
          v[i] += aijkl * p[l] * g[j] * g[k];
        }
      }
    }
  }
  if (!(std::abs(gm - 1.0) <= 1e-6) || std::abs(g.norm() - 1.0) > 1e-9) {
    throw ContractViolation(fmt::format(
        "slowness/polarisation pair off the slowness surface (G = {})", gm));
  }
  return v;
}

}  // namespace weldray
