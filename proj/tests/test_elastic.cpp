#include <doctest.h>

#include <cmath>
#include <numbers>

#include "weldray/elastic.hpp"
#include "weldray/errors.hpp"
#include "weldray/io.hpp"

using namespace weldray;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// C'_ijkl = r_ip r_jq r_kr r_ls C_pqrs, summed term by term.
double rotated_component(const Voigt6& c, double theta, int i, int j, int k, int l) {
  const Mat3 r = rotation_about_bead(theta);
  double s = 0.0;
  for (int p = 0; p < 3; ++p)
    for (int q = 0; q < 3; ++q)
      for (int m = 0; m < 3; ++m)
        for (int n = 0; n < 3; ++n)
          s += r(i, p) * r(j, q) * r(k, m) * r(l, n) * tensor_component(c, p, q, m, n);
  return s;
}

// Largest Christoffel eigenvalue of G(p) = lambda_max(a_ijkl p_j p_l).
double g_of_p(const ElasticMaterial& m, double theta, const Vec3& p) {
  const double norm = p.norm();
  const Mat3 gamma = christoffel_matrix(m, theta, p / norm) * norm * norm;
  return Eigen::SelfAdjointEigenSolver<Mat3>(gamma).eigenvalues().maxCoeff();
}

}  // namespace

TEST_CASE("bundled weld material reproduces the published constants") {
  const auto m = load_material(WELDRAY_DATA_DIR "/materials/alloy182_weld.json");
  const double table[9] = {236.1, 255.8, 255.8, 130.5, 137.9, 135.4, 81.4, 111.4, 111.9};
  const auto& c = m.stiffness_gpa;
  CHECK(c(0, 0) == table[0]);
  CHECK(c(1, 1) == table[1]);
  CHECK(c(2, 2) == table[2]);
  CHECK(c(1, 2) == table[3]);
  CHECK(c(0, 2) == table[4]);
  CHECK(c(0, 1) == table[5]);
  CHECK(c(3, 3) == table[6]);
  CHECK(c(4, 4) == table[7]);
  CHECK(c(5, 5) == table[8]);
  CHECK(m.density == 8260.0);
  CHECK(m.attenuation_at(2.0) == 0.292);
  CHECK(load_material(WELDRAY_DATA_DIR "/materials/alloy182_buttering.json").attenuation_at(2.0) ==
        0.165);
  CHECK(m.stiffness_gpa == alloy182().stiffness_gpa);
}

TEST_CASE("qL velocities along the principal axes") {
  const auto m = alloy182();
  const auto s1 = solve_christoffel(m, 0.0, Vec3(1, 0, 0));
  const auto s2 = solve_christoffel(m, 0.0, Vec3(0, 1, 0));
  CHECK(s1.phase_velocity(WaveMode::qL) == doctest::Approx(std::sqrt(236.1e9 / 8260)).epsilon(1e-12));
  CHECK(s2.phase_velocity(WaveMode::qL) == doctest::Approx(std::sqrt(255.8e9 / 8260)).epsilon(1e-12));
  CHECK(s1.phase_velocity(WaveMode::qL) == doctest::Approx(5346.4).epsilon(1e-4));
  CHECK(s2.phase_velocity(WaveMode::qL) == doctest::Approx(5565.0).epsilon(1e-4));
}

TEST_CASE("Bond rotation matches the term-by-term tensor rotation") {
  const auto c = alloy182().stiffness_gpa;
  for (double deg : {0.0, 17.0, 45.0, -63.0, 90.0, 133.0}) {
    const Voigt6 r = rotate_stiffness(c, deg * kDeg);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l)
            CHECK(tensor_component(r, i, j, k, l) ==
                  doctest::Approx(rotated_component(c, deg * kDeg, i, j, k, l)).epsilon(1e-12));
  }
}

TEST_CASE("rotation properties") {
  const auto c = alloy182().stiffness_gpa;
  CHECK((rotate_stiffness(c, 0.0) - c).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((rotate_stiffness(c, std::numbers::pi) - c).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((rotate_stiffness(rotate_stiffness(c, 0.7), -0.7) - c).cwiseAbs().maxCoeff() < 1e-10);
  const Voigt6 r = rotate_stiffness(c, 0.4);
  CHECK((r - r.transpose()).cwiseAbs().maxCoeff() == 0.0);
  // The bead-axis stiffness is invariant.
  CHECK(r(2, 2) == doctest::Approx(c(2, 2)));
}

TEST_CASE("rotating the material equals rotating the direction") {
  const auto m = alloy182();
  const double theta = 0.6;
  for (double a : {0.0, 0.3, 1.1, 2.5}) {
    const Vec3 n(std::cos(a), std::sin(a), 0.0);
    const Vec3 n_grain = rotation_about_bead(-theta) * n;
    CHECK(solve_christoffel(m, theta, n).eigenvalues[0] ==
          doctest::Approx(solve_christoffel(m, 0.0, n_grain).eigenvalues[0]).epsilon(1e-12));
  }
}

TEST_CASE("isotropic Christoffel solution") {
  const auto m = make_isotropic("steel", 5900.0, 3230.0, 7850.0);
  CHECK(m.is_isotropic());
  for (double a : {0.0, 0.4, 1.3}) {
    const auto s = solve_christoffel(m, 0.25, Vec3(std::cos(a), std::sin(a), 0.0));
    CHECK(s.phase_velocity(WaveMode::qL) == doctest::Approx(5900.0).epsilon(1e-12));
    CHECK(s.phase_velocity(WaveMode::qT1) == doctest::Approx(3230.0).epsilon(1e-12));
    CHECK(s.phase_velocity(WaveMode::qT2) == doctest::Approx(3230.0).epsilon(1e-12));
    CHECK_FALSE(s.degenerate[0]);
    CHECK(s.degenerate[1]);
    // Longitudinal polarisation is along the propagation direction.
    CHECK(std::abs(s.polarizations[0].dot(s.direction)) == doctest::Approx(1.0));
  }
}

TEST_CASE("eigenpairs satisfy the Christoffel equation") {
  const auto m = alloy182();
  for (double theta : {-1.2, 0.0, 0.5}) {
    for (double a : {0.1, 0.9, 2.0}) {
      const Vec3 n(std::cos(a), std::sin(a), 0.0);
      const auto s = solve_christoffel(m, theta, n);
      const Mat3 g = christoffel_matrix(m, theta, n);
      CHECK(s.eigenvalues[0] >= s.eigenvalues[1]);
      CHECK(s.eigenvalues[1] >= s.eigenvalues[2]);
      for (int k = 0; k < 3; ++k) {
        const Vec3& v = s.polarizations[k];
        CHECK((g * v - s.eigenvalues[k] * v).norm() < 1e-6 * s.eigenvalues[0]);
        CHECK(v.norm() == doctest::Approx(1.0));
      }
      CHECK(std::abs(g.trace() - (s.eigenvalues[0] + s.eigenvalues[1] + s.eigenvalues[2])) <
            1e-8 * g.trace());
    }
  }
}

TEST_CASE("energy velocity equals the slowness gradient of G / 2") {
  const auto m = alloy182();
  const double theta = 0.8;
  for (double a : {0.2, 1.0, 1.9}) {
    const Vec3 n(std::cos(a), std::sin(a), 0.0);
    const auto s = solve_christoffel(m, theta, n);
    const Vec3 p = n / s.phase_velocity(WaveMode::qL);
    const Vec3 v = energy_velocity(m, theta, p, s.polarizations[0]);
    Vec3 fd;
    for (int k = 0; k < 3; ++k) {
      const double h = 1e-6 * p.norm();
      Vec3 dp = Vec3::Zero();
      dp[k] = h;
      fd[k] = 0.25 * (g_of_p(m, theta, p + dp) - g_of_p(m, theta, p - dp)) / h;
    }
    CHECK((v - fd).norm() < 1e-5 * v.norm());
    CHECK(v.dot(p) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(v.norm() >= s.phase_velocity(WaveMode::qL) * (1 - 1e-12));
  }
}

TEST_CASE("contract violations") {
  auto m = alloy182();
  CHECK_THROWS_AS(christoffel_matrix(m, 0.0, Vec3(1, 1, 0)), ContractViolation);
  CHECK_THROWS_AS(energy_velocity(m, 0.0, Vec3(1, 0, 0), Vec3(1, 0, 0)), ContractViolation);
  auto bad = m;
  bad.stiffness_gpa(0, 1) += 1.0;
  CHECK_THROWS_AS(bad.validate(), ContractViolation);
  bad = m;
  bad.density = 0.0;
  CHECK_THROWS_AS(bad.validate(), ContractViolation);
  bad = m;
  bad.stiffness_gpa(3, 3) = -1.0;
  CHECK_THROWS_AS(bad.validate(), ContractViolation);
  bad = m;
  bad.attenuation_db_per_mm[1.0] = -0.1;
  CHECK_THROWS_AS(bad.validate(), ContractViolation);
}

TEST_CASE("attenuation lookup") {
  auto m = alloy182();
  CHECK(m.attenuation_at(2.0, 1.0) == 0.292);
  CHECK(m.attenuation_at(1.0) == 0.292);
  CHECK(m.attenuation_at(1.0, 1.0) == doctest::Approx(0.146));
  CHECK(m.attenuation_at(4.0, 2.0) == doctest::Approx(0.292 * 4));
}

TEST_CASE("material json round trip, 21 constants") {
  const auto m = alloy182();
  const auto back = material_from_json(material_to_json(m), "roundtrip");
  CHECK(back.stiffness_gpa == m.stiffness_gpa);
  CHECK(back.density == m.density);
  CHECK(back.attenuation_db_per_mm == m.attenuation_db_per_mm);
  Json j = material_to_json(m);
  j["voigt"].erase(0);
  CHECK_THROWS_AS(material_from_json(j, "short"), ConfigError);
}
