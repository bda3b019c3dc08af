#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "weldray/errors.hpp"
#include "weldray/orientation.hpp"

using namespace weldray;

namespace {

constexpr double kPi = std::numbers::pi;

// Independent scalar evaluation of the closed-form law.
double law(double x, double z, double D = 4.25, double alpha_deg = 17.8, double T = 0.75,
           double eta = 1.0) {
  const double c = T * (D + z * std::tan(alpha_deg * kPi / 180.0));
  if (x > 0) return std::atan(c / std::pow(x, eta));
  if (x < 0) return -std::atan(c / std::pow(-x, eta));
  return -kPi / 2;
}

OrientationGrid make_grid(int nx, int nz, double dx, double dz, Vec2 origin = Vec2::Zero()) {
  OrientationGrid g;
  g.origin = origin;
  g.spacing = Vec2(dx, dz);
  g.nx = nx;
  g.nz = nz;
  g.angles.assign(static_cast<std::size_t>(nx * nz), 0.0);
  return g;
}

}  // namespace

TEST_CASE("ogilvy law: centreline, antisymmetry and spot values") {
  const OgilvyParams p;
  for (double z = 0.0; z <= 30.0; z += 0.5) {
    CHECK(ogilvy_angle(p, 0.0, z) == -kPi / 2);
    for (double x : {0.01, 0.5, 3.0, 5.0, 12.0, 40.0}) {
      CHECK(std::abs(ogilvy_angle(p, -x, z) + ogilvy_angle(p, x, z)) <= 1e-12);
      CHECK(std::abs(ogilvy_angle(p, x, z) - law(x, z)) <= 1e-12);
    }
  }
  CHECK(ogilvy_angle(p, 5.0, 10.0) == doctest::Approx(0.841).epsilon(1e-3));
  OgilvyParams q{3.0, 25.0, 1.3, 1.7};
  CHECK(std::abs(ogilvy_angle(q, 2.5, 7.0) - law(2.5, 7.0, 3.0, 25.0, 1.3, 1.7)) <= 1e-12);
}

TEST_CASE("ogilvy law decreases towards zero away from the centreline") {
  const OgilvyParams p;
  for (double z : {0.0, 10.0, 30.0}) {
    double prev = ogilvy_angle(p, 1e-3, z);
    for (double x = 0.5; x < 500.0; x *= 1.5) {
      const double t = ogilvy_angle(p, x, z);
      CHECK(t < prev);
      prev = t;
    }
    CHECK(ogilvy_angle(p, 1e6, z) < 1e-4);
  }
}

TEST_CASE("ogilvy analytic gradient matches central differences") {
  const OgilvyParams p{4.25, 17.8, 0.75, 1.4};
  const double h = 1e-6;
  for (double x : {-7.0, -0.8, 0.3, 2.0, 9.0}) {
    for (double z : {0.5, 12.0, 28.0}) {
      const auto s = ogilvy_sample(p, x, z);
      const double gx = (ogilvy_angle(p, x + h, z) - ogilvy_angle(p, x - h, z)) / (2 * h);
      const double gz = (ogilvy_angle(p, x, z + h) - ogilvy_angle(p, x, z - h)) / (2 * h);
      CHECK(s.grad.x() == doctest::Approx(gx).epsilon(1e-6));
      CHECK(s.grad.y() == doctest::Approx(gz).epsilon(1e-6));
    }
  }
}

TEST_CASE("ogilvy parameter validation") {
  CHECK_THROWS_AS((OgilvyParams{0.0, 17.8, 0.75, 1.0}.validate()), ContractViolation);
  CHECK_THROWS_AS((OgilvyParams{4.25, 90.0, 0.75, 1.0}.validate()), ContractViolation);
  CHECK_THROWS_AS((OgilvyParams{4.25, 17.8, 0.0, 1.0}.validate()), ContractViolation);
  CHECK_THROWS_AS((OgilvyParams{4.25, 17.8, 0.75, -1.0}.validate()), ContractViolation);
  CHECK_NOTHROW(OgilvyParams{}.validate());
}

TEST_CASE("grid interpolation") {
  auto g = make_grid(3, 3, 1.0, 2.0, Vec2(-1.0, 0.0));
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (double& a : g.angles) a = u(rng);

  SUBCASE("nodes are returned exactly") {
    for (int iz = 0; iz < 3; ++iz)
      for (int ix = 0; ix < 3; ++ix)
        CHECK(grid_angle(g, -1.0 + ix, 2.0 * iz) == g.at(ix, iz));
  }
  SUBCASE("constant cell") {
    std::fill(g.angles.begin(), g.angles.end(), 0.3);
    CHECK(grid_angle(g, -0.5, 1.0) == doctest::Approx(0.3).epsilon(1e-14));
  }
  SUBCASE("bilinear closed form") {
    g.at(0, 0) = 0.0;
    g.at(1, 0) = 0.0;
    g.at(0, 1) = kPi / 4;
    g.at(1, 1) = kPi / 4;
    CHECK(grid_angle(g, -0.5, 1.0) == doctest::Approx(kPi / 8).epsilon(1e-14));
  }
  SUBCASE("grain axes are interpolated across +-90 degrees") {
    g.at(0, 0) = g.at(0, 1) = kPi / 2 - 0.02;
    g.at(1, 0) = g.at(1, 1) = -kPi / 2 + 0.02;
    const double mid = grid_angle(g, -0.5, 1.0);
    CHECK(std::abs(std::abs(mid) - kPi / 2) < 1e-12);
  }
  SUBCASE("outside the hull") {
    CHECK_THROWS_AS(grid_angle(g, -1.01, 1.0), DomainError);
    CHECK_THROWS_AS(grid_angle(g, 0.0, 4.01), DomainError);
    CHECK_NOTHROW(grid_angle(g, 1.0, 4.0));
    const auto clamped = grid_sample(g, 5.0, 9.0);
    CHECK(clamped.theta == g.at(2, 2));
  }
}

TEST_CASE("grid gradient matches central differences inside a cell") {
  auto g = make_grid(4, 4, 0.5, 0.5);
  for (int iz = 0; iz < 4; ++iz)
    for (int ix = 0; ix < 4; ++ix) g.at(ix, iz) = 0.1 * ix - 0.05 * iz + 0.02 * ix * iz;
  const double h = 1e-7;
  const auto s = grid_sample(g, 0.7, 0.9);
  CHECK(s.grad.x() ==
        doctest::Approx((grid_angle(g, 0.7 + h, 0.9) - grid_angle(g, 0.7 - h, 0.9)) / (2 * h))
            .epsilon(1e-6));
  CHECK(s.grad.y() ==
        doctest::Approx((grid_angle(g, 0.7, 0.9 + h) - grid_angle(g, 0.7, 0.9 - h)) / (2 * h))
            .epsilon(1e-6));
}

TEST_CASE("smoothing") {
  SUBCASE("radius 0 is the identity") {
    auto g = make_grid(5, 4, 0.5, 0.5);
    for (std::size_t i = 0; i < g.angles.size(); ++i) g.angles[i] = 0.1 * double(i % 7) - 0.3;
    const auto s = smooth_grid(g, 0.0);
    CHECK(s.angles == g.angles);
  }
  SUBCASE("constant field is preserved") {
    auto g = make_grid(9, 7, 0.5, 0.5);
    std::fill(g.angles.begin(), g.angles.end(), -0.7);
    for (double a : smooth_grid(g, 1.3).angles) CHECK(a == doctest::Approx(-0.7).epsilon(1e-12));
  }
  SUBCASE("step field against a discrete Gaussian convolution") {
    const int n = 40;
    const double dx = 0.5, sigma = 2 * dx;
    auto g = make_grid(n, 5, dx, dx);
    for (int iz = 0; iz < 5; ++iz)
      for (int ix = 0; ix < n; ++ix) g.at(ix, iz) = ix < n / 2 ? 0.0 : kPi / 4;
    const auto s = smooth_grid(g, sigma);
    // Midpoint between the two nodes straddling the step.
    const double x_mid = (n / 2 - 0.5) * dx;
    CHECK(grid_angle(s, x_mid, 1.0) == doctest::Approx(kPi / 8).epsilon(0.02 / (kPi / 8)));
    // Independent 1D oracle one node past the step: Gaussian weights on
    // the doubled-angle unit vector, truncated at 3 sigma.
    const int i0 = n / 2 + 1;
    double c = 0.0, sn = 0.0;
    for (int k = 0; k < n; ++k) {
      const double d = (k - i0) * dx;
      if (std::abs(d) > 3 * sigma) continue;
      const double w = std::exp(-0.5 * d * d / (sigma * sigma));
      const double t = k < n / 2 ? 0.0 : kPi / 4;
      c += w * std::cos(2 * t);
      sn += w * std::sin(2 * t);
    }
    CHECK(s.at(i0, 2) == doctest::Approx(0.5 * std::atan2(sn, c)).epsilon(1e-12));
  }
  SUBCASE("smoothing reduces roughness and keeps the interior mean") {
    auto g = make_grid(30, 30, 0.5, 0.5);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    for (int iz = 0; iz < 30; ++iz)
      for (int ix = 0; ix < 30; ++ix) g.at(ix, iz) = 0.4 + 0.02 * ix + u(rng);
    const auto s = smooth_grid(g, 1.0);
    CHECK(lattice_lipschitz(s) < lattice_lipschitz(g));
    CHECK(s.lipschitz == doctest::Approx(lattice_lipschitz(s)));
    double m0 = 0.0, m1 = 0.0;
    for (int iz = 6; iz < 24; ++iz)
      for (int ix = 6; ix < 24; ++ix) {
        m0 += g.at(ix, iz);
        m1 += s.at(ix, iz);
      }
    CHECK(std::abs(m1 - m0) <= 0.01 * std::abs(m0));
    // Adjacent nodes respect the recorded bound.
    for (int iz = 0; iz < 30; ++iz)
      for (int ix = 0; ix + 1 < 30; ++ix)
        CHECK(std::abs(s.at(ix + 1, iz) - s.at(ix, iz)) <= s.lipschitz * 0.5 + 1e-12);
  }
}

TEST_CASE("orientation CSV") {
  auto g = make_grid(3, 2, 0.5, 1.0, Vec2(-0.5, 2.0));
  for (std::size_t i = 0; i < g.angles.size(); ++i) g.angles[i] = (double(i) - 2.0) * 0.25;
  std::stringstream ss;
  write_orientation_csv(ss, g);

  SUBCASE("round trip") {
    const auto back = read_orientation_csv(ss);
    CHECK(back.nx == 3);
    CHECK(back.nz == 2);
    CHECK(back.origin.isApprox(g.origin));
    CHECK(back.spacing.isApprox(g.spacing));
    for (std::size_t i = 0; i < g.angles.size(); ++i)
      CHECK(back.angles[i] == doctest::Approx(g.angles[i]).epsilon(1e-8));
  }
  SUBCASE("row order does not matter") {
    std::string header, line;
    std::getline(ss, header);
    std::vector<std::string> rows;
    while (std::getline(ss, line)) rows.push_back(line);
    std::reverse(rows.begin(), rows.end());
    std::stringstream shuffled;
    shuffled << header << '\n';
    for (const auto& r : rows) shuffled << r << '\n';
    CHECK(read_orientation_csv(shuffled).angles.size() == 6);
  }
  SUBCASE("malformed inputs") {
    std::stringstream bad_header("x,z,theta\n0,0,0\n");
    CHECK_THROWS_AS(read_orientation_csv(bad_header), ConfigError);
    std::stringstream missing("x_mm,z_mm,theta_deg\n0,0,0\n1,0,0\n0,1,0\n");
    CHECK_THROWS_AS(read_orientation_csv(missing), ConfigError);
    std::stringstream dup("x_mm,z_mm,theta_deg\n0,0,0\n1,0,0\n0,1,0\n1,1,0\n1,1,0\n");
    CHECK_THROWS_AS(read_orientation_csv(dup), ConfigError);
    std::stringstream junk("x_mm,z_mm,theta_deg\n0,0,abc\n");
    CHECK_THROWS_AS(read_orientation_csv(junk), ConfigError);
  }
  SUBCASE("angles are wrapped onto (-90, 90]") {
    std::stringstream in("x_mm,z_mm,theta_deg\n0,0,100\n1,0,-90\n0,1,270\n1,1,45\n");
    const auto w = read_orientation_csv(in);
    CHECK(w.at(0, 0) == doctest::Approx(-80.0 * kPi / 180));
    CHECK(w.at(1, 0) == doctest::Approx(kPi / 2));
    CHECK(w.at(0, 1) == doctest::Approx(kPi / 2));
  }
}

TEST_CASE("orientation sources") {
  CHECK(sample_orientation(ConstantOrientation{0.4}, Vec2(1, 2)).theta == 0.4);
  CHECK(sample_orientation(ConstantOrientation{0.4}, Vec2(1, 2)).grad == Vec2::Zero());
  CHECK(sample_orientation(OgilvyOrientation{}, Vec2(5, 10)).theta ==
        doctest::Approx(law(5, 10)).epsilon(1e-14));
  CHECK(is_uniform(ConstantOrientation{}));
  CHECK_FALSE(is_uniform(OgilvyOrientation{}));
}
