#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "weldray/errors.hpp"
#include "weldray/inspection.hpp"

using namespace weldray;
using namespace weldray::testing;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Stainless parent for x < 0, ferritic for x > 0, both isotropic.
Specimen two_parents(double thickness = 30.0) {
  Specimen s;
  s.name = "two parents";
  s.materials = {stainless_steel(), ferritic_steel()};
  s.outer_z = thickness;
  s.regions.push_back(Region{"stainless", RegionKind::stainless, rectangle(-150, 0, 0, thickness), 0, {}});
  s.regions.push_back(Region{"ferritic", RegionKind::ferritic, rectangle(0, 150, 0, thickness), 1, {}});
  return s;
}

ProbeConfig small_probe() {
  ProbeConfig p;
  p.element_count = 16;
  p.pitch_mm = 0.6;
  return p;
}

BeamOptions fast_beam() {
  BeamOptions b;
  b.fan_rays = 9;
  return b;
}

}  // namespace

TEST_CASE("delay law") {
  ProbeConfig p;
  const auto tau = delay_law(p, 5900.0);
  REQUIRE(tau.size() == 64);
  CHECK(tau.front() == 0.0);
  const double step = 0.6 * std::sin(49.0 * kDeg) / 5.9;
  CHECK(step == doctest::Approx(0.0768).epsilon(1e-3));
  for (int n = 1; n < 64; ++n) CHECK(tau[n] - tau[n - 1] == doctest::Approx(step).epsilon(1e-12));

  ProbeConfig mirrored = p;
  mirrored.steering_deg = -49.0;
  const auto back = delay_law(mirrored, 5900.0);
  for (int n = 0; n < 64; ++n) CHECK(back[n] == doctest::Approx(tau[63 - n]).epsilon(1e-12));

  ProbeConfig flat = p;
  flat.steering_deg = 0.0;
  for (double t : delay_law(flat, 5900.0)) CHECK(t == 0.0);

  CHECK_THROWS_AS(delay_law(p, 0.0), ContractViolation);
}

TEST_CASE("probe configuration") {
  ProbeConfig p;
  CHECK_NOTHROW(p.validate());
  CHECK(p.element_x(0) == doctest::Approx(-18.9));
  CHECK(p.element_x(63) == doctest::Approx(18.9));
  CHECK(p.steering_gamma() == doctest::Approx(-41.0 * kDeg));
  using Mutation = void (*)(ProbeConfig&);
  const Mutation mutations[] = {
      [](ProbeConfig& q) { q.element_count = 0; },
      [](ProbeConfig& q) { q.pitch_mm = -1; },
      [](ProbeConfig& q) { q.element_width_mm = 0.7; },
      [](ProbeConfig& q) { q.frequency_mhz = 0; },
      [](ProbeConfig& q) { q.steering_deg = 95; },
      [](ProbeConfig& q) { q.last_element = 64; },
      [](ProbeConfig& q) { q.first_element = 10, q.last_element = 5; },
  };
  for (Mutation bad : mutations) {
    ProbeConfig q;
    bad(q);
    CHECK_THROWS_AS(q.validate(), ContractViolation);
  }
}

TEST_CASE("probe velocity follows the parent under the probe") {
  const Medium m(two_parents(), 2.0);
  ProbeConfig p;
  p.position_mm = -30;
  CHECK(probe_velocity(m, p) == doctest::Approx(5800.0).epsilon(1e-9));
  p.position_mm = 30;
  p.steering_deg = -49;
  CHECK(probe_velocity(m, p) == doctest::Approx(5900.0).epsilon(1e-9));
}

TEST_CASE("element rays in an isotropic block") {
  const Medium m(block(ferritic_steel()), 2.0);
  const Vec2 src(-10, 30), target(8, 3);
  const double gc = std::atan2(target.y() - src.y(), target.x() - src.x()) + 10 * kDeg;
  const ElementHit h = find_ray_to(m, src, gc, target);
  REQUIRE(h.found);
  const double r = (target - src).norm();
  CHECK(h.time_us == doctest::Approx(r / 5.9).epsilon(1e-6));
  CHECK(h.distance_mm <= 0.01);
  CHECK((h.direction - (target - src) / r).norm() < 1e-6);
  CHECK_FALSE(h.caustic);
  // Point source in 2D: A^2 r is constant, normalised at T = 0.1 us.
  CHECK(h.amplitude == doctest::Approx(std::sqrt(0.1 * 5.9 / r)).epsilon(0.01));

  // Targets outside the fan span are not reached.
  const ElementHit miss = find_ray_to(m, src, gc + 60 * kDeg, target);
  CHECK_FALSE(miss.found);

  // Element fan times follow d / (V cos delta) to the back wall.
  ProbeConfig p = small_probe();
  p.position_mm = -20;
  TraceOptions opt;
  opt.max_reflections = 0;
  const ElementFan fan = element_fan(p, 3, m, 40.0, 9, opt);
  REQUIRE(fan.rays.size() == 9);
  for (const Ray& ray : fan.rays) {
    const double delta = ray.gamma + 90 * kDeg;
    CHECK(ray.events.back().T == doctest::Approx(30.0 / (5.9 * std::cos(delta))).epsilon(1e-9));
  }
  p.position_mm = -205;
  CHECK_THROWS_AS(element_fan(p, 0, m, 40.0, 9, opt), DomainError);
}

TEST_CASE("delay-and-sum coherence") {
  ProbeConfig p = small_probe();
  p.first_element = 4;
  p.last_element = 5;
  std::vector<double> delays(16, 0.0);
  std::vector<ElementHit> hits(16);
  for (auto& h : hits) {
    h.found = true;
    h.amplitude = 0.7;
    h.time_us = 5.0;
    h.direction = Vec2(0, -1);
  }
  CHECK(combine_beam(p, delays, hits).amplitude == doctest::Approx(1.4).epsilon(1e-12));
  // Half a period apart at 2 MHz.
  hits[5].time_us = 5.25;
  const BeamResult cancel = combine_beam(p, delays, hits);
  CHECK(cancel.amplitude <= 0.05 * 0.7);
  CHECK(cancel.time_us == doctest::Approx(5.125));
  // Delays enter the phase the same way as travel time.
  hits[5].time_us = 5.0;
  delays[5] = 0.25;
  CHECK(combine_beam(p, delays, hits).amplitude <= 0.05 * 0.7);
  hits[4].found = false;
  CHECK(combine_beam(p, delays, hits).elements == std::vector<int>{5});
  CHECK_THROWS_AS(combine_beam(p, std::vector<double>(3), hits), ContractViolation);
}

TEST_CASE("defect geometry") {
  Defect d;
  d.foot = Vec2(1, 0);
  CHECK((d.top() - Vec2(1, 3.1)).norm() < 1e-12);
  d.tilt_deg = 30;
  CHECK((d.top() - Vec2(1 + 1.55, 3.1 * std::cos(30 * kDeg))).norm() < 1e-12);
  CHECK(d.segments().size() == 1);
  d.facets = {Vec2(1.5, 1.5), Vec2(1.2, 3.0)};
  CHECK(d.segments().size() == 2);
  CHECK(d.top() == Vec2(1.2, 3.0));
  CHECK_NOTHROW(d.validate(0.0));
  Defect floating;
  floating.foot = Vec2(0, 1);
  CHECK_THROWS_AS(floating.validate(0.0), ContractViolation);
  Defect flat;
  flat.height_mm = 0;
  CHECK_THROWS_AS(flat.validate(0.0), ContractViolation);
}

TEST_CASE("corner reflectivity and tilt factor") {
  CHECK(corner_reflectivity(0) == 1.0);
  CHECK(corner_reflectivity(60) == doctest::Approx(0.25));
  CHECK(corner_reflectivity(89) == 0.05);
  double prev = 1.0;
  for (double t = 0; t <= 45; t += 0.5) {
    CHECK(corner_reflectivity(t) <= prev);
    prev = corner_reflectivity(t);
  }

  // A beam symmetric about the vertical sees +t and -t alike.
  BeamResult beam;
  for (int k = -4; k <= 4; ++k) {
    const double a = -90.0 * kDeg + k * 5.0 * kDeg;
    beam.contributions.push_back(std::polar(1.0 - 0.05 * std::abs(k), 0.3 * std::abs(k)));
    beam.directions.push_back(Vec2(std::cos(a), std::sin(a)));
  }
  beam.amplitude = 1.0;
  CHECK(tilt_factor(beam, 0.0, 3.1, 2.9) == doctest::Approx(1.0));
  for (double t : {3.0, 10.0, 25.0})
    CHECK(tilt_factor(beam, t, 3.1, 2.9) == doctest::Approx(tilt_factor(beam, -t, 3.1, 2.9)).epsilon(1e-12));
  // A single ray: the factor is the sinc of the doubled tilt.
  BeamResult single;
  single.contributions = {1.0};
  single.directions = {Vec2(0, -1)};
  const double x = std::numbers::pi * 3.1 / 2.9 * std::sin(-20 * kDeg);
  CHECK(tilt_factor(single, 10.0, 3.1, 2.9) == doctest::Approx(std::abs(std::sin(x) / x)).epsilon(1e-12));
  CHECK(tilt_factor(BeamResult{}, 10.0, 3.1, 2.9) == 0.0);

  Defect d;
  for (double t = 0; t <= 45; t += 5) {
    d.tilt_deg = t;
    CHECK(corner_echo_from_beam(single, d, 2.9, 1.0).amplitude <= 1.0 + 1e-12);
  }
}

TEST_CASE("tip echo resolution threshold") {
  BeamResult beam;
  beam.amplitude = 2.0;
  beam.time_us = 4.0;
  Defect d;
  d.height_mm = 2.95;
  const Echo at = tip_echo_from_beam(beam, d, 2.95, 1.0);
  CHECK(at.present);
  CHECK_FALSE(at.below_resolution);
  CHECK(at.db == doctest::Approx(20 * std::log10(4.0) - 20.0));
  CHECK(at.time_us == 8.0);
  const Echo below = tip_echo_from_beam(beam, d, 2.9500001, 1.0);
  CHECK(below.below_resolution);
  CHECK_FALSE(below.present);

  const Medium m(dmw_specimen(), 1.0);
  Defect foot;
  const double lambda = local_wavelength(m, foot);
  CHECK(lambda > 3.1);  // a 3.1 mm notch is unresolved at 1 MHz
  const double v = 1.0 / m.slowness(m.specimen().locate(foot.foot), foot.foot, Vec2(0, 1));
  CHECK(lambda == doctest::Approx(v / 1.0));
}

TEST_CASE("calibration notch reads 0 dB against itself") {
  const Medium m(block(ferritic_steel()), 2.0);
  ProbeConfig p = small_probe();
  const double ref = calibrate(p, m, fast_beam());
  CHECK(ref > 0.0);
  ProbeConfig at = p;
  at.position_mm = -30.0 * std::tan(49 * kDeg);
  Defect notch;
  notch.height_mm = 10.0;
  const Echo e = corner_echo(at, m, notch, ref, fast_beam());
  CHECK(e.present);
  CHECK(std::abs(e.db) < 1e-6);
  CHECK(calibrate(p, m, fast_beam()) == ref);
}

TEST_CASE("corner echo loses 2 alpha L with attenuation") {
  auto echo_db = [](double alpha) {
    ElasticMaterial mat = ferritic_steel();
    mat.attenuation_db_per_mm = {{2.0, alpha}};
    const Medium m(block(mat), 2.0);
    ProbeConfig p = small_probe();
    p.position_mm = -30.0 * std::tan(49 * kDeg);
    return corner_echo(p, m, Defect{}, 1.0, fast_beam()).db;
  };
  const double e0 = echo_db(0.0), e1 = echo_db(0.05), e2 = echo_db(0.1);
  CHECK(e1 < e0);
  CHECK(e2 < e1);
  const double path = 30.0 / std::cos(49 * kDeg);
  CHECK(e0 - e1 == doctest::Approx(2 * 0.05 * path).epsilon(0.02));
}

TEST_CASE("travel times are reciprocal through the weld") {
  const Medium m(dmw_specimen(), 2.0);
  const Vec2 a(-28, 30), b(2, 4);
  const double gab = std::atan2(b.y() - a.y(), b.x() - a.x());
  const ElementHit ab = find_ray_to(m, a, gab, b);
  REQUIRE(ab.found);
  const double gba = std::atan2(-ab.direction.y(), -ab.direction.x());
  const ElementHit ba = find_ray_to(m, b, gba, a);
  REQUIRE(ba.found);
  CHECK(ab.time_us == doctest::Approx(ba.time_us).epsilon(1e-4));
}

TEST_CASE("scan side conventions") {
  const Specimen s = dmw_specimen();
  CHECK(side_sign(s, ScanSide::stainless) == -1);
  CHECK(side_sign(s, ScanSide::ferritic) == 1);
  CHECK(scan_side_from_string("ferritic") == ScanSide::ferritic);
  CHECK(std::string(to_string(ScanSide::stainless)) == "stainless");
  CHECK_THROWS_AS(scan_side_from_string("left"), ConfigError);
  CHECK_THROWS(side_sign(block(ferritic_steel()), ScanSide::stainless));
}

TEST_CASE("B-scan bookkeeping") {
  const Medium m(two_parents(), 2.0);
  ProbeConfig p = small_probe();
  ScanOptions opt;
  opt.beam = fast_beam();
  opt.time_stop_us = 20.0;
  opt.reference = 1.0;

  SUBCASE("no defect gives the floor everywhere") {
    const BScan b = scan(p, m, std::nullopt, {10, 20}, ScanSide::stainless, opt);
    REQUIRE(b.db.size() == 2);
    for (const auto& row : b.db) {
      CHECK(row.size() == b.times_us.size());
      for (double v : row) CHECK(v == opt.floor_db);
    }
    CHECK(b.echoes.empty());
    CHECK(b.peaks.empty());
  }

  Defect d;
  const std::vector<double> positions{30, 34, 30};
  const BScan one = scan(p, m, d, positions, ScanSide::stainless, opt);

  SUBCASE("repeated positions give identical rows and the peak is on the grid") {
    REQUIRE(one.db.size() == 3);
    CHECK(one.db[0] == one.db[2]);
    CHECK(one.times_us.size() == 401);
    bool saw_corner = false;
    for (const auto& pk : one.peaks) {
      if (pk.type != EchoType::corner) continue;
      saw_corner = true;
      std::size_t k = 0;
      while (one.positions_mm[k] != pk.position_mm) ++k;
      const auto i = static_cast<std::size_t>(std::llround(pk.time_us / opt.time_step_us));
      CHECK(one.db[k][i] == doctest::Approx(pk.peak_db).epsilon(1e-12));
      CHECK(*std::max_element(one.db[k].begin(), one.db[k].end()) == doctest::Approx(pk.peak_db));
    }
    CHECK(saw_corner);
  }

  SUBCASE("thread count does not change the result") {
    ScanOptions three = opt;
    three.threads = 3;
    const BScan other = scan(p, m, d, positions, ScanSide::stainless, three);
    CHECK(other.db == one.db);
    REQUIRE(other.echoes.size() == one.echoes.size());
    for (std::size_t k = 0; k < one.echoes.size(); ++k) {
      CHECK(other.echoes[k].time_us == one.echoes[k].time_us);
      CHECK(other.echoes[k].peak_db == one.echoes[k].peak_db);
    }
  }

  SUBCASE("positions are signed towards the scanned parent") {
    CHECK(one.positions_mm == std::vector<double>{-30, -34, -30});
  }

  SUBCASE("the corner echo sits at twice the one-way time") {
    const double probe_x = -30.0;
    // Arrival includes the mean firing delay of the aperture.
    const double mean_delay = 7.5 * 0.6 * std::sin(49 * kDeg) / 5.8;
    const double expected = 2.0 * (std::hypot(probe_x, 30.0) / 5.8 + mean_delay);
    bool found = false;
    for (const auto& e : one.echoes)
      if (e.type == EchoType::corner && e.position_mm == -30) {
        found = true;
        CHECK(e.time_us == doctest::Approx(expected).epsilon(0.005));
      }
    CHECK(found);
  }

  SUBCASE("bad time axis") {
    ScanOptions bad = opt;
    bad.time_step_us = 0;
    CHECK_THROWS_AS(scan(p, m, d, positions, ScanSide::stainless, bad), ContractViolation);
  }
}

TEST_CASE("tilt sweep uses the same beam for every tilt") {
  const Medium m(two_parents(), 2.0);
  ProbeConfig p = small_probe();
  ScanOptions opt;
  opt.beam = fast_beam();
  opt.reference = 1.0;
  const std::vector<double> positions{26, 30, 34};
  const auto rows = tilt_sweep(p, m, Defect{}, {0.0, 10.0, 20.0}, positions, ScanSide::stainless, opt);
  REQUIRE(rows.size() == 3);
  double best0 = -1e9;
  for (const auto& e : scan(p, m, Defect{}, positions, ScanSide::stainless, opt).echoes)
    if (e.type == EchoType::corner) best0 = std::max(best0, e.peak_db);
  CHECK(rows[0].peak_db == doctest::Approx(best0).epsilon(1e-9));
  CHECK(rows[1].peak_db < rows[0].peak_db);
  CHECK(rows[2].peak_db < rows[1].peak_db);
}
