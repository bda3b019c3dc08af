#include "weldray/inspection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "weldray/errors.hpp"
#include "weldray/parallel.hpp"

namespace weldray {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

double sinc(double x) { return std::abs(x) < 1e-12 ? 1.0 : std::sin(x) / x; }

bool is_parent(RegionKind kind) {
  return kind == RegionKind::ferritic || kind == RegionKind::stainless;
}

// First parent region met on the outer surface walking from x in the
// direction `outward`.
int parent_region(const Specimen& specimen, double x, int outward) {
  const double z = specimen.outer_z - 1e-6;
  for (int k = 0; k <= 2000; ++k) {
    const int r = specimen.locate(Vec2(x + outward * 0.5 * k, z));
    if (r >= 0 && is_parent(specimen.regions[r].kind)) return r;
  }
  throw DomainError("no parent material on the outer surface beside the probe");
}

int outward_sign(const ProbeConfig& probe) { return probe.steering_deg >= 0.0 ? -1 : 1; }

}  // namespace

void ProbeConfig::validate() const {
  if (element_count < 1) throw ContractViolation("probe needs at least one element");
  if (!(pitch_mm > 0.0) || !(element_width_mm > 0.0) || element_width_mm > pitch_mm)
    throw ContractViolation("probe pitch and element width must satisfy 0 < width <= pitch");
  if (!(frequency_mhz > 0.0)) throw ContractViolation("probe frequency must be positive");
  if (!(std::abs(steering_deg) < 90.0)) throw ContractViolation("steering must be within (-90, 90) degrees");
  if (first_element < 0 || last_active() >= element_count || first_element > last_active())
    throw ContractViolation("active aperture outside the array");
}

double ProbeConfig::steering_gamma() const { return -0.5 * kPi + steering_deg * kDeg; }

Vec2 Defect::top() const {
  if (!facets.empty()) return facets.back();
  const double t = tilt_deg * kDeg;
  return foot + height_mm * Vec2(std::sin(t), std::cos(t));
}

std::vector<std::pair<Vec2, Vec2>> Defect::segments() const {
  std::vector<std::pair<Vec2, Vec2>> out;
  Vec2 a = foot;
  if (facets.empty()) {
    out.emplace_back(a, top());
    return out;
  }
  for (const auto& f : facets) {
    out.emplace_back(a, f);
    a = f;
  }
  return out;
}

void Defect::validate(double inner_z) const {
  if (!(height_mm > 0.0)) throw ContractViolation("defect height must be positive");
  if (std::abs(foot.y() - inner_z) > 1e-9)
    throw ContractViolation("defect foot must lie on the inner surface");
  if (!(std::abs(tilt_deg) < 90.0)) throw ContractViolation("defect tilt must be within (-90, 90) degrees");
}

const char* to_string(EchoType type) { return type == EchoType::corner ? "corner" : "tip"; }

const char* to_string(ScanSide side) {
  return side == ScanSide::stainless ? "stainless" : "ferritic";
}

ScanSide scan_side_from_string(const std::string& s) {
  if (s == "stainless") return ScanSide::stainless;
  if (s == "ferritic") return ScanSide::ferritic;
  throw ConfigError("unknown scan side '" + s + "'");
}

std::vector<double> delay_law(const ProbeConfig& probe, double velocity_m_s) {
  probe.validate();
  if (!(velocity_m_s > 0.0)) throw ContractViolation("delay-law velocity must be positive");
  const double v = velocity_m_s * 1e-3;  // mm/us
  const double s = std::sin(probe.steering_deg * kDeg);
  std::vector<double> tau(probe.element_count);
  for (int n = 0; n < probe.element_count; ++n) tau[n] = n * probe.pitch_mm * s / v;
  const double lo = *std::min_element(tau.begin(), tau.end());
  for (double& t : tau) t -= lo;
  return tau;
}

double probe_velocity(const Medium& medium, const ProbeConfig& probe) {
  const Specimen& sp = medium.specimen();
  const int r = parent_region(sp, probe.position_mm, outward_sign(probe));
  const double g = probe.steering_gamma();
  const Vec2 x(probe.position_mm, sp.outer_z);
  return 1e3 / medium.slowness(r, x, Vec2(std::cos(g), std::sin(g)));
}

ElementFan element_fan(const ProbeConfig& probe, int element, const Medium& medium,
                       double span_deg, int ray_count, const TraceOptions& trace_options) {
  probe.validate();
  if (element < 0 || element >= probe.element_count)
    throw ContractViolation("element index outside the array");
  if (ray_count < 1) throw ContractViolation("fan needs at least one ray");
  ElementFan fan;
  fan.element = element;
  fan.center = Vec2(probe.element_x(element), medium.specimen().outer_z);
  fan.delay_us = delay_law(probe, probe_velocity(medium, probe))[element];
  const double g0 = probe.steering_gamma();
  for (int k = 0; k < ray_count; ++k) {
    const double f = ray_count == 1 ? 0.0 : double(k) / (ray_count - 1) - 0.5;
    fan.rays.push_back(trace(medium, fan.center, g0 + f * span_deg * kDeg, trace_options));
  }
  return fan;
}

namespace {

struct Shot {
  double gamma = 0.0;
  Ray ray;
  std::optional<ClosestApproach> ca;

  double distance() const {
    return ca ? ca->distance : std::numeric_limits<double>::infinity();
  }
};

class RaySearch {
 public:
  RaySearch(const Medium& medium, const Vec2& source, double gamma_center, const Vec2& target,
            const BeamOptions& options)
      : medium_(medium), source_(source), target_(target), options_(options),
        lo_(gamma_center - 0.5 * options.fan_span_deg * kDeg),
        hi_(gamma_center + 0.5 * options.fan_span_deg * kDeg) {}

  Shot shoot(double g) const {
    Shot s;
    s.gamma = std::clamp(g, lo_, hi_);
    s.ray = trace(medium_, source_, s.gamma, options_.trace);
    s.ca = closest_approach(s.ray, target_);
    return s;
  }

  // Newton on the signed offset, dgamma = offset / q_perp, kept inside
  // [a, b] when a sign change bracket is known.
  Shot refine(Shot current, std::optional<std::pair<Shot, Shot>> bracket) const {
    Shot best = current;
    double a = 0.0, b = 0.0, fa = 0.0;
    if (bracket) {
      a = bracket->first.gamma;
      fa = bracket->first.ca->offset;
      b = bracket->second.gamma;
    }
    for (int it = 0; it < options_.max_refinements && best.distance() > options_.refine_tol_mm;
         ++it) {
      if (!current.ca) break;
      const auto& ca = *current.ca;
      double step = std::abs(ca.q_perp) > 1e-12 ? ca.offset / ca.q_perp : 0.0;
      step = std::clamp(step, -kMaxStep, kMaxStep);
      double g = current.gamma + step;
      if (bracket && !(g > std::min(a, b) && g < std::max(a, b))) g = 0.5 * (a + b);
      g = std::clamp(g, lo_, hi_);
      if (g == current.gamma) break;
      Shot next = shoot(g);
      if (!next.ca) break;
      if (bracket) {
        if ((next.ca->offset > 0.0) == (fa > 0.0)) {
          a = g;
          fa = next.ca->offset;
        } else {
          b = g;
        }
      }
      current = std::move(next);
      if (current.distance() < best.distance()) best = current;
    }
    return best;
  }

  Shot fan() const {
    const int n = std::max(1, options_.fan_rays);
    std::vector<Shot> shots;
    for (int k = 0; k < n; ++k)
      shots.push_back(shoot(n == 1 ? 0.5 * (lo_ + hi_) : lo_ + (hi_ - lo_) * k / (n - 1)));

    std::optional<std::pair<Shot, Shot>> bracket;
    double bracket_size = std::numeric_limits<double>::infinity();
    for (int k = 0; k + 1 < n; ++k) {
      const auto& p = shots[k].ca;
      const auto& q = shots[k + 1].ca;
      if (!p || !q || (p->offset > 0.0) == (q->offset > 0.0)) continue;
      const double size = std::max(p->distance, q->distance);
      if (size < bracket_size) {
        bracket_size = size;
        bracket.emplace(shots[k], shots[k + 1]);
      }
    }
    int best = 0;
    for (int k = 1; k < n; ++k)
      if (shots[k].distance() < shots[best].distance()) best = k;
    if (!shots[best].ca) return shots[best];

    Shot start = shots[best];
    if (bracket && start.gamma != bracket->first.gamma && start.gamma != bracket->second.gamma) {
      // The nearest ray lies outside the sign change; start inside it.
      Shot mid = shoot(0.5 * (bracket->first.gamma + bracket->second.gamma));
      if (mid.distance() < start.distance()) start = std::move(mid);
    }
    return refine(std::move(start), bracket);
  }

 private:
  static constexpr double kMaxStep = 5.0 * kDeg;

  const Medium& medium_;
  Vec2 source_, target_;
  const BeamOptions& options_;
  double lo_, hi_;
};

}  // namespace

ElementHit find_ray_to(const Medium& medium, const Vec2& source, double gamma_center,
                       const Vec2& target, const BeamOptions& options,
                       std::optional<double> gamma_guess) {
  const RaySearch search(medium, source, gamma_center, target, options);
  Shot best;
  if (gamma_guess) best = search.refine(search.shoot(*gamma_guess), std::nullopt);
  if (!(best.distance() <= options.refine_tol_mm)) {
    Shot f = search.fan();
    if (f.distance() < best.distance()) best = std::move(f);
  }
  if (!(best.distance() <= options.capture_radius_mm)) return {};

  const auto& ca = *best.ca;
  ElementHit hit;
  hit.found = true;
  hit.gamma = best.gamma;
  hit.distance_mm = ca.distance;
  hit.time_us = ca.time_at_target;
  const Vec2 v = ca.state.ve;
  hit.direction = v.norm() > 0.0 ? Vec2(v / v.norm()) : Vec2::Zero();
  Amplitude a = amplitude(medium, best.ray, ca.state);
  if (a.caustic) a = amplitude(medium, best.ray, ca.segment);
  hit.amplitude = a.value;
  hit.caustic = a.caustic;
  return hit;
}

BeamResult combine_beam(const ProbeConfig& probe, const std::vector<double>& delays,
                        const std::vector<ElementHit>& hits) {
  if (hits.size() != static_cast<std::size_t>(probe.element_count) ||
      delays.size() != hits.size())
    throw ContractViolation("one hit and one delay per element expected");
  const double omega = 2.0 * kPi * probe.frequency_mhz;
  BeamResult out;
  std::complex<double> sum = 0.0;
  double weight = 0.0, weighted_time = 0.0;
  for (int n = probe.first_element; n <= probe.last_active(); ++n) {
    const ElementHit& h = hits[n];
    if (!h.found) continue;
    const double t = delays[n] + h.time_us;
    const auto c = std::polar(h.amplitude, -omega * t);
    out.elements.push_back(n);
    out.contributions.push_back(c);
    out.directions.push_back(h.direction);
    sum += c;
    weight += h.amplitude * h.amplitude;
    weighted_time += h.amplitude * h.amplitude * t;
  }
  out.amplitude = std::abs(sum);
  out.time_us = weight > 0.0 ? weighted_time / weight : 0.0;
  return out;
}

BeamResult beam_at(const ProbeConfig& probe, const Medium& medium, const Vec2& point,
                   const BeamOptions& options) {
  probe.validate();
  const auto delays = delay_law(probe, probe_velocity(medium, probe));
  std::vector<ElementHit> hits(probe.element_count);
  const double g0 = probe.steering_gamma();
  for (int n = probe.first_element; n <= probe.last_active(); ++n) {
    const Vec2 src(probe.element_x(n), medium.specimen().outer_z);
    try {
      hits[n] = find_ray_to(medium, src, g0, point, options);
    } catch (const DomainError&) {
      // Element hangs over the specimen edge.
    }
  }
  return combine_beam(probe, delays, hits);
}

double corner_reflectivity(double tilt_deg) {
  const double c = std::cos(tilt_deg * kDeg);
  return std::clamp(c * c, 0.05, 1.0);
}

double tilt_factor(const BeamResult& beam, double tilt_deg, double height_mm,
                   double wavelength_mm) {
  const std::size_t n = beam.contributions.size();
  if (n == 0) return 0.0;
  std::vector<double> phi(n);
  for (std::size_t i = 0; i < n; ++i)
    phi[i] = std::atan2(beam.directions[i].y(), beam.directions[i].x());
  const double k = kPi * height_mm / wavelength_mm;
  auto pair_sum = [&](double t) {
    std::complex<double> s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        s += beam.contributions[i] * beam.contributions[j] *
             sinc(k * std::sin(phi[j] - phi[i] - 2.0 * t));
    return std::abs(s);
  };
  const double s0 = pair_sum(0.0);
  return s0 > 0.0 ? pair_sum(tilt_deg * kDeg) / s0 : 0.0;
}

double local_wavelength(const Medium& medium, const Defect& defect) {
  const int r = medium.specimen().locate(defect.foot);
  if (r < 0) throw DomainError("defect foot outside the specimen");
  const double v = 1.0 / medium.slowness(r, defect.foot, Vec2(0.0, 1.0));
  return v / medium.frequency_mhz();
}

Echo corner_echo_from_beam(const BeamResult& beam, const Defect& defect,
                           double wavelength_mm, double reference) {
  Echo e;
  if (!(beam.amplitude > 0.0)) return e;
  const double phi = tilt_factor(beam, defect.tilt_deg, defect.height_mm, wavelength_mm);
  e.amplitude = beam.amplitude * beam.amplitude * corner_reflectivity(defect.tilt_deg) * phi /
                reference;
  e.present = e.amplitude > 0.0;
  if (e.present) e.db = 20.0 * std::log10(e.amplitude);
  e.time_us = 2.0 * beam.time_us;
  return e;
}

Echo tip_echo_from_beam(const BeamResult& beam, const Defect& defect,
                        double wavelength_mm, double reference) {
  Echo e;
  if (defect.height_mm < wavelength_mm) {
    e.below_resolution = true;
    return e;
  }
  if (!(beam.amplitude > 0.0)) return e;
  e.amplitude =
      beam.amplitude * beam.amplitude * std::pow(10.0, kTipDiffractionDb / 20.0) / reference;
  e.present = e.amplitude > 0.0;
  if (e.present) e.db = 20.0 * std::log10(e.amplitude);
  e.time_us = 2.0 * beam.time_us;
  return e;
}

Echo corner_echo(const ProbeConfig& probe, const Medium& medium, const Defect& defect,
                 double reference, const BeamOptions& options) {
  defect.validate(medium.specimen().inner_z);
  const BeamResult beam = beam_at(probe, medium, defect.foot, options);
  return corner_echo_from_beam(beam, defect, local_wavelength(medium, defect), reference);
}

Echo tip_echo(const ProbeConfig& probe, const Medium& medium, const Defect& defect,
              double reference, const BeamOptions& options) {
  defect.validate(medium.specimen().inner_z);
  const double lambda = local_wavelength(medium, defect);
  if (defect.height_mm < lambda) return tip_echo_from_beam({}, defect, lambda, reference);
  const BeamResult beam = beam_at(probe, medium, defect.top(), options);
  return tip_echo_from_beam(beam, defect, lambda, reference);
}

double calibrate(const ProbeConfig& probe, const Medium& medium, const BeamOptions& options) {
  probe.validate();
  const Specimen& sp = medium.specimen();
  const int parent = parent_region(sp, probe.position_mm, outward_sign(probe));

  Specimen block;
  block.name = "calibration block";
  block.materials = {sp.material_of(parent)};
  block.inner_z = sp.inner_z;
  block.outer_z = sp.outer_z;
  const double half = 500.0;
  block.regions.push_back(Region{"block", sp.regions[parent].kind,
                                 {{-half, sp.inner_z}, {half, sp.inner_z},
                                  {half, sp.outer_z}, {-half, sp.outer_z}},
                                 0,
                                 ConstantOrientation{0.0}});
  const Medium cal(std::move(block), medium.frequency_mhz());

  ProbeConfig p = probe;
  p.position_mm = -sp.thickness() * std::tan(probe.steering_deg * kDeg);
  Defect notch;
  notch.foot = Vec2(0.0, sp.inner_z);
  notch.height_mm = 10.0;
  const Echo e = corner_echo(p, cal, notch, 1.0, options);
  if (!e.present) throw DomainError("calibration notch not reached by the beam");
  return e.amplitude;
}

int side_sign(const Specimen& specimen, ScanSide side) {
  const RegionKind want = side == ScanSide::stainless ? RegionKind::stainless : RegionKind::ferritic;
  const double z = specimen.outer_z - 1e-6;
  for (int k = 0; k <= 2000; ++k) {
    for (int sign : {-1, 1}) {
      const int r = specimen.locate(Vec2(sign * 0.5 * k, z));
      if (r >= 0 && specimen.regions[r].kind == want) return sign;
    }
  }
  throw ConfigError(std::string("specimen has no ") + to_string(side) +
                    " parent on the outer surface");
}

namespace {

// Nearest-ray hits from every distinct element position of a scan to a
// set of targets. Element positions on different scan steps coincide
// whenever the step is commensurate with the pitch, so each is traced
// once.
class HitTable {
 public:
  HitTable(const ProbeConfig& probe, const Medium& medium, const std::vector<double>& centers,
           const std::vector<Vec2>& targets, const BeamOptions& options, int threads)
      : probe_(probe), targets_(targets.size()) {
    for (double c : centers) {
      ProbeConfig p = probe;
      p.position_mm = c;
      for (int n = probe.first_element; n <= probe.last_active(); ++n)
        index_.emplace(key(p.element_x(n)), 0);
    }
    std::vector<double> xs;
    xs.reserve(index_.size());
    for (auto& [k, slot] : index_) {
      slot = static_cast<int>(xs.size());
      xs.push_back(k * 1e-6);
    }
    hits_.resize(xs.size() * targets_);
    const double g0 = probe.steering_gamma();
    const double z = medium.specimen().outer_z;
    // Consecutive positions are warm-started from their neighbour. The
    // chunking is fixed so results do not depend on the thread count.
    const std::size_t chunks = (xs.size() + kChunk - 1) / kChunk;
    parallel_for(chunks * targets_, threads, [&](std::size_t i) {
      const std::size_t c = i / targets_, t = i % targets_;
      std::optional<double> guess;
      for (std::size_t e = c * kChunk; e < std::min(xs.size(), (c + 1) * kChunk); ++e) {
        ElementHit& h = hits_[e * targets_ + t];
        try {
          h = find_ray_to(medium, Vec2(xs[e], z), g0, targets[t], options, guess);
        } catch (const DomainError&) {
        }
        guess = h.found ? std::optional<double>(h.gamma) : std::nullopt;
      }
    });
  }

  std::vector<ElementHit> hits(double center, std::size_t target) const {
    ProbeConfig p = probe_;
    p.position_mm = center;
    std::vector<ElementHit> out(p.element_count);
    for (int n = p.first_element; n <= p.last_active(); ++n)
      out[n] = hits_[index_.at(key(p.element_x(n))) * targets_ + target];
    return out;
  }

 private:
  static long long key(double x) { return std::llround(x * 1e6); }
  static constexpr std::size_t kChunk = 16;

  ProbeConfig probe_;
  std::size_t targets_;
  std::map<long long, int> index_;
  std::vector<ElementHit> hits_;
};

ProbeConfig side_probe(const ProbeConfig& probe, int sign) {
  ProbeConfig p = probe;
  p.steering_deg = -sign * std::abs(probe.steering_deg);
  return p;
}

}  // namespace

BScan scan(const ProbeConfig& probe_in, const Medium& medium,
           const std::optional<Defect>& defect, const std::vector<double>& distances_mm,
           ScanSide side, const ScanOptions& options) {
  probe_in.validate();
  if (!(options.time_step_us > 0.0) || !(options.time_stop_us > options.time_start_us))
    throw ContractViolation("scan time axis must be increasing");
  const Specimen& sp = medium.specimen();
  const int sign = side_sign(sp, side);
  ProbeConfig probe = side_probe(probe_in, sign);

  BScan out;
  out.floor_db = options.floor_db;
  for (double d : distances_mm) out.positions_mm.push_back(sign * d);
  const int nt =
      static_cast<int>(std::floor((options.time_stop_us - options.time_start_us) /
                                      options.time_step_us + 1e-9)) + 1;
  for (int i = 0; i < nt; ++i) out.times_us.push_back(options.time_start_us + i * options.time_step_us);

  probe.position_mm = out.positions_mm.empty() ? sign * 40.0 : out.positions_mm.back();
  out.reference = options.reference > 0.0 ? options.reference
                                           : calibrate(probe, medium, options.beam);
  const auto delays = delay_law(probe, probe_velocity(medium, probe));

  std::vector<std::vector<Echo>> echoes(out.positions_mm.size());
  if (defect) {
    defect->validate(sp.inner_z);
    const double lambda = local_wavelength(medium, *defect);
    std::vector<Vec2> targets{defect->foot};
    const bool tip_resolved = defect->height_mm >= lambda;
    if (tip_resolved) targets.push_back(defect->top());
    const HitTable table(probe, medium, out.positions_mm, targets, options.beam, options.threads);
    for (std::size_t k = 0; k < out.positions_mm.size(); ++k) {
      const double c = out.positions_mm[k];
      const auto corner_beam = combine_beam(probe, delays, table.hits(c, 0));
      Echo corner = corner_echo_from_beam(corner_beam, *defect, lambda, out.reference);
      Echo tip = tip_resolved
                     ? tip_echo_from_beam(combine_beam(probe, delays, table.hits(c, 1)), *defect,
                                          lambda, out.reference)
                     : tip_echo_from_beam({}, *defect, lambda, out.reference);
      echoes[k] = {corner, tip};
    }
  }

  const double sigma = 1.5 / probe.frequency_mhz / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  out.db.assign(out.positions_mm.size(), std::vector<double>(nt, options.floor_db));
  for (std::size_t k = 0; k < echoes.size(); ++k) {
    std::vector<double> env(nt, 0.0);
    for (std::size_t e = 0; e < echoes[k].size(); ++e) {
      const Echo& echo = echoes[k][e];
      if (!echo.present) continue;
      out.echoes.push_back({e == 0 ? EchoType::corner : EchoType::tip, out.positions_mm[k],
                            echo.time_us, echo.db});
      for (int i = 0; i < nt; ++i) {
        const double u = (out.times_us[i] - echo.time_us) / sigma;
        if (std::abs(u) < 12.0) env[i] += echo.amplitude * std::exp(-0.5 * u * u);
      }
    }
    for (int i = 0; i < nt; ++i)
      if (env[i] > 0.0) out.db[k][i] = std::max(options.floor_db, 20.0 * std::log10(env[i]));
  }

  for (EchoType type : {EchoType::corner, EchoType::tip}) {
    const EchoAnnotation* best = nullptr;
    for (const auto& a : out.echoes)
      if (a.type == type && (!best || a.peak_db > best->peak_db)) best = &a;
    if (!best) continue;
    EchoAnnotation peak = *best;
    const auto k = static_cast<std::size_t>(
        std::find(out.positions_mm.begin(), out.positions_mm.end(), best->position_mm) -
        out.positions_mm.begin());
    const long i = std::lround((best->time_us - options.time_start_us) / options.time_step_us);
    if (i >= 0 && i < nt) peak.peak_db = out.db[k][i];
    out.peaks.push_back(peak);
  }
  return out;
}

std::vector<TiltRow> tilt_sweep(const ProbeConfig& probe_in, const Medium& medium,
                                const Defect& defect_template,
                                const std::vector<double>& tilts_deg,
                                const std::vector<double>& distances_mm, ScanSide side,
                                const ScanOptions& options) {
  probe_in.validate();
  const Specimen& sp = medium.specimen();
  defect_template.validate(sp.inner_z);
  const int sign = side_sign(sp, side);
  ProbeConfig probe = side_probe(probe_in, sign);
  std::vector<double> centers;
  for (double d : distances_mm) centers.push_back(sign * d);
  probe.position_mm = centers.empty() ? sign * 40.0 : centers.back();
  const double reference =
      options.reference > 0.0 ? options.reference : calibrate(probe, medium, options.beam);
  const auto delays = delay_law(probe, probe_velocity(medium, probe));
  const double lambda = local_wavelength(medium, defect_template);

  // The corner beam depends on the foot only, not on the tilt.
  const HitTable table(probe, medium, centers, {defect_template.foot}, options.beam,
                       options.threads);
  std::vector<BeamResult> beams;
  for (double c : centers) beams.push_back(combine_beam(probe, delays, table.hits(c, 0)));

  std::vector<TiltRow> rows;
  for (double tilt : tilts_deg) {
    Defect d = defect_template;
    d.tilt_deg = tilt;
    d.facets.clear();
    d.validate(sp.inner_z);
    double peak = -std::numeric_limits<double>::infinity();
    for (const auto& b : beams) {
      const Echo e = corner_echo_from_beam(b, d, lambda, reference);
      if (e.present) peak = std::max(peak, e.db);
    }
    rows.push_back({tilt, peak});
  }
  return rows;
}

}  // namespace weldray
