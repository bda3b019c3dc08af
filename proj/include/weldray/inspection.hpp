#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "weldray/ray.hpp"

namespace weldray {

struct ProbeConfig {
  int element_count = 64;
  double pitch_mm = 0.6;
  double element_width_mm = 0.5;
  double elevation_mm = 20.0;  // recorded only; the model is 2D
  double frequency_mhz = 2.0;
  // qL refraction angle from the surface normal; positive steers towards +x.
  double steering_deg = 49.0;
  double position_mm = 0.0;  // probe centre on the outer surface
  int first_element = 0;
  int last_element = -1;  // -1: last element of the array

  void validate() const;
  int last_active() const { return last_element < 0 ? element_count - 1 : last_element; }
  double element_x(int index) const {
    return position_mm + (index - 0.5 * (element_count - 1)) * pitch_mm;
  }
  // Take-off angle of the steered beam, measured from +x.
  double steering_gamma() const;

  bool operator==(const ProbeConfig&) const = default;
};

struct Defect {
  Vec2 foot = Vec2::Zero();  // on the inner surface
  double height_mm = 3.1;
  double tilt_deg = 0.0;  // from vertical, positive leans the top towards +x
  // Optional polyline from the foot to the top for multi-faceted cracks.
  std::vector<Vec2> facets;

  Vec2 top() const;
  std::vector<std::pair<Vec2, Vec2>> segments() const;
  void validate(double inner_z) const;
};

enum class EchoType { corner, tip };
const char* to_string(EchoType type);

struct EchoAnnotation {
  EchoType type = EchoType::corner;
  double position_mm = 0.0;
  double time_us = 0.0;
  double peak_db = 0.0;
};

struct BScan {
  std::vector<double> positions_mm;
  std::vector<double> times_us;
  std::vector<std::vector<double>> db;  // [position][time]
  double floor_db = -60.0;
  double reference = 1.0;
  std::vector<EchoAnnotation> echoes;  // every echo at every position
  std::vector<EchoAnnotation> peaks;   // strongest echo of each type
};

// tau_n = n * pitch * sin(steering) / V shifted so the smallest is 0, in us.
std::vector<double> delay_law(const ProbeConfig& probe, double velocity_m_s);

// qL phase velocity (m/s) of the medium under the probe centre along the
// steering direction; the velocity used for the delay law.
double probe_velocity(const Medium& medium, const ProbeConfig& probe);

struct ElementFan {
  int element = 0;
  Vec2 center = Vec2::Zero();
  double delay_us = 0.0;
  std::vector<Ray> rays;
};

// Rays from the element centre over `span_deg` centred on the steering
// direction. Throws DomainError when the element is off the specimen.
ElementFan element_fan(const ProbeConfig& probe, int element, const Medium& medium,
                       double span_deg, int ray_count, const TraceOptions& trace = {});

struct BeamOptions {
  double capture_radius_mm = 0.3;
  double fan_span_deg = 70.0;
  int fan_rays = 15;
  // Newton refinement of the nearest fan ray using the paraxial Q.
  double refine_tol_mm = 0.01;
  int max_refinements = 8;
  TraceOptions trace = [] {
    TraceOptions t;
    t.max_reflections = 0;
    t.max_T_us = 40.0;
    t.max_events = 16;
    return t;
  }();
};

// Nearest ray from one source to one field point.
struct ElementHit {
  bool found = false;
  double amplitude = 0.0;
  double time_us = 0.0;  // ray travel time, without the element delay
  Vec2 direction = Vec2::Zero();  // unit energy-velocity at the field point
  double distance_mm = 0.0;
  bool caustic = false;
  double gamma = 0.0;  // take-off angle of the accepted ray
};

// Rays are confined to the fan span around gamma_center, which stands in
// for the element directivity. A guess (e.g. the neighbouring element's
// solution) is refined first; the full fan is the fallback.
ElementHit find_ray_to(const Medium& medium, const Vec2& source, double gamma_center,
                       const Vec2& target, const BeamOptions& options = {},
                       std::optional<double> gamma_guess = std::nullopt);

struct BeamResult {
  double amplitude = 0.0;  // envelope of the coherent sum
  double time_us = 0.0;    // energy-weighted mean arrival
  std::vector<int> elements;
  std::vector<std::complex<double>> contributions;  // a exp(-i w t)
  std::vector<Vec2> directions;
};

// Delay-and-sum of the elements' nearest-ray contributions.
BeamResult combine_beam(const ProbeConfig& probe, const std::vector<double>& delays,
                        const std::vector<ElementHit>& hits);

BeamResult beam_at(const ProbeConfig& probe, const Medium& medium, const Vec2& point,
                   const BeamOptions& options = {});

struct Echo {
  bool present = false;
  bool below_resolution = false;
  double amplitude = 0.0;  // linear, divided by the reference
  double db = -std::numeric_limits<double>::infinity();
  double time_us = 0.0;
};

// Corner reflectivity cos^2(tilt) clamped to [0.05, 1].
double corner_reflectivity(double tilt_deg);

// Diffraction loss of a tip echo against a specular reflector.
inline constexpr double kTipDiffractionDb = -20.0;

// Ratio of the dihedral pair sum at `tilt` to that of the untilted
// corner. Each transmit/receive pair is weighted by the face directivity
// sinc(pi h sin(delta) / lambda) at its angular mismatch delta.
double tilt_factor(const BeamResult& beam, double tilt_deg, double height_mm,
                   double wavelength_mm);

// qL wavelength along the vertical at the defect foot.
double local_wavelength(const Medium& medium, const Defect& defect);

Echo corner_echo_from_beam(const BeamResult& beam, const Defect& defect,
                           double wavelength_mm, double reference);
Echo tip_echo_from_beam(const BeamResult& beam, const Defect& defect,
                        double wavelength_mm, double reference);

Echo corner_echo(const ProbeConfig& probe, const Medium& medium, const Defect& defect,
                 double reference = 1.0, const BeamOptions& options = {});
Echo tip_echo(const ProbeConfig& probe, const Medium& medium, const Defect& defect,
              double reference = 1.0, const BeamOptions& options = {});

// Linear corner-echo amplitude of a 10 mm vertical notch in a block of
// the parent material under the probe, probe placed so the steered beam
// axis meets the notch foot.
double calibrate(const ProbeConfig& probe, const Medium& medium,
                 const BeamOptions& options = {});

enum class ScanSide { stainless, ferritic };
const char* to_string(ScanSide side);
ScanSide scan_side_from_string(const std::string& s);

// +1 or -1: which side of the weld centreline carries the side's parent.
int side_sign(const Specimen& specimen, ScanSide side);

struct ScanOptions {
  double time_start_us = 0.0;
  double time_stop_us = 40.0;
  double time_step_us = 0.05;
  double floor_db = -60.0;
  double reference = 0.0;  // <= 0: calibrate
  int threads = 1;
  BeamOptions beam;
};

// Probe positions are distances from the weld centreline on `side`; the
// probe steers towards the weld.
BScan scan(const ProbeConfig& probe, const Medium& medium,
           const std::optional<Defect>& defect, const std::vector<double>& distances_mm,
           ScanSide side, const ScanOptions& options = {});

struct TiltRow {
  double tilt_deg = 0.0;
  double peak_db = 0.0;
};

// Peak corner-echo dB over the scan positions for each tilt.
std::vector<TiltRow> tilt_sweep(const ProbeConfig& probe, const Medium& medium,
                                const Defect& defect_template,
                                const std::vector<double>& tilts_deg,
                                const std::vector<double>& distances_mm, ScanSide side,
                                const ScanOptions& options = {});

}  // namespace weldray
