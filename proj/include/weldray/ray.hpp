#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "weldray/hamiltonian.hpp"

namespace weldray {

enum class Integrator { euler, rk4 };

// Units: mm, us, slowness in us/mm. Q = dx/dgamma, P = dp/dgamma per
// radian of take-off angle.
struct RayState {
  Vec2 x = Vec2::Zero();
  Vec2 p = Vec2::Zero();
  double T = 0.0;
  Vec2 Q = Vec2::Zero();
  Vec2 P = Vec2::Zero();
  WaveMode mode = WaveMode::qL;
  double atten_db = 0.0;
  int region = -1;
  Vec2 ve = Vec2::Zero();     // energy velocity, mm/us
  double transmission = 1.0;  // product of interface coefficients so far
  int kmah = 0;               // sign changes of the ray-tube Jacobian

  // Signed ray-tube cross-section: energy velocity x Q.
  double jacobian() const { return ve.x() * Q.y() - ve.y() * Q.x(); }
};

enum class EventType {
  interface_crossing,
  surface_reflection,
  total_reflection,
  exit,
  defect_hit
};

const char* to_string(EventType type);

struct RayEvent {
  EventType type = EventType::interface_crossing;
  double T = 0.0;
  Vec2 x = Vec2::Zero();
  int from_region = -1;
  int to_region = -1;
  double coefficient = 1.0;
  // Slowness component along the boundary before and after the event.
  double tangential_in = 0.0;
  double tangential_out = 0.0;
};

enum class RayStatus { time_limit, event_limit, reflection_limit, exited };

struct Ray {
  Vec2 source = Vec2::Zero();
  double gamma = 0.0;
  std::vector<RayState> states;
  std::vector<RayEvent> events;
  RayStatus status = RayStatus::time_limit;
  // rho * |J| at the reference time, the point-source normalisation.
  double reference_flux = 0.0;
  double max_eikonal_residual = 0.0;
};

struct TraceOptions {
  Integrator scheme = Integrator::rk4;
  double dT_us = 0.01;
  // Step used inside regions with a uniform stiffness field, where
  // rays are straight and both schemes are exact.
  double dT_uniform_us = 0.25;
  double max_T_us = 60.0;
  int max_events = 64;
  // Stop at this many surface reflections (-1 = unlimited); 0 stops at
  // the first surface hit.
  int max_reflections = -1;
  double T_ref_us = 0.1;
  double boundary_tol_mm = 1e-6;
  bool flip_dP_sign = false;
  std::vector<std::pair<Vec2, Vec2>> defect_segments;
};

// Throws DomainError when the source is outside the specimen.
RayState initial_state(const Medium& medium, const Vec2& source, double gamma);

struct Derivatives {
  Vec2 dx = Vec2::Zero();
  Vec2 dp = Vec2::Zero();
  Vec2 dQ = Vec2::Zero();
  Vec2 dP = Vec2::Zero();
};

Derivatives derivatives(const Medium& medium, const RayState& state,
                        bool flip_dP_sign = false);

// One step of the axial and paraxial systems followed by eikonal
// renormalisation and attenuation bookkeeping. Stays in state.region.
RayState step(const Medium& medium, const RayState& state, double dT,
              Integrator scheme, bool flip_dP_sign = false);

struct RefractResult {
  RayState state;
  bool total_reflection = false;
  double coefficient = 1.0;
};

// Transmission across a straight boundary with unit normal pointing from
// `incoming` into `outgoing`. Falls back to the reflected qL ray beyond
// the critical angle.
RefractResult refract(const Medium& medium, const RayState& state,
                      const Vec2& normal, int incoming, int outgoing);

// qL reflection off a straight boundary of the state's own region.
RefractResult reflect(const Medium& medium, const RayState& state,
                      const Vec2& normal);

Ray trace(const Medium& medium, const Vec2& source, double gamma,
          const TraceOptions& options = {});

struct Amplitude {
  double value = 0.0;
  bool caustic = false;
  int kmah = 0;
};

// A = sqrt(rho0 J0 / (rho J)) * interface coefficients * 10^(-dB/20),
// with J the signed energy-flux cross-section of the ray tube.
Amplitude amplitude(const Medium& medium, const Ray& ray, const RayState& state);
Amplitude amplitude(const Medium& medium, const Ray& ray, std::size_t sample);
// Amplitude on the incoming side of event `index`.
Amplitude amplitude_at_event(const Medium& medium, const Ray& ray,
                             std::size_t index);

struct ClosestApproach {
  double distance = 0.0;
  double offset = 0.0;  // signed, positive to the left of the ray
  double q_perp = 0.0;  // d offset / d gamma, from the paraxial Q
  RayState state;       // interpolated at the closest point
  double time_at_target = 0.0;
  std::size_t segment = 0;
};

std::optional<ClosestApproach> closest_approach(const Ray& ray, const Vec2& target);

// Position at travel time T by Hermite interpolation of the samples.
std::optional<Vec2> position_at(const Ray& ray, double T);

}  // namespace weldray
