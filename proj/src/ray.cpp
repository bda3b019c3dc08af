#include "weldray/ray.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "weldray/errors.hpp"

namespace weldray {

namespace {

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

struct Phase {
  Vec2 x, p, Q, P;
};

Phase add(const Phase& y, const Derivatives& d, double h) {
  return {y.x + h * d.dx, y.p + h * d.dp, y.Q + h * d.dQ, y.P + h * d.dP};
}

Derivatives rhs(const Medium& m, int region, const Phase& y, bool flip_dP) {
  const auto e = m.eval(region, y.x, y.p);
  const auto h = m.hessian(region, y.x, y.p);
  Derivatives d;
  d.dx = 0.5 * e.Gp;
  d.dp = -0.5 * e.Gx;
  d.dQ = 0.5 * (h.xp.transpose() * y.Q + h.pp * y.P);
  d.dP = -0.5 * (h.xx * y.Q + h.xp * y.P);
  if (flip_dP) d.dP = -d.dP;
  return d;
}

void finish_state(const Medium& m, RayState& s) {
  const auto e = m.eval(s.region, s.x, s.p);
  s.ve = 0.5 * e.Gp;
}

// Normal slowness component eta such that G(x, pt t + eta n) = 1, on the
// branch whose energy flux has the sign of `side` along n.
std::optional<double> solve_normal_slowness(const Medium& m, int region,
                                            const Vec2& x, const Vec2& t,
                                            const Vec2& n, double pt,
                                            double scale, int side) {
  auto f = [&](double eta) { return m.eval(region, x, pt * t + eta * n).G - 1.0; };
  auto dfn = [&](double eta) { return m.eval(region, x, pt * t + eta * n).Gp.dot(n); };
  const double bound = 10.0 * scale;
  // G is convex along the line, so the derivative changes sign once.
  double lo = -bound, hi = bound;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * scale; ++it) {
    const double mid = 0.5 * (lo + hi);
    (dfn(mid) > 0 ? hi : lo) = mid;
  }
  const double eta_min = 0.5 * (lo + hi);
  const double fmin = f(eta_min);
  if (fmin > 0) return std::nullopt;
  double a = side > 0 ? eta_min : -bound;
  double b = side > 0 ? bound : eta_min;
  std::uintmax_t iters = 200;
  const auto tol = boost::math::tools::eps_tolerance<double>(52);
  auto [r0, r1] = boost::math::tools::toms748_solve(f, a, b, tol, iters);
  double eta = 0.5 * (r0 + r1);
  for (int k = 0; k < 3; ++k) {
    const double fv = f(eta);
    const double dv = dfn(eta);
    if (fv == 0.0 || dv == 0.0) break;
    eta -= fv / dv;
  }
  return eta;
}

// Transfers (Q, P) across a straight boundary from the incoming state to
// an outgoing state that shares the interface point.
void transfer_paraxial(const Medium& m, const RayState& in, RayState& out,
                       const Vec2& n) {
  const Vec2 t(-n.y(), n.x());
  const auto ein = m.eval(in.region, in.x, in.p);
  const auto eout = m.eval(out.region, out.x, out.p);
  const Vec2 ve_in = 0.5 * ein.Gp;
  const Vec2 ve_out = 0.5 * eout.Gp;
  const Vec2 pdot_in = -0.5 * ein.Gx;
  const Vec2 pdot_out = -0.5 * eout.Gx;

  const double dT = -in.Q.dot(n) / ve_in.dot(n);
  const double ds = in.Q.dot(t) + ve_in.dot(t) * dT;
  out.Q = in.Q + (ve_in - ve_out) * dT;

  const Vec2 P_interface = in.P + pdot_in * dT;
  const double alpha = P_interface.dot(t);
  const double beta =
      (-eout.Gx.dot(t) * ds - 2.0 * alpha * ve_out.dot(t)) / (2.0 * ve_out.dot(n));
  out.P = alpha * t + beta * n - pdot_out * dT;
}

RefractResult redirect(const Medium& m, const RayState& s, const Vec2& normal,
                       int target_region, int side) {
  const Vec2 t(-normal.y(), normal.x());
  const double pt = s.p.dot(t);
  const auto eta = solve_normal_slowness(m, target_region, s.x, t, normal, pt,
                                         s.p.norm(), side);
  RefractResult r;
  if (!eta) {
    r.total_reflection = true;
    return r;
  }
  r.state = s;
  r.state.region = target_region;
  r.state.p = pt * t + *eta * normal;
  finish_state(m, r.state);
  transfer_paraxial(m, s, r.state, normal);
  return r;
}

double impedance(const Medium& m, int region, const Vec2& x, const Vec2& n) {
  return m.density(region) / m.slowness(region, x, n);
}

}  // namespace

const char* to_string(EventType type) {
  switch (type) {
    case EventType::interface_crossing: return "interface";
    case EventType::surface_reflection: return "surface_reflection";
    case EventType::total_reflection: return "total_reflection";
    case EventType::exit: return "exit";
    case EventType::defect_hit: return "defect_hit";
  }
  return "unknown";
}

RayState initial_state(const Medium& medium, const Vec2& source, double gamma) {
  const int region = medium.specimen().locate(source);
  if (region < 0) {
    throw DomainError(fmt::format(
        "source ({}, {}) mm lies outside the specimen", source.x(), source.y()));
  }
  const Vec2 n(std::cos(gamma), std::sin(gamma));
  const Vec2 dn(-std::sin(gamma), std::cos(gamma));
  const auto e = medium.eval(region, source, n);
  const double v = std::sqrt(e.G);
  const double dv = e.Gp.dot(dn) / (2.0 * v);
  RayState s;
  s.x = source;
  s.region = region;
  s.p = n / v;
  s.P = dn / v - n * dv / (v * v);
  s.Q = Vec2::Zero();
  finish_state(medium, s);
  return s;
}

Derivatives derivatives(const Medium& medium, const RayState& state,
                        bool flip_dP_sign) {
  return rhs(medium, state.region, {state.x, state.p, state.Q, state.P},
             flip_dP_sign);
}

RayState step(const Medium& medium, const RayState& state, double dT,
              Integrator scheme, bool flip_dP_sign) {
  if (!(dT > 0)) throw ContractViolation("integration step must be positive");
  const int r = state.region;
  const Phase y{state.x, state.p, state.Q, state.P};
  Phase out;
  const auto k1 = rhs(medium, r, y, flip_dP_sign);
  if (scheme == Integrator::euler) {
    out = add(y, k1, dT);
  } else {
    const auto k2 = rhs(medium, r, add(y, k1, 0.5 * dT), flip_dP_sign);
    const auto k3 = rhs(medium, r, add(y, k2, 0.5 * dT), flip_dP_sign);
    const auto k4 = rhs(medium, r, add(y, k3, dT), flip_dP_sign);
    Derivatives k;
    k.dx = (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx) / 6.0;
    k.dp = (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp) / 6.0;
    k.dQ = (k1.dQ + 2.0 * k2.dQ + 2.0 * k3.dQ + k4.dQ) / 6.0;
    k.dP = (k1.dP + 2.0 * k2.dP + 2.0 * k3.dP + k4.dP) / 6.0;
    out = add(y, k, dT);
  }
  RayState s = state;
  s.x = out.x;
  s.Q = out.Q;
  s.P = out.P;
  const auto e = medium.eval(r, out.x, out.p);
  s.p = out.p / std::sqrt(e.G);
  s.ve = 0.5 * e.Gp / std::sqrt(e.G);
  s.T = state.T + dT;
  s.atten_db = state.atten_db + medium.attenuation_db_per_mm(r) * (s.x - state.x).norm();
  const double j0 = state.jacobian();
  const double j1 = s.jacobian();
  if ((j0 > 0 && j1 < 0) || (j0 < 0 && j1 > 0)) ++s.kmah;
  return s;
}

RefractResult refract(const Medium& medium, const RayState& state,
                      const Vec2& normal, int incoming, int outgoing) {
  if (std::abs(normal.norm() - 1.0) > 1e-9) {
    throw ContractViolation("interface normal must be a unit vector");
  }
  RayState in = state;
  in.region = incoming;
  auto r = redirect(medium, in, normal, outgoing, +1);
  if (!r.total_reflection) {
    const double z1 = impedance(medium, incoming, in.x, normal);
    const double z2 = impedance(medium, outgoing, in.x, normal);
    r.coefficient = 2.0 * z2 / (z1 + z2);
    r.state.transmission *= r.coefficient;
    return r;
  }
  auto back = redirect(medium, in, normal, incoming, -1);
  back.total_reflection = true;
  back.coefficient = 1.0;
  return back;
}

RefractResult reflect(const Medium& medium, const RayState& state,
                      const Vec2& normal) {
  auto r = redirect(medium, state, normal, state.region, -1);
  if (r.total_reflection) {
    throw ContractViolation("no reflected qL branch for this slowness");
  }
  r.total_reflection = false;
  r.coefficient = 1.0;
  return r;
}

Ray trace(const Medium& medium, const Vec2& source, double gamma,
          const TraceOptions& opt) {
  const Specimen& sp = medium.specimen();
  Ray ray;
  ray.source = source;
  ray.gamma = gamma;
  RayState s = initial_state(medium, source, gamma);
  ray.states.push_back(s);
  int reflections = 0;
  bool have_ref = false;

  auto note_residual = [&](const RayState& st) {
    const double g = medium.eval(st.region, st.x, st.p).G;
    ray.max_eikonal_residual = std::max(ray.max_eikonal_residual, std::abs(g - 1.0));
  };
  auto check_ref = [&](const RayState& st) {
    if (!have_ref && st.T >= opt.T_ref_us - 1e-12) {
      ray.reference_flux = medium.density(st.region) * std::abs(st.jacobian());
      have_ref = true;
    }
  };
  auto check_defects = [&](const RayState& a, const RayState& b) {
    for (const auto& [d0, d1] : opt.defect_segments) {
      const Vec2 r = b.x - a.x;
      const Vec2 q = d1 - d0;
      const double den = cross2(r, q);
      if (den == 0.0) continue;
      const double t = cross2(d0 - a.x, q) / den;
      const double u = cross2(d0 - a.x, r) / den;
      if (t >= 0 && t <= 1 && u >= 0 && u <= 1) {
        RayEvent ev;
        ev.type = EventType::defect_hit;
        ev.T = a.T + t * (b.T - a.T);
        ev.x = a.x + t * r;
        ev.from_region = ev.to_region = a.region;
        ray.events.push_back(ev);
      }
    }
  };

  while (true) {
    if (s.T >= opt.max_T_us - 1e-12) {
      ray.status = RayStatus::time_limit;
      break;
    }
    if (static_cast<int>(ray.events.size()) >= opt.max_events) {
      ray.status = RayStatus::event_limit;
      break;
    }
    double dt = medium.uniform(s.region) ? std::max(opt.dT_uniform_us, opt.dT_us)
                                         : opt.dT_us;
    dt = std::min(dt, opt.max_T_us - s.T);
    if (!have_ref && s.T + dt > opt.T_ref_us) dt = opt.T_ref_us - s.T;

    RayState trial = step(medium, s, dt, opt.scheme, opt.flip_dP_sign);
    if (sp.region_contains(s.region, trial.x)) {
      check_defects(s, trial);
      s = trial;
      note_residual(s);
      check_ref(s);
      ray.states.push_back(s);
      continue;
    }

    // Land on the boundary by bisecting the step length.
    double lo = 0.0, hi = dt;
    Vec2 x_lo = s.x, x_hi = trial.x;
    RayState s_lo = s;
    while ((x_hi - x_lo).norm() > opt.boundary_tol_mm && hi - lo > 1e-14) {
      const double mid = 0.5 * (lo + hi);
      RayState m = step(medium, s, mid, opt.scheme, opt.flip_dP_sign);
      if (sp.region_contains(s.region, m.x)) {
        lo = mid;
        x_lo = m.x;
        s_lo = m;
      } else {
        hi = mid;
        x_hi = m.x;
      }
    }
    auto hit = sp.first_crossing(s.region, x_lo, x_hi);
    if (!hit && x_hi != x_lo) {
      // x_lo may sit a hair outside the edge it is counted as lying on.
      const Vec2 back = 1e-4 * (x_hi - x_lo).normalized();
      hit = sp.first_crossing(s.region, x_lo - back, x_hi);
    }
    if (lo > 0) {
      check_defects(s, s_lo);
      s = s_lo;
      note_residual(s);
      check_ref(s);
      ray.states.push_back(s);
    }
    if (!hit) {
      // Grazing exit through a vertex; nothing sensible to continue with.
      RayEvent ev;
      ev.type = EventType::exit;
      ev.T = s.T;
      ev.x = s.x;
      ev.from_region = s.region;
      ray.events.push_back(ev);
      ray.status = RayStatus::exited;
      break;
    }
    const Vec2 shift = hit->point - s.x;
    s.T += s.p.dot(shift);
    s.atten_db += medium.attenuation_db_per_mm(s.region) * shift.norm();
    s.x = hit->point;
    if (shift.squaredNorm() > 0) ray.states.push_back(s);
    check_ref(s);

    int out = sp.locate(x_hi);
    // Neighbouring polygons may leave slivers narrower than the bisection
    // tolerance; look a little further along the normal before giving up.
    for (double probe = 1e-5; (out < 0 || out == s.region) && probe <= 1e-3; probe *= 10.0)
      out = sp.locate(hit->point + probe * hit->normal);
    const Vec2 tangent(-hit->normal.y(), hit->normal.x());
    RayEvent ev;
    ev.T = s.T;
    ev.x = s.x;
    ev.from_region = s.region;
    ev.tangential_in = s.p.dot(tangent);

    if (out < 0 || out == s.region) {
      if (!sp.is_surface_edge(s.region, hit->edge)) {
        ev.type = EventType::exit;
        ray.events.push_back(ev);
        ray.status = RayStatus::exited;
        break;
      }
      ev.type = EventType::surface_reflection;
      ev.to_region = s.region;
      ++reflections;
      if (opt.max_reflections >= 0 && reflections > opt.max_reflections) {
        ev.tangential_out = ev.tangential_in;
        ray.events.push_back(ev);
        ray.status = RayStatus::reflection_limit;
        break;
      }
      auto r = reflect(medium, s, hit->normal);
      s = r.state;
      ev.coefficient = r.coefficient;
    } else {
      auto r = refract(medium, s, hit->normal, s.region, out);
      ev.type = r.total_reflection ? EventType::total_reflection
                                   : EventType::interface_crossing;
      ev.to_region = r.state.region;
      ev.coefficient = r.coefficient;
      s = r.state;
    }
    ev.tangential_out = s.p.dot(tangent);
    ray.events.push_back(ev);
    note_residual(s);
    ray.states.push_back(s);
  }
  return ray;
}

Amplitude amplitude(const Medium& medium, const Ray& ray, const RayState& st) {
  Amplitude a;
  a.kmah = st.kmah;
  const double flux = medium.density(st.region) * std::abs(st.jacobian());
  if (!(ray.reference_flux > 0)) {
    throw ContractViolation("ray never reached the reference time");
  }
  if (flux <= 1e-12 * ray.reference_flux) {
    a.caustic = true;
    return a;
  }
  a.value = std::sqrt(ray.reference_flux / flux) * st.transmission *
            std::pow(10.0, -st.atten_db / 20.0);
  return a;
}

Amplitude amplitude(const Medium& medium, const Ray& ray, std::size_t sample) {
  auto a = amplitude(medium, ray, ray.states.at(sample));
  if (!a.caustic) return a;
  // Report the nearest sample off the caustic, keeping the flag.
  for (std::size_t d = 1; d < ray.states.size(); ++d) {
    for (std::size_t k : {sample + d, sample - d}) {
      if (k >= ray.states.size()) continue;
      auto b = amplitude(medium, ray, ray.states[k]);
      if (!b.caustic) {
        b.caustic = true;
        return b;
      }
    }
  }
  return a;
}

Amplitude amplitude_at_event(const Medium& medium, const Ray& ray,
                             std::size_t index) {
  const auto& ev = ray.events.at(index);
  // Last sample at or before the event on the incoming side.
  std::size_t best = 0;
  for (std::size_t k = 0; k < ray.states.size(); ++k) {
    if (ray.states[k].T <= ev.T + 1e-12 && ray.states[k].region == ev.from_region) {
      best = k;
    }
    if (ray.states[k].T > ev.T + 1e-12) break;
  }
  return amplitude(medium, ray, best);
}

std::optional<ClosestApproach> closest_approach(const Ray& ray, const Vec2& target) {
  if (ray.states.empty()) return std::nullopt;
  ClosestApproach best;
  best.distance = std::numeric_limits<double>::infinity();
  double best_u = 0.0;
  for (std::size_t k = 0; k + 1 < ray.states.size(); ++k) {
    const Vec2& a = ray.states[k].x;
    const Vec2& b = ray.states[k + 1].x;
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    const double u = len2 > 0 ? std::clamp((target - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    const double d = (a + u * ab - target).norm();
    if (d < best.distance) {
      best.distance = d;
      best.segment = k;
      best_u = u;
    }
  }
  if (ray.states.size() == 1) {
    best.distance = (ray.states[0].x - target).norm();
  }
  const RayState& a = ray.states[best.segment];
  const RayState& b = ray.states[std::min(best.segment + 1, ray.states.size() - 1)];
  RayState s = a;
  const double u = best_u;
  s.x = (1 - u) * a.x + u * b.x;
  s.p = (1 - u) * a.p + u * b.p;
  s.Q = (1 - u) * a.Q + u * b.Q;
  s.P = (1 - u) * a.P + u * b.P;
  s.T = (1 - u) * a.T + u * b.T;
  s.ve = (1 - u) * a.ve + u * b.ve;
  s.atten_db = (1 - u) * a.atten_db + u * b.atten_db;
  best.state = s;
  const Vec2 dir = s.ve.normalized();
  best.offset = cross2(dir, target - s.x);
  best.q_perp = cross2(dir, s.Q);
  best.time_at_target = s.T + s.p.dot(target - s.x);
  return best;
}

std::optional<Vec2> position_at(const Ray& ray, double T) {
  const auto& st = ray.states;
  if (st.empty() || T < st.front().T || T > st.back().T) return std::nullopt;
  for (std::size_t k = 0; k + 1 < st.size(); ++k) {
    const auto& a = st[k];
    const auto& b = st[k + 1];
    if (T < a.T || T > b.T) continue;
    const double h = b.T - a.T;
    if (h <= 0) return a.x;
    const double u = (T - a.T) / h;
    const double h00 = 2 * u * u * u - 3 * u * u + 1;
    const double h10 = u * u * u - 2 * u * u + u;
    const double h01 = -2 * u * u * u + 3 * u * u;
    const double h11 = u * u * u - u * u;
    return Vec2(h00 * a.x + h10 * h * a.ve + h01 * b.x + h11 * h * b.ve);
  }
  return st.back().x;
}

}  // namespace weldray
