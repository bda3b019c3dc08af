#include "weldray/specimen.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "weldray/errors.hpp"

namespace weldray {

namespace {

constexpr double kEdgeTol = 1e-9;

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

bool on_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (a + t * ab - p).norm() <= kEdgeTol * (1.0 + std::sqrt(len2));
}

bool point_in_polygon(const std::vector<Vec2>& poly, const Vec2& p) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (on_segment(p, poly[i], poly[(i + 1) % n])) return true;
  }
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double xc = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < xc) inside = !inside;
    }
  }
  return inside;
}

// Strict crossing of open segments (touching endpoints do not count).
bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double d1 = cross2(b - a, c - a);
  const double d2 = cross2(b - a, d - a);
  const double d3 = cross2(d - c, a - c);
  const double d4 = cross2(d - c, b - c);
  const double scale = 1e-12 * ((b - a).squaredNorm() + (d - c).squaredNorm());
  return ((d1 > scale && d2 < -scale) || (d1 < -scale && d2 > scale)) &&
         ((d3 > scale && d4 < -scale) || (d3 < -scale && d4 > scale));
}

double signed_area(const std::vector<Vec2>& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    a += cross2(poly[i], poly[(i + 1) % poly.size()]);
  }
  return 0.5 * a;
}

}  // namespace

const char* to_string(RegionKind kind) {
  switch (kind) {
    case RegionKind::ferritic: return "ferritic";
    case RegionKind::stainless: return "stainless";
    case RegionKind::buttering: return "buttering";
    case RegionKind::weld: return "weld";
  }
  return "unknown";
}

RegionKind region_kind_from_string(const std::string& s) {
  if (s == "ferritic") return RegionKind::ferritic;
  if (s == "stainless") return RegionKind::stainless;
  if (s == "buttering") return RegionKind::buttering;
  if (s == "weld") return RegionKind::weld;
  throw ConfigError(fmt::format("unknown region kind '{}'", s));
}

void Specimen::validate() const {
  if (!(outer_z > inner_z)) {
    throw ContractViolation("outer surface must lie above the inner surface");
  }
  if (regions.empty()) throw ContractViolation("specimen has no regions");
  for (const auto& m : materials) m.validate();
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const auto& reg = regions[r];
    const auto& poly = reg.polygon;
    if (poly.size() < 3) {
      throw ContractViolation(fmt::format("region '{}' needs >= 3 vertices", reg.name));
    }
    if (reg.material < 0 || reg.material >= static_cast<int>(materials.size())) {
      throw ContractViolation(fmt::format("region '{}' has no material", reg.name));
    }
    if (std::abs(signed_area(poly)) <= 0) {
      throw ContractViolation(fmt::format("region '{}' has zero area", reg.name));
    }
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (segments_cross(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n])) {
          throw ContractViolation(
              fmt::format("region '{}' polygon is self-intersecting", reg.name));
        }
      }
    }
    if (const auto* g = std::get_if<GridOrientation>(&reg.orientation)) {
      if (!g->grid) throw ContractViolation("grid orientation without data");
      g->grid->validate();
    }
  }
  // Pairwise overlap: crossing edges, or an interior probe point of one
  // polygon strictly inside another.
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const auto& pa = regions[r].polygon;
    for (std::size_t s = r + 1; s < regions.size(); ++s) {
      const auto& pb = regions[s].polygon;
      for (std::size_t i = 0; i < pa.size(); ++i) {
        for (std::size_t j = 0; j < pb.size(); ++j) {
          if (segments_cross(pa[i], pa[(i + 1) % pa.size()], pb[j],
                             pb[(j + 1) % pb.size()])) {
            throw ContractViolation(fmt::format("regions '{}' and '{}' overlap",
                                                regions[r].name, regions[s].name));
          }
        }
      }
      auto strictly_inside = [](const std::vector<Vec2>& poly, const Vec2& p) {
        for (std::size_t i = 0; i < poly.size(); ++i) {
          if (on_segment(p, poly[i], poly[(i + 1) % poly.size()])) return false;
        }
        return point_in_polygon(poly, p);
      };
      auto centroid = [](const std::vector<Vec2>& p) {
        Vec2 c = Vec2::Zero();
        for (const auto& v : p) c += v;
        return Vec2(c / static_cast<double>(p.size()));
      };
      // Points just inside each edge catch overlaps along collinear edges.
      auto inner_edge_points = [](const std::vector<Vec2>& poly) {
        const double orient = signed_area(poly) > 0 ? 1.0 : -1.0;
        std::vector<Vec2> pts;
        for (std::size_t i = 0; i < poly.size(); ++i) {
          const Vec2& p = poly[i];
          const Vec2& q = poly[(i + 1) % poly.size()];
          const Vec2 e = q - p;
          const Vec2 inward = orient * Vec2(-e.y(), e.x()).normalized();
          for (double f : {0.25, 0.5, 0.75}) pts.push_back(p + f * e + 1e-6 * e.norm() * inward);
        }
        return pts;
      };
      bool overlap = false;
      for (const auto& v : pa) overlap |= strictly_inside(pb, v);
      for (const auto& v : pb) overlap |= strictly_inside(pa, v);
      for (const auto& v : inner_edge_points(pa)) overlap |= strictly_inside(pb, v);
      for (const auto& v : inner_edge_points(pb)) overlap |= strictly_inside(pa, v);
      const Vec2 ca = centroid(pa);
      const Vec2 cb = centroid(pb);
      overlap |= strictly_inside(pa, ca) && strictly_inside(pb, ca);
      overlap |= strictly_inside(pb, cb) && strictly_inside(pa, cb);
      if (overlap) {
        throw ContractViolation(fmt::format("regions '{}' and '{}' overlap",
                                            regions[r].name, regions[s].name));
      }
    }
  }
}

int Specimen::locate(const Vec2& x) const {
  for (std::size_t r = 0; r < regions.size(); ++r) {
    if (point_in_polygon(regions[r].polygon, x)) return static_cast<int>(r);
  }
  return -1;
}

bool Specimen::region_contains(int region, const Vec2& x) const {
  return point_in_polygon(regions[region].polygon, x);
}

std::optional<BoundaryHit> Specimen::first_crossing(int region, const Vec2& a,
                                                    const Vec2& b) const {
  const auto& poly = regions[region].polygon;
  const double orient = signed_area(poly) > 0 ? 1.0 : -1.0;
  const Vec2 d = b - a;
  std::optional<BoundaryHit> best;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    const Vec2 e = q - p;
    const double den = cross2(d, e);
    if (den == 0.0) continue;
    const double t = cross2(p - a, e) / den;
    const double u = cross2(p - a, d) / den;
    if (t < -1e-12 || t > 1.0 + 1e-12 || u < -1e-12 || u > 1.0 + 1e-12) continue;
    // Outward normal: edge direction rotated clockwise for CCW polygons.
    Vec2 nrm = orient * Vec2(e.y(), -e.x()).normalized();
    if (nrm.dot(d) <= 0) continue;  // entering, not leaving
    if (!best || t < best->t) {
      best = BoundaryHit{a + t * d, nrm, std::clamp(t, 0.0, 1.0), static_cast<int>(i)};
    }
  }
  return best;
}

bool Specimen::is_surface_edge(int region, int edge) const {
  const auto& poly = regions[region].polygon;
  const Vec2& p = poly[edge];
  const Vec2& q = poly[(edge + 1) % poly.size()];
  const double tol = 1e-9 * (1.0 + thickness());
  auto at = [&](double z) { return std::abs(p.y() - z) <= tol && std::abs(q.y() - z) <= tol; };
  return at(inner_z) || at(outer_z);
}

OrientationQuery orientation_at(const Specimen& specimen, double x, double z) {
  const int r = specimen.locate(Vec2(x, z));
  if (r < 0) {
    throw DomainError(
        fmt::format("point ({}, {}) mm lies outside every specimen region", x, z));
  }
  const auto& reg = specimen.regions[r];
  OrientationQuery q;
  q.region = r;
  q.kind = reg.kind;
  q.material = &specimen.materials[reg.material];
  q.theta = q.material->is_isotropic()
                ? 0.0
                : sample_orientation(reg.orientation, Vec2(x, z)).theta;
  return q;
}

std::optional<StiffnessGradient> stiffness_gradient(const Specimen& specimen,
                                                    double x, double z,
                                                    double h) {
  const int r = specimen.locate(Vec2(x, z));
  if (r < 0) {
    throw DomainError(
        fmt::format("point ({}, {}) mm lies outside every specimen region", x, z));
  }
  const Vec2 offsets[2] = {Vec2(h, 0.0), Vec2(0.0, h)};
  for (const auto& o : offsets) {
    for (double s : {-1.0, 1.0}) {
      if (specimen.locate(Vec2(x, z) + s * o) != r) return std::nullopt;
    }
  }
  const auto& reg = specimen.regions[r];
  const Voigt6 a = specimen.materials[reg.material].normalized_mm_us();
  auto rotated = [&](const Vec2& pt) {
    return rotate_stiffness(a, sample_orientation(reg.orientation, pt).theta);
  };
  StiffnessGradient g;
  for (int n = 0; n < 2; ++n) {
    g[n] = (rotated(Vec2(x, z) + offsets[n]) - rotated(Vec2(x, z) - offsets[n])) /
           (2.0 * h);
  }
  return g;
}

}  // namespace weldray
