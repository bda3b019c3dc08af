#include "weldray/orientation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "weldray/errors.hpp"

namespace weldray {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_half_pi(double a) {
  // Into (-pi/2, pi/2].
  a = std::remainder(a, kPi);
  if (a <= -kPi / 2) a += kPi;
  return a;
}

struct Cell {
  int ix;
  int iz;
  double fx;
  double fz;
};

Cell locate_cell(const OrientationGrid& g, double x, double z) {
  const double u = (x - g.origin.x()) / g.spacing.x();
  const double v = (z - g.origin.y()) / g.spacing.y();
  Cell c;
  c.ix = std::clamp(static_cast<int>(std::floor(u)), 0, g.nx - 2);
  c.iz = std::clamp(static_cast<int>(std::floor(v)), 0, g.nz - 2);
  c.fx = std::clamp(u - c.ix, 0.0, 1.0);
  c.fz = std::clamp(v - c.iz, 0.0, 1.0);
  return c;
}

OrientationSample interpolate(const OrientationGrid& g, const Cell& c) {
  double cv[4], sv[4];
  const int idx[4][2] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  for (int k = 0; k < 4; ++k) {
    const double a = 2.0 * g.at(c.ix + idx[k][0], c.iz + idx[k][1]);
    cv[k] = std::cos(a);
    sv[k] = std::sin(a);
  }
  const double wx0 = 1.0 - c.fx, wx1 = c.fx;
  const double wz0 = 1.0 - c.fz, wz1 = c.fz;
  const double cc =
      wz0 * (wx0 * cv[0] + wx1 * cv[1]) + wz1 * (wx0 * cv[2] + wx1 * cv[3]);
  const double ss =
      wz0 * (wx0 * sv[0] + wx1 * sv[1]) + wz1 * (wx0 * sv[2] + wx1 * sv[3]);
  const double dcdx =
      (wz0 * (cv[1] - cv[0]) + wz1 * (cv[3] - cv[2])) / g.spacing.x();
  const double dsdx =
      (wz0 * (sv[1] - sv[0]) + wz1 * (sv[3] - sv[2])) / g.spacing.x();
  const double dcdz =
      (wx0 * (cv[2] - cv[0]) + wx1 * (cv[3] - cv[1])) / g.spacing.y();
  const double dsdz =
      (wx0 * (sv[2] - sv[0]) + wx1 * (sv[3] - sv[1])) / g.spacing.y();
  const double r2 = cc * cc + ss * ss;
  OrientationSample s;
  // Node hits return the stored angle untouched.
  if ((c.fx == 0.0 || c.fx == 1.0) && (c.fz == 0.0 || c.fz == 1.0)) {
    s.theta = g.at(c.ix + static_cast<int>(c.fx), c.iz + static_cast<int>(c.fz));
  } else {
    s.theta = 0.5 * std::atan2(ss, cc);
  }
  if (r2 > 0) {
    s.grad = Vec2(0.5 * (cc * dsdx - ss * dcdx) / r2,
                  0.5 * (cc * dsdz - ss * dcdz) / r2);
  }
  return s;
}

}  // namespace

void OgilvyParams::validate() const {
  if (!(D_mm > 0) || !(alpha_deg > 0 && alpha_deg < 90) || !(T > 0) ||
      !(eta > 0)) {
    throw ContractViolation(fmt::format(
        "invalid Ogilvy parameters D={} alpha={} T={} eta={}", D_mm, alpha_deg,
        T, eta));
  }
}

double ogilvy_angle(const OgilvyParams& p, double x, double z) {
  if (x == 0.0) return -kPi / 2;
  const double c = p.T * (p.D_mm + z * std::tan(p.alpha_deg * kPi / 180.0));
  if (x > 0) return std::atan(c / std::pow(x, p.eta));
  return -std::atan(c / std::pow(-x, p.eta));
}

OrientationSample ogilvy_sample(const OgilvyParams& p, double x, double z) {
  OrientationSample s;
  s.theta = ogilvy_angle(p, x, z);
  const double ta = std::tan(p.alpha_deg * kPi / 180.0);
  const double c = p.T * (p.D_mm + z * ta);
  const double ax = std::abs(x);
  const double xe = std::pow(ax, p.eta);
  const double den = xe * xe + c * c;
  // d/dx is even in x, d/dz is odd.
  const double dx = -p.eta * c * std::pow(ax, p.eta - 1.0) / den;
  const double dz = p.T * ta * xe / den;
  s.grad = Vec2(dx, x < 0 ? -dz : dz);
  return s;
}

bool OrientationGrid::contains(double x, double z) const {
  const Vec2 hi = max_corner();
  const double tol = 1e-9 * std::max(spacing.x(), spacing.y());
  return x >= origin.x() - tol && x <= hi.x() + tol && z >= origin.y() - tol &&
         z <= hi.y() + tol;
}

void OrientationGrid::validate() const {
  if (!(spacing.x() > 0) || !(spacing.y() > 0)) {
    throw ContractViolation("orientation grid spacing must be positive");
  }
  if (nx < 2 || nz < 2 || static_cast<int>(angles.size()) != nx * nz) {
    throw ContractViolation(
        fmt::format("orientation grid needs at least 2x2 nodes, got {}x{}", nx,
                    nz));
  }
}

double grid_angle(const OrientationGrid& grid, double x, double z) {
  if (!grid.contains(x, z)) {
    throw DomainError(
        fmt::format("point ({}, {}) mm is outside the orientation grid", x, z));
  }
  return interpolate(grid, locate_cell(grid, x, z)).theta;
}

OrientationSample grid_sample(const OrientationGrid& grid, double x, double z) {
  return interpolate(grid, locate_cell(grid, x, z));
}

double lattice_lipschitz(const OrientationGrid& g) {
  double worst = 0.0;
  for (int iz = 0; iz < g.nz; ++iz) {
    for (int ix = 0; ix < g.nx; ++ix) {
      if (ix + 1 < g.nx) {
        worst = std::max(worst, std::abs(wrap_half_pi(g.at(ix + 1, iz) -
                                                      g.at(ix, iz))) /
                                    g.spacing.x());
      }
      if (iz + 1 < g.nz) {
        worst = std::max(worst, std::abs(wrap_half_pi(g.at(ix, iz + 1) -
                                                      g.at(ix, iz))) /
                                    g.spacing.y());
      }
    }
  }
  return worst;
}

OrientationGrid smooth_grid(const OrientationGrid& grid, double radius_mm) {
  if (!(radius_mm >= 0)) {
    throw ContractViolation("smoothing radius must be non-negative");
  }
  grid.validate();
  OrientationGrid out = grid;
  out.smoothing_radius_mm = radius_mm;
  if (radius_mm == 0.0) {
    out.lipschitz = lattice_lipschitz(out);
    return out;
  }

  // Smooth the doubled-angle unit vector so that +pi/2 and -pi/2 average
  // to a vertical axis instead of a horizontal one.
  const int n = grid.nx * grid.nz;
  std::vector<double> cs(n), sn(n);
  for (int i = 0; i < n; ++i) {
    cs[i] = std::cos(2.0 * grid.angles[i]);
    sn[i] = std::sin(2.0 * grid.angles[i]);
  }

  auto kernel = [&](double h) {
    const int half = static_cast<int>(std::ceil(3.0 * radius_mm / h));
    std::vector<double> w(2 * half + 1);
    for (int k = -half; k <= half; ++k) {
      const double d = k * h / radius_mm;
      w[k + half] = std::exp(-0.5 * d * d);
    }
    return w;
  };
  const std::vector<double> kx = kernel(grid.spacing.x());
  const std::vector<double> kz = kernel(grid.spacing.y());
  const int hx = static_cast<int>(kx.size() / 2);
  const int hz = static_cast<int>(kz.size() / 2);

  auto pass = [&](std::vector<double>& f, bool along_x) {
    std::vector<double> tmp(n);
    const auto& k = along_x ? kx : kz;
    const int half = along_x ? hx : hz;
    for (int iz = 0; iz < grid.nz; ++iz) {
      for (int ix = 0; ix < grid.nx; ++ix) {
        double acc = 0.0, wsum = 0.0;
        for (int o = -half; o <= half; ++o) {
          const int jx = along_x ? ix + o : ix;
          const int jz = along_x ? iz : iz + o;
          if (jx < 0 || jx >= grid.nx || jz < 0 || jz >= grid.nz) continue;
          const double w = k[o + half];
          acc += w * f[jz * grid.nx + jx];
          wsum += w;
        }
        tmp[iz * grid.nx + ix] = acc / wsum;
      }
    }
    f.swap(tmp);
  };
  pass(cs, true);
  pass(cs, false);
  pass(sn, true);
  pass(sn, false);

  for (int i = 0; i < n; ++i) out.angles[i] = 0.5 * std::atan2(sn[i], cs[i]);
  out.lipschitz = lattice_lipschitz(out);
  return out;
}

OrientationGrid read_orientation_csv(std::istream& in) {
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line)) throw ConfigError("orientation CSV is empty");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x_mm,z_mm,theta_deg") {
    throw ConfigError(
        fmt::format("orientation CSV line 1: expected header "
                    "'x_mm,z_mm,theta_deg', got '{}'",
                    line));
  }
  struct Row {
    double x, z, t;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    Row r{};
    char c1 = 0, c2 = 0;
    if (!(ls >> r.x >> c1 >> r.z >> c2 >> r.t) || c1 != ',' || c2 != ',') {
      throw ConfigError(
          fmt::format("orientation CSV line {}: cannot parse '{}'", lineno, line));
    }
    rows.push_back(r);
  }
  if (rows.empty()) throw ConfigError("orientation CSV has no data rows");

  auto axis = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::vector<double> u;
    for (double a : v) {
      if (u.empty() || std::abs(a - u.back()) > 1e-9 * (1.0 + std::abs(a))) {
        u.push_back(a);
      }
    }
    return u;
  };
  std::vector<double> xs, zs;
  for (const auto& r : rows) {
    xs.push_back(r.x);
    zs.push_back(r.z);
  }
  const auto ux = axis(xs);
  const auto uz = axis(zs);
  OrientationGrid g;
  g.nx = static_cast<int>(ux.size());
  g.nz = static_cast<int>(uz.size());
  if (g.nx < 2 || g.nz < 2 ||
      rows.size() != static_cast<std::size_t>(g.nx) * g.nz) {
    throw ConfigError(fmt::format(
        "orientation CSV does not form a rectangular lattice ({} rows for "
        "{}x{} nodes)",
        rows.size(), g.nx, g.nz));
  }
  g.origin = Vec2(ux.front(), uz.front());
  g.spacing = Vec2((ux.back() - ux.front()) / (g.nx - 1),
                   (uz.back() - uz.front()) / (g.nz - 1));
  auto check_uniform = [](const std::vector<double>& u, double h) {
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (std::abs(u[i] - (u.front() + h * i)) > 1e-6 * h) return false;
    }
    return true;
  };
  if (!check_uniform(ux, g.spacing.x()) || !check_uniform(uz, g.spacing.y())) {
    throw ConfigError("orientation CSV lattice spacing is not uniform");
  }
  g.angles.assign(static_cast<std::size_t>(g.nx) * g.nz, 0.0);
  std::vector<char> seen(g.angles.size(), 0);
  for (const auto& r : rows) {
    const int ix = static_cast<int>(std::lround((r.x - g.origin.x()) / g.spacing.x()));
    const int iz = static_cast<int>(std::lround((r.z - g.origin.y()) / g.spacing.y()));
    const std::size_t k = static_cast<std::size_t>(iz) * g.nx + ix;
    if (seen[k]) {
      throw ConfigError(
          fmt::format("orientation CSV has duplicate node ({}, {})", r.x, r.z));
    }
    seen[k] = 1;
    g.angles[k] = wrap_half_pi(r.t * kPi / 180.0);
  }
  g.lipschitz = lattice_lipschitz(g);
  return g;
}

OrientationGrid read_orientation_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(
        fmt::format("cannot open orientation grid '{}'", path.string()));
  }
  return read_orientation_csv(in);
}

void write_orientation_csv(std::ostream& out, const OrientationGrid& g) {
  out << "x_mm,z_mm,theta_deg\n";
  for (int iz = 0; iz < g.nz; ++iz) {
    for (int ix = 0; ix < g.nx; ++ix) {
      out << fmt::format("{:.6f},{:.6f},{:.6f}\n",
                         g.origin.x() + ix * g.spacing.x(),
                         g.origin.y() + iz * g.spacing.y(),
                         g.at(ix, iz) * 180.0 / kPi);
    }
  }
}

OrientationSample sample_orientation(const OrientationSource& source,
                                     const Vec2& x) {
  return std::visit(
      [&](const auto& s) -> OrientationSample {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ConstantOrientation>) {
          return {s.theta, Vec2::Zero()};
        } else if constexpr (std::is_same_v<T, OgilvyOrientation>) {
          return ogilvy_sample(s.params, x.x(), x.y());
        } else {
          return grid_sample(*s.grid, x.x(), x.y());
        }
      },
      source);
}

}  // namespace weldray
