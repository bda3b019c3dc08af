#include "weldray/io.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "weldray/errors.hpp"

namespace weldray {

namespace fs = std::filesystem;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

const Json& require(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key))
    throw ConfigError(where + ": missing field '" + key + "'");
  return j.at(key);
}

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  return j.get<double>();
}

std::string text(const Json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + ": expected a string");
  return j.get<std::string>();
}

Vec2 point(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(where + ": expected [x, z]");
  return {number(j[0], where + "[0]"), number(j[1], where + "[1]")};
}

OrientationSource orientation_from_json(const Json& j, const fs::path& base,
                                        const std::string& where) {
  if (!j.is_object() || j.count("constant") + j.count("ogilvy") + j.count("grid") != 1)
    throw ConfigError(where + ": expected exactly one of constant, ogilvy or grid");
  for (const auto& [key, value] : j.items())
    if (key != "constant" && key != "ogilvy" && key != "grid" && key != "smooth_mm")
      throw ConfigError(where + ": unknown field '" + key + "'");
  if (j.contains("constant"))
    return ConstantOrientation{number(j["constant"], where + ".constant") * kDeg};
  if (j.contains("ogilvy")) {
    const Json& o = j["ogilvy"];
    const std::string w = where + ".ogilvy";
    OgilvyParams p;
    p.D_mm = number(require(o, "D", w), w + ".D");
    p.alpha_deg = number(require(o, "alpha_deg", w), w + ".alpha_deg");
    p.T = number(require(o, "T", w), w + ".T");
    p.eta = number(require(o, "eta", w), w + ".eta");
    try {
      p.validate();
    } catch (const ContractViolation& e) {
      throw ConfigError(w + ": " + e.what());
    }
    return OgilvyOrientation{p};
  }
  if (j.contains("grid")) {
    fs::path file = text(j["grid"], where + ".grid");
    if (file.is_relative()) file = base / file;
    const double sigma = j.contains("smooth_mm") ? number(j["smooth_mm"], where + ".smooth_mm") : 0.0;
    if (sigma < 0.0) throw ConfigError(where + ".smooth_mm: must be >= 0");
    auto grid = std::make_shared<OrientationGrid>(smooth_grid(read_orientation_csv(file), sigma));
    return GridOrientation{grid};
  }
  throw ConfigError(where + ": expected one of constant, ogilvy or grid");
}

}  // namespace

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

ElasticMaterial material_from_json(const Json& j, const std::string& where) {
  ElasticMaterial m;
  m.name = text(require(j, "name", where), where + ".name");
  const Json& v = require(j, "voigt", where);
  if (!v.is_array()) throw ConfigError(where + ".voigt: expected an array");
  std::vector<double> c;
  for (std::size_t i = 0; i < v.size(); ++i)
    c.push_back(number(v[i], fmt::format("{}.voigt[{}]", where, i)));
  if (c.size() == 9) {
    std::array<double, 9> nine;
    std::copy(c.begin(), c.end(), nine.begin());
    m.stiffness_gpa = orthotropic_stiffness(nine);
  } else if (c.size() == 21) {
    // Upper triangle, row by row.
    int k = 0;
    for (int r = 0; r < 6; ++r)
      for (int s = r; s < 6; ++s) m.stiffness_gpa(r, s) = m.stiffness_gpa(s, r) = c[k++];
  } else {
    throw ConfigError(where + ".voigt: expected 9 or 21 constants, got " + std::to_string(c.size()));
  }
  m.density = number(require(j, "density_kg_m3", where), where + ".density_kg_m3");
  if (j.contains("attenuation_db_per_mm")) {
    const Json& a = j["attenuation_db_per_mm"];
    if (!a.is_object()) throw ConfigError(where + ".attenuation_db_per_mm: expected an object");
    for (const auto& [key, value] : a.items()) {
      const std::string w = where + ".attenuation_db_per_mm." + key;
      double f = 0.0;
      try {
        std::size_t used = 0;
        f = std::stod(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        throw ConfigError(w + ": key must be a frequency in MHz");
      }
      m.attenuation_db_per_mm[f] = number(value, w);
    }
  }
  try {
    m.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return m;
}

ElasticMaterial load_material(const fs::path& path) {
  return material_from_json(read_json(path), path.string());
}

Json material_to_json(const ElasticMaterial& m) {
  Json j;
  j["name"] = m.name;
  Json v = Json::array();
  for (int r = 0; r < 6; ++r)
    for (int s = r; s < 6; ++s) v.push_back(m.stiffness_gpa(r, s));
  j["voigt"] = v;
  j["density_kg_m3"] = m.density;
  Json a = Json::object();
  for (const auto& [f, db] : m.attenuation_db_per_mm) a[fmt::format("{:g}", f)] = db;
  j["attenuation_db_per_mm"] = a;
  return j;
}

Specimen load_specimen(const fs::path& path,
                       const std::map<std::string, fs::path>& material_overrides) {
  const Json j = read_json(path);
  const std::string where = path.string();
  const fs::path base = path.parent_path();
  Specimen sp;
  sp.name = j.contains("name") ? text(j["name"], where + ".name") : path.stem().string();
  sp.inner_z = number(require(j, "inner_z_mm", where), where + ".inner_z_mm");
  sp.outer_z = number(require(j, "outer_z_mm", where), where + ".outer_z_mm");

  const Json& mats = require(j, "materials", where);
  if (!mats.is_object()) throw ConfigError(where + ".materials: expected an object");
  std::map<std::string, int> index;
  for (const auto& [key, value] : mats.items()) {
    fs::path file = text(value, where + ".materials." + key);
    if (file.is_relative()) file = base / file;
    if (auto it = material_overrides.find(key); it != material_overrides.end()) file = it->second;
    index[key] = static_cast<int>(sp.materials.size());
    sp.materials.push_back(load_material(file));
  }
  for (const auto& [key, file] : material_overrides)
    if (!index.count(key))
      throw ConfigError("materials." + key + ": not a material of specimen " + where);

  const Json& regions = require(j, "regions", where);
  if (!regions.is_array() || regions.empty())
    throw ConfigError(where + ".regions: expected a non-empty array");
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const Json& r = regions[i];
    const std::string w = fmt::format("{}.regions[{}]", where, i);
    Region reg;
    reg.name = text(require(r, "name", w), w + ".name");
    reg.kind = region_kind_from_string(text(require(r, "kind", w), w + ".kind"));
    const std::string mat = text(require(r, "material", w), w + ".material");
    if (!index.count(mat)) throw ConfigError(w + ".material: unknown material '" + mat + "'");
    reg.material = index[mat];
    const Json& poly = require(r, "polygon", w);
    if (!poly.is_array()) throw ConfigError(w + ".polygon: expected an array of points");
    for (std::size_t k = 0; k < poly.size(); ++k)
      reg.polygon.push_back(point(poly[k], fmt::format("{}.polygon[{}]", w, k)));
    reg.orientation = r.contains("orientation")
                          ? orientation_from_json(r["orientation"], base, w + ".orientation")
                          : OrientationSource{ConstantOrientation{0.0}};
    sp.regions.push_back(std::move(reg));
  }
  try {
    sp.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return sp;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  std::string out;
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

void write_file_atomic(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string fmt_num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::string s = fmt::format("{:.6f}", v);
  if (s == "-0.000000") s.erase(0, 1);
  return s;
}

std::string rays_csv(const std::vector<Ray>& rays) {
  std::string out = "ray_id,T_us,x_mm,z_mm,px_s_per_mm,pz_s_per_mm,Qx,Qz,Px,Pz,atten_db,region\n";
  for (std::size_t id = 0; id < rays.size(); ++id) {
    for (const RayState& s : rays[id].states) {
      // Slowness is held in us/mm internally.
      out += fmt::format("{},{},{},{},{:.9e},{:.9e},{},{},{},{},{},{}\n", id, fmt_num(s.T),
                         fmt_num(s.x.x()), fmt_num(s.x.y()), s.p.x() * 1e-6, s.p.y() * 1e-6,
                         fmt_num(s.Q.x()), fmt_num(s.Q.y()), fmt_num(s.P.x()), fmt_num(s.P.y()),
                         fmt_num(s.atten_db), s.region);
    }
  }
  return out;
}

std::string events_csv(const std::vector<Ray>& rays) {
  std::string out = "ray_id,event_type,T_us,x_mm,z_mm\n";
  for (std::size_t id = 0; id < rays.size(); ++id)
    for (const RayEvent& e : rays[id].events)
      out += fmt::format("{},{},{},{},{}\n", id, to_string(e.type), fmt_num(e.T), fmt_num(e.x.x()),
                         fmt_num(e.x.y()));
  return out;
}

std::string bscan_csv(const BScan& scan) {
  std::string out = "position_mm";
  for (double t : scan.times_us) out += "," + fmt_num(t);
  out += '\n';
  for (std::size_t k = 0; k < scan.positions_mm.size(); ++k) {
    out += fmt_num(scan.positions_mm[k]);
    for (double v : scan.db[k]) out += "," + fmt_num(v);
    out += '\n';
  }
  return out;
}

std::string bscan_annotations_json(const BScan& scan) {
  auto list = [](const std::vector<EchoAnnotation>& v) {
    Json a = Json::array();
    for (const auto& e : v)
      a.push_back({{"type", to_string(e.type)},
                   {"position_mm", fmt_num(e.position_mm)},
                   {"time_us", fmt_num(e.time_us)},
                   {"peak_db", fmt_num(e.peak_db)}});
    return a;
  };
  Json j;
  j["floor_db"] = fmt_num(scan.floor_db);
  j["reference_amplitude"] = fmt::format("{:.9e}", scan.reference);
  j["peaks"] = list(scan.peaks);
  j["echoes"] = list(scan.echoes);
  return j.dump(2) + "\n";
}

namespace {

std::string pgm(std::size_t w, std::size_t h, const std::vector<unsigned char>& px) {
  std::string out = fmt::format("P5\n{} {}\n255\n", w, h);
  out.append(px.begin(), px.end());
  return out;
}

}  // namespace

std::string bscan_pgm(const BScan& scan) {
  double hi = scan.floor_db;
  for (const auto& row : scan.db)
    for (double v : row) hi = std::max(hi, v);
  const std::size_t w = scan.times_us.size(), h = scan.positions_mm.size();
  std::vector<unsigned char> px(w * h, 0);
  if (hi > scan.floor_db) {
    for (std::size_t k = 0; k < h; ++k)
      for (std::size_t i = 0; i < w; ++i)
        px[k * w + i] = static_cast<unsigned char>(
            std::lround(255.0 * (scan.db[k][i] - scan.floor_db) / (hi - scan.floor_db)));
  }
  return pgm(w, h, px);
}

OrientationMap sample_orientation_map(const Specimen& specimen, const OrientationLattice& lattice) {
  if (!(lattice.step_mm > 0.0) || lattice.x_max < lattice.x_min || lattice.z_max < lattice.z_min)
    throw ContractViolation("orientation lattice must have a positive step and ordered bounds");
  OrientationMap map;
  const auto nx = static_cast<int>(std::floor((lattice.x_max - lattice.x_min) / lattice.step_mm + 1e-9));
  const auto nz = static_cast<int>(std::floor((lattice.z_max - lattice.z_min) / lattice.step_mm + 1e-9));
  for (int i = 0; i <= nx; ++i) map.xs.push_back(lattice.x_min + i * lattice.step_mm);
  for (int i = 0; i <= nz; ++i) map.zs.push_back(lattice.z_min + i * lattice.step_mm);
  map.theta_deg.reserve(map.xs.size() * map.zs.size());
  for (double z : map.zs) {
    for (double x : map.xs) {
      if (specimen.locate(Vec2(x, z)) < 0) {
        map.theta_deg.push_back(std::nan(""));
        continue;
      }
      map.theta_deg.push_back(orientation_at(specimen, x, z).theta / kDeg);
    }
  }
  return map;
}

std::string orientation_map_csv(const OrientationMap& map) {
  std::string out = "x_mm,z_mm,theta_deg\n";
  for (std::size_t iz = 0; iz < map.zs.size(); ++iz)
    for (std::size_t ix = 0; ix < map.xs.size(); ++ix)
      out += fmt::format("{},{},{}\n", fmt_num(map.xs[ix]), fmt_num(map.zs[iz]),
                         fmt_num(map.at(ix, iz)));
  return out;
}

std::string orientation_map_pgm(const OrientationMap& map) {
  const std::size_t w = map.xs.size(), h = map.zs.size();
  std::vector<unsigned char> px(w * h, 0);
  for (std::size_t row = 0; row < h; ++row) {
    const std::size_t iz = h - 1 - row;
    for (std::size_t ix = 0; ix < w; ++ix) {
      const double t = map.at(ix, iz);
      if (std::isnan(t)) continue;
      px[row * w + ix] =
          static_cast<unsigned char>(std::lround(255.0 * (std::clamp(t, -90.0, 90.0) + 90.0) / 180.0));
    }
  }
  return pgm(w, h, px);
}

}  // namespace weldray
