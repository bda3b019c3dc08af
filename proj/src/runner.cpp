#include "weldray/runner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "weldray/errors.hpp"
#include "weldray/parallel.hpp"

namespace weldray {

namespace fs = std::filesystem;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Reads the fields of one JSON object and rejects any it did not ask for.
class Fields {
 public:
  Fields(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.push_back(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const Json::exception&) {
      throw ConfigError(field(key) + ": wrong type");
    }
  }

  template <class Fn>
  void object(const char* key, Fn&& fn) {
    seen_.push_back(key);
    if (!j_.contains(key)) return;
    Fields sub(j_.at(key), field(key));
    fn(sub);
    sub.finish();
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end())
        throw ConfigError(field(key) + ": unknown field");
  }

  std::string field(const std::string& key) const {
    return where_.empty() ? key : where_ + "." + key;
  }

 private:
  const Json& j_;
  std::string where_;
  std::vector<std::string> seen_;
};

void check(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field + ": " + what);
}

bool valid_side(const std::string& s) { return s == "stainless" || s == "ferritic"; }

std::string freq_tag(double f) { return fmt::format("{:g}MHz", f); }

Integrator integrator_from_string(const std::string& s) {
  return s == "euler" ? Integrator::euler : Integrator::rk4;
}

class Emitter {
 public:
  explicit Emitter(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void write(const std::string& name, const std::string& bytes) {
    write_file_atomic(dir_ / name, bytes);
    files_.push_back({name, sha256_hex(bytes), bytes.size()});
  }

  RunResult finish(const RunConfig& config, bool passed) {
    Json list = Json::array();
    for (const auto& f : files_)
      list.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    Json cfg = config_to_json(config);
    cfg.erase("output_dir");
    Json manifest{{"study", config.study}, {"config", cfg}, {"files", list}};
    const fs::path path = dir_ / "manifest.json";
    write_file_atomic(path, manifest.dump(2) + "\n");
    return {passed, files_, path};
  }

 private:
  fs::path dir_;
  std::vector<OutputFile> files_;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_relative() ? base / path : path;
}

Specimen load(const RunConfig& config, const RunOptions& options) {
  std::map<std::string, fs::path> overrides;
  for (const auto& [key, file] : config.materials)
    overrides[key] = resolve(options.base_dir, file);
  return load_specimen(resolve(options.base_dir, config.specimen), overrides);
}

TraceOptions trace_options(const TraceStudy& t) {
  TraceOptions o;
  o.scheme = integrator_from_string(t.integrator);
  o.dT_us = t.dT_us;
  o.max_T_us = t.max_T_us;
  o.max_reflections = t.max_reflections;
  o.flip_dP_sign = t.flip_dP_sign;
  return o;
}

std::vector<Ray> trace_fan(const Medium& medium, const TraceStudy& t, const TraceOptions& o,
                           int threads) {
  std::vector<Ray> rays(t.ray_count);
  const Vec2 src(t.source_mm[0], t.source_mm[1]);
  parallel_for(rays.size(), threads, [&](std::size_t k) {
    const double f = t.ray_count == 1 ? 0.0 : double(k) / (t.ray_count - 1) - 0.5;
    rays[k] = trace(medium, src, (t.gamma_center_deg + f * t.span_deg) * kDeg, o);
  });
  return rays;
}

ScanOptions scan_options(const ScanStudy& s, int threads) {
  ScanOptions o;
  o.time_stop_us = s.time_stop_us;
  o.time_step_us = s.time_step_us;
  o.floor_db = s.floor_db;
  o.threads = threads;
  o.beam.capture_radius_mm = s.capture_radius_mm;
  o.beam.fan_rays = s.fan_rays;
  o.beam.fan_span_deg = s.fan_span_deg;
  o.beam.trace.max_T_us = s.time_stop_us;
  return o;
}

struct Check {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double limit = 0.0;
};

std::vector<Check> invariant_checks(const RunConfig& config, const Specimen& sp, int threads) {
  std::vector<Check> checks;
  for (std::size_t r = 0; r < sp.regions.size(); ++r) {
    const Region& reg = sp.regions[r];
    if (const auto* o = std::get_if<OgilvyOrientation>(&reg.orientation)) {
      double centre = 0.0, anti = 0.0;
      for (int i = 0; i <= 30; ++i) {
        const double z = sp.inner_z + sp.thickness() * i / 30.0;
        centre = std::max(centre, std::abs(ogilvy_angle(o->params, 0.0, z) / kDeg + 90.0));
        for (double x : {0.5, 1.0, 2.0, 4.0, 8.0})
          anti = std::max(anti, std::abs(ogilvy_angle(o->params, -x, z) +
                                         ogilvy_angle(o->params, x, z)));
      }
      checks.push_back({reg.name + ": centreline angle is -90 deg", centre == 0.0, centre, 0.0});
      checks.push_back({reg.name + ": antisymmetry in x", anti <= 1e-12, anti, 1e-12});
    }
    if (reg.kind == RegionKind::buttering) {
      const auto* c = std::get_if<ConstantOrientation>(&reg.orientation);
      const double dev = c ? std::abs(c->theta / kDeg - 90.0) : 90.0;
      checks.push_back({reg.name + ": buttering orientation 90 deg", dev <= 1e-12, dev, 1e-12});
    }
  }

  const Medium medium(sp, config.probe.frequency_mhz, config.attenuation_exponent);
  TraceStudy t = config.trace;
  t.max_reflections = 0;
  const auto rays = trace_fan(medium, t, trace_options(t), threads);
  double eikonal = 0.0, tangential = 0.0;
  for (const auto& ray : rays) {
    eikonal = std::max(eikonal, ray.max_eikonal_residual);
    for (const auto& e : ray.events)
      if (e.type == EventType::interface_crossing || e.type == EventType::surface_reflection ||
          e.type == EventType::total_reflection)
        tangential = std::max(tangential, std::abs(e.tangential_out - e.tangential_in));
  }
  checks.push_back({"eikonal residual along traced rays", eikonal <= 1e-5, eikonal, 1e-5});
  checks.push_back({"tangential slowness at interfaces", tangential <= 1e-10, tangential, 1e-10});
  return checks;
}

}  // namespace

std::vector<double> ScanStudy::distances() const {
  std::vector<double> d;
  const int n = static_cast<int>(std::floor((stop_mm - start_mm) / step_mm + 1e-9));
  for (int i = 0; i <= n; ++i) d.push_back(start_mm + i * step_mm);
  return d;
}

void RunConfig::validate() const {
  check(std::find(kStudies.begin(), kStudies.end(), study) != kStudies.end(), "study",
        "unknown study '" + study + "'");
  check(!specimen.empty(), "specimen", "path required");
  try {
    probe.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(std::string("probe: ") + e.what());
  }
  check(trace.ray_count >= 1, "trace.ray_count", "must be >= 1");
  check(trace.span_deg >= 0.0, "trace.span_deg", "must be >= 0");
  check(trace.dT_us > 0.0, "trace.dT_us", "must be > 0");
  check(trace.max_T_us > 0.0, "trace.max_T_us", "must be > 0");
  check(trace.integrator == "rk4" || trace.integrator == "euler", "trace.integrator",
        "must be rk4 or euler");
  check(orientation_map.step_mm > 0.0, "orientation_map.step_mm", "must be > 0");
  check(orientation_map.x_max_mm >= orientation_map.x_min_mm &&
            orientation_map.z_max_mm >= orientation_map.z_min_mm,
        "orientation_map", "bounds must be ordered");
  check(!scan.sides.empty(), "scan.sides", "must not be empty");
  for (const auto& s : scan.sides) check(valid_side(s), "scan.sides", "unknown side '" + s + "'");
  check(!scan.frequencies_mhz.empty(), "scan.frequencies_mhz", "must not be empty");
  for (double f : scan.frequencies_mhz) check(f > 0.0, "scan.frequencies_mhz", "must be > 0");
  check(scan.step_mm > 0.0, "scan.step_mm", "must be > 0");
  check(scan.start_mm >= 0.0 && scan.stop_mm >= scan.start_mm, "scan.start_mm",
        "need 0 <= start_mm <= stop_mm");
  check(scan.time_step_us > 0.0 && scan.time_stop_us > 0.0, "scan.time_step_us",
        "time axis must be positive");
  check(scan.floor_db < 0.0, "scan.floor_db", "must be < 0");
  check(scan.capture_radius_mm > 0.0, "scan.capture_radius_mm", "must be > 0");
  check(scan.fan_rays >= 1, "scan.fan_rays", "must be >= 1");
  check(scan.fan_span_deg >= 0.0, "scan.fan_span_deg", "must be >= 0");
  check(defect.height_mm > 0.0, "defect.height_mm", "must be > 0");
  check(std::abs(defect.tilt_deg) < 90.0, "defect.tilt_deg", "must be within (-90, 90)");
  check(!tilt_sweep.tilts_deg.empty(), "tilt_sweep.tilts_deg", "must not be empty");
  for (double t : tilt_sweep.tilts_deg)
    check(std::abs(t) <= 45.0, "tilt_sweep.tilts_deg", "tilts must be within +-45 deg");
  check(valid_side(tilt_sweep.side), "tilt_sweep.side", "unknown side '" + tilt_sweep.side + "'");
  check(tilt_sweep.frequency_mhz > 0.0, "tilt_sweep.frequency_mhz", "must be > 0");
  check(attenuation_exponent >= 0.0, "attenuation_exponent", "must be >= 0");
  check(!output_dir.empty(), "output_dir", "must not be empty");
}

RunConfig config_from_json(const Json& j) {
  RunConfig c;
  Fields f(j, "");
  f.get("study", c.study);
  f.get("specimen", c.specimen);
  f.get("materials", c.materials);
  f.object("probe", [&](Fields& p) {
    p.get("element_count", c.probe.element_count);
    p.get("pitch_mm", c.probe.pitch_mm);
    p.get("element_width_mm", c.probe.element_width_mm);
    p.get("elevation_mm", c.probe.elevation_mm);
    p.get("frequency_mhz", c.probe.frequency_mhz);
    p.get("steering_deg", c.probe.steering_deg);
    p.get("position_mm", c.probe.position_mm);
    p.get("first_element", c.probe.first_element);
    p.get("last_element", c.probe.last_element);
  });
  f.object("trace", [&](Fields& t) {
    t.get("source_mm", c.trace.source_mm);
    t.get("gamma_center_deg", c.trace.gamma_center_deg);
    t.get("span_deg", c.trace.span_deg);
    t.get("ray_count", c.trace.ray_count);
    t.get("integrator", c.trace.integrator);
    t.get("dT_us", c.trace.dT_us);
    t.get("max_T_us", c.trace.max_T_us);
    t.get("max_reflections", c.trace.max_reflections);
    t.get("flip_dP_sign", c.trace.flip_dP_sign);
  });
  f.object("orientation_map", [&](Fields& o) {
    o.get("x_min_mm", c.orientation_map.x_min_mm);
    o.get("x_max_mm", c.orientation_map.x_max_mm);
    o.get("z_min_mm", c.orientation_map.z_min_mm);
    o.get("z_max_mm", c.orientation_map.z_max_mm);
    o.get("step_mm", c.orientation_map.step_mm);
  });
  f.object("scan", [&](Fields& s) {
    s.get("sides", c.scan.sides);
    s.get("frequencies_mhz", c.scan.frequencies_mhz);
    s.get("start_mm", c.scan.start_mm);
    s.get("stop_mm", c.scan.stop_mm);
    s.get("step_mm", c.scan.step_mm);
    s.get("time_stop_us", c.scan.time_stop_us);
    s.get("time_step_us", c.scan.time_step_us);
    s.get("floor_db", c.scan.floor_db);
    s.get("capture_radius_mm", c.scan.capture_radius_mm);
    s.get("fan_rays", c.scan.fan_rays);
    s.get("fan_span_deg", c.scan.fan_span_deg);
    s.get("pgm", c.scan.pgm);
  });
  f.object("defect", [&](Fields& d) {
    d.get("foot_x_mm", c.defect.foot_x_mm);
    d.get("height_mm", c.defect.height_mm);
    d.get("tilt_deg", c.defect.tilt_deg);
    d.get("facets", c.defect.facets);
  });
  f.object("tilt_sweep", [&](Fields& t) {
    t.get("tilts_deg", c.tilt_sweep.tilts_deg);
    t.get("side", c.tilt_sweep.side);
    t.get("frequency_mhz", c.tilt_sweep.frequency_mhz);
  });
  f.get("attenuation_exponent", c.attenuation_exponent);
  f.get("deterministic", c.deterministic);
  f.get("output_dir", c.output_dir);
  f.finish();
  c.validate();
  return c;
}

Json config_to_json(const RunConfig& c) {
  const auto& p = c.probe;
  const auto& t = c.trace;
  const auto& o = c.orientation_map;
  const auto& s = c.scan;
  const auto& d = c.defect;
  return Json{
      {"study", c.study},
      {"specimen", c.specimen},
      {"materials", c.materials},
      {"probe",
       {{"element_count", p.element_count},
        {"pitch_mm", p.pitch_mm},
        {"element_width_mm", p.element_width_mm},
        {"elevation_mm", p.elevation_mm},
        {"frequency_mhz", p.frequency_mhz},
        {"steering_deg", p.steering_deg},
        {"position_mm", p.position_mm},
        {"first_element", p.first_element},
        {"last_element", p.last_element}}},
      {"trace",
       {{"source_mm", t.source_mm},
        {"gamma_center_deg", t.gamma_center_deg},
        {"span_deg", t.span_deg},
        {"ray_count", t.ray_count},
        {"integrator", t.integrator},
        {"dT_us", t.dT_us},
        {"max_T_us", t.max_T_us},
        {"max_reflections", t.max_reflections},
        {"flip_dP_sign", t.flip_dP_sign}}},
      {"orientation_map",
       {{"x_min_mm", o.x_min_mm},
        {"x_max_mm", o.x_max_mm},
        {"z_min_mm", o.z_min_mm},
        {"z_max_mm", o.z_max_mm},
        {"step_mm", o.step_mm}}},
      {"scan",
       {{"sides", s.sides},
        {"frequencies_mhz", s.frequencies_mhz},
        {"start_mm", s.start_mm},
        {"stop_mm", s.stop_mm},
        {"step_mm", s.step_mm},
        {"time_stop_us", s.time_stop_us},
        {"time_step_us", s.time_step_us},
        {"floor_db", s.floor_db},
        {"capture_radius_mm", s.capture_radius_mm},
        {"fan_rays", s.fan_rays},
        {"fan_span_deg", s.fan_span_deg},
        {"pgm", s.pgm}}},
      {"defect",
       {{"foot_x_mm", d.foot_x_mm},
        {"height_mm", d.height_mm},
        {"tilt_deg", d.tilt_deg},
        {"facets", d.facets}}},
      {"tilt_sweep",
       {{"tilts_deg", c.tilt_sweep.tilts_deg},
        {"side", c.tilt_sweep.side},
        {"frequency_mhz", c.tilt_sweep.frequency_mhz}}},
      {"attenuation_exponent", c.attenuation_exponent},
      {"deterministic", c.deterministic},
      {"output_dir", c.output_dir}};
}

RunConfig load_config(const fs::path& path) {
  try {
    return config_from_json(read_json(path));
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    if (msg.rfind(path.string(), 0) == 0) throw;
    throw ConfigError(path.string() + ": " + msg);
  }
}

Defect make_defect(const DefectSpec& spec, double inner_z) {
  Defect d;
  d.foot = Vec2(spec.foot_x_mm, inner_z);
  d.height_mm = spec.height_mm;
  d.tilt_deg = spec.tilt_deg;
  for (const auto& f : spec.facets) d.facets.emplace_back(f[0], f[1]);
  return d;
}

RunResult run(const RunConfig& config, const RunOptions& options) {
  config.validate();
  const fs::path out_dir =
      options.output_dir.empty() ? fs::path(config.output_dir) : options.output_dir;
  const int threads = std::max(1, options.threads);
  const Specimen sp = load(config, options);
  Emitter emit(out_dir);
  bool passed = true;

  if (config.study == "trace") {
    const Medium medium(sp, config.probe.frequency_mhz, config.attenuation_exponent);
    const auto rays = trace_fan(medium, config.trace, trace_options(config.trace), threads);
    emit.write("rays.csv", rays_csv(rays));
    emit.write("events.csv", events_csv(rays));
  } else if (config.study == "orientation-map") {
    const auto& o = config.orientation_map;
    const auto map =
        sample_orientation_map(sp, {o.x_min_mm, o.x_max_mm, o.z_min_mm, o.z_max_mm, o.step_mm});
    emit.write("orientation_map.csv", orientation_map_csv(map));
    emit.write("orientation_map.pgm", orientation_map_pgm(map));
  } else if (config.study == "bscan") {
    const Defect defect = make_defect(config.defect, sp.inner_z);
    Json summary = Json::array();
    for (double f : config.scan.frequencies_mhz) {
      const Medium medium(sp, f, config.attenuation_exponent);
      ProbeConfig probe = config.probe;
      probe.frequency_mhz = f;
      for (const auto& side_name : config.scan.sides) {
        const ScanSide side = scan_side_from_string(side_name);
        const BScan b = scan(probe, medium, defect, config.scan.distances(), side,
                             scan_options(config.scan, threads));
        const std::string stem = "bscan_" + side_name + "_" + freq_tag(f);
        emit.write(stem + ".csv", bscan_csv(b));
        emit.write(stem + ".json", bscan_annotations_json(b));
        if (config.scan.pgm) emit.write(stem + ".pgm", bscan_pgm(b));
        Json row{{"side", side_name}, {"frequency_mhz", fmt_num(f)}};
        for (const auto& p : b.peaks)
          row[std::string(to_string(p.type)) + "_peak_db"] = fmt_num(p.peak_db);
        summary.push_back(row);
      }
    }
    emit.write("bscan_summary.json", summary.dump(2) + "\n");
  } else if (config.study == "tilt-sweep") {
    const auto& ts = config.tilt_sweep;
    const Medium medium(sp, ts.frequency_mhz, config.attenuation_exponent);
    ProbeConfig probe = config.probe;
    probe.frequency_mhz = ts.frequency_mhz;
    const auto rows =
        tilt_sweep(probe, medium, make_defect(config.defect, sp.inner_z), ts.tilts_deg,
                   config.scan.distances(), scan_side_from_string(ts.side),
                   scan_options(config.scan, threads));
    std::string csv = "tilt_deg,peak_db\n";
    for (const auto& r : rows) csv += fmt_num(r.tilt_deg) + "," + fmt_num(r.peak_db) + "\n";
    emit.write("tilt_sweep.csv", csv);
  } else {
    const auto checks = invariant_checks(config, sp, threads);
    Json list = Json::array();
    for (const auto& c : checks) {
      passed = passed && c.passed;
      list.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"value", fmt::format("{:.3e}", c.value)},
                      {"limit", fmt::format("{:.3e}", c.limit)}});
    }
    const Json report{{"specimen", sp.name}, {"passed", passed}, {"checks", list}};
    emit.write("validate_report.json", report.dump(2) + "\n");
  }
  return emit.finish(config, passed);
}

}  // namespace weldray
