#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "weldray/io.hpp"

namespace weldray {

struct TraceStudy {
  std::array<double, 2> source_mm{-25.0, 30.0};
  double gamma_center_deg = -41.0;  // take-off angle from +x
  double span_deg = 30.0;
  int ray_count = 31;
  std::string integrator = "rk4";
  double dT_us = 0.01;
  double max_T_us = 30.0;
  int max_reflections = -1;
  bool flip_dP_sign = false;
  bool operator==(const TraceStudy&) const = default;
};

struct OrientationMapStudy {
  double x_min_mm = -40.0, x_max_mm = 40.0;
  double z_min_mm = 0.0, z_max_mm = 30.0;
  double step_mm = 1.0;
  bool operator==(const OrientationMapStudy&) const = default;
};

struct ScanStudy {
  std::vector<std::string> sides{"stainless", "ferritic"};
  std::vector<double> frequencies_mhz{1.0, 2.0};
  double start_mm = 0.0, stop_mm = 40.0, step_mm = 1.0;
  double time_stop_us = 40.0;
  double time_step_us = 0.05;
  double floor_db = -60.0;
  double capture_radius_mm = 0.3;
  int fan_rays = 15;
  double fan_span_deg = 70.0;
  bool pgm = true;
  bool operator==(const ScanStudy&) const = default;

  std::vector<double> distances() const;
};

struct DefectSpec {
  double foot_x_mm = 0.0;
  double height_mm = 3.1;
  double tilt_deg = 0.0;
  std::vector<std::array<double, 2>> facets;
  bool operator==(const DefectSpec&) const = default;
};

struct TiltStudy {
  std::vector<double> tilts_deg{0.0, 10.0};
  std::string side = "stainless";
  double frequency_mhz = 2.0;
  bool operator==(const TiltStudy&) const = default;
};

inline const std::vector<std::string> kStudies{"trace", "orientation-map", "bscan", "tilt-sweep",
                                               "validate"};

struct RunConfig {
  std::string study = "validate";
  std::string specimen;                         // relative to the config file
  std::map<std::string, std::string> materials;  // per-key overrides of the specimen's files
  ProbeConfig probe;
  TraceStudy trace;
  OrientationMapStudy orientation_map;
  ScanStudy scan;
  DefectSpec defect;
  TiltStudy tilt_sweep;
  double attenuation_exponent = 0.0;
  // No stage draws random numbers; runs are reproducible regardless, the
  // flag is kept so configs state the expectation explicitly.
  bool deterministic = true;
  std::string output_dir = "weldray_out";  // relative to the working directory

  bool operator==(const RunConfig&) const = default;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

// Missing fields take their defaults; unknown fields are errors.
RunConfig config_from_json(const Json& j);
Json config_to_json(const RunConfig& config);
RunConfig load_config(const std::filesystem::path& path);

struct RunOptions {
  std::filesystem::path base_dir;  // resolves the specimen and material paths
  std::filesystem::path output_dir;  // empty: config.output_dir
  int threads = 1;
};

struct OutputFile {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::size_t bytes = 0;
};

struct RunResult {
  bool passed = true;  // validate study: every check passed
  std::vector<OutputFile> files;  // excluding the manifest
  std::filesystem::path manifest;
};

// Executes the study, writes every output atomically and a manifest.json
// listing them. Outputs do not depend on the thread count.
RunResult run(const RunConfig& config, const RunOptions& options);

Defect make_defect(const DefectSpec& spec, double inner_z);

}  // namespace weldray
