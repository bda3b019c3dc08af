#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "weldray/inspection.hpp"

namespace weldray {

using Json = nlohmann::json;

// Parse a JSON document; ConfigError carries the line and column.
Json read_json(const std::filesystem::path& path);

ElasticMaterial material_from_json(const Json& j, const std::string& where);
ElasticMaterial load_material(const std::filesystem::path& path);
Json material_to_json(const ElasticMaterial& m);

// Material references in the specimen file are resolved against the
// specimen file's directory unless overridden by key.
Specimen load_specimen(const std::filesystem::path& path,
                       const std::map<std::string, std::filesystem::path>& material_overrides = {});

std::string sha256_hex(const std::string& bytes);

// Write via a sibling temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

// Fixed-point formatting shared by every text output.
std::string fmt_num(double v);

std::string rays_csv(const std::vector<Ray>& rays);
std::string events_csv(const std::vector<Ray>& rays);

std::string bscan_csv(const BScan& scan);
std::string bscan_annotations_json(const BScan& scan);
// Binary greyscale, dB mapped linearly from the floor (0) to the grid maximum (255).
std::string bscan_pgm(const BScan& scan);

struct OrientationLattice {
  double x_min = -20.0, x_max = 20.0;
  double z_min = 0.0, z_max = 30.0;
  double step_mm = 1.0;
};

struct OrientationMap {
  std::vector<double> xs, zs;
  std::vector<double> theta_deg;  // x fastest, NaN outside every region
  double at(std::size_t ix, std::size_t iz) const { return theta_deg[iz * xs.size() + ix]; }
};

OrientationMap sample_orientation_map(const Specimen& specimen, const OrientationLattice& lattice);
std::string orientation_map_csv(const OrientationMap& map);
// [-90, 90] degrees to [0, 255]; the top row is the outer surface.
std::string orientation_map_pgm(const OrientationMap& map);

}  // namespace weldray
