#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lds/field.hpp"
#include "lds/montecarlo.hpp"
#include "lds/ratefn.hpp"

namespace lds {

std::string tool_version();

// shortest round-trip decimal representation
std::string format_double(double v);

nlohmann::json law_to_json(const FieldLaw& law);
FieldLaw law_from_json(const nlohmann::json& j);

nlohmann::json settings_to_json(const RateSettings& s);
RateSettings settings_from_json(const nlohmann::json& j, int dim);

// CSV with a '#' comment preamble carrying the tool version and the
// effective config; the body is plain RFC-4180-style rows, '.' decimals,
// UTF-8, '\n' records.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const nlohmann::json& config,
            const std::vector<std::string>& header);
  void row(const std::vector<std::string>& fields);
  void close();

 private:
  std::ofstream out_;
};

void write_text_file(const std::filesystem::path& path, const std::string& content);

void write_curve_csv(const std::filesystem::path& path, const RateCurve& curve,
                     const nlohmann::json& config);

// Flat little-endian doubles plus a JSON sidecar header.
void write_scenery(const std::filesystem::path& base, const Scenery& scenery);
Scenery read_scenery(const std::filesystem::path& base);

void write_density_csv(const std::filesystem::path& path, const Density& rho,
                       const nlohmann::json& config);

// Grid fields (profiles and densities) in the same flat-binary-plus-header
// format as sceneries.
void write_grid_field(const std::filesystem::path& base, const Grid& grid,
                      const std::vector<double>& values, const std::string& kind);
std::pair<Grid, std::vector<double>> read_grid_field(
    const std::filesystem::path& base, std::string* kind = nullptr);

}  // namespace lds
