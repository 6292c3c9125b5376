#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "covkit/kernel.hpp"
#include "covkit/simulation.hpp"

namespace covkit {

extern const char* const version;

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Numeric CSV with a header row. Errors name the line and column.
CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(std::string_view text, const std::string& source = "<input>");

/// Locations from a CSV whose header is x1..xd followed by t1..tk.
PointSet points_from_csv(const CsvTable& table);
PointSet read_points(const std::filesystem::path& path);

/// Writes to a temporary sibling and renames it over the target.
void atomic_write(const std::filesystem::path& path, std::string_view content);

/// Rows "i,j,C_11,...,C_mm" over all ordered pairs of points.
std::string eval_csv(const KernelSpec& spec, const PointSet& pts);

/// Rows "realization,location,variable,value".
std::string samples_csv(const std::vector<Realization>& reals);

/// Inverse of samples_csv for a known location set.
std::vector<Realization> realizations_from_csv(const CsvTable& table, const std::vector<Point>& points);

/// Rows "h1..hD,count,g_11..g_mm,se_11..se_mm"; empty bins are written as nan.
std::string estimate_csv(const EmpiricalPcv& est);

struct RunManifest {
  std::string command;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string started;
  std::string finished;
  nlohmann::json arguments = nlohmann::json::object();

  nlohmann::json to_json() const;
};

std::string utc_timestamp();
/// Writes <output>.manifest.json next to the output file.
void write_manifest(const std::filesystem::path& output, const RunManifest& manifest);

}  // namespace covkit
