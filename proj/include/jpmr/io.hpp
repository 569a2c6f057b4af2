#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace jpmr {

/// Column-oriented table; cells are written with 10 significant digits.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row) { rows.push_back(std::move(row)); }
};

struct CsvMeta {
  std::string experiment;
  std::string config_hash;
  std::uint64_t seed = 0;
};

std::string format_csv(const CsvTable& t);
void write_text_file(const std::string& path, const std::string& text);
void write_csv(const std::string& path, const CsvMeta& meta, const CsvTable& t);
/// Prepends the metadata line to an already formatted CSV body.
void write_csv_body(const std::string& path, const CsvMeta& meta, const std::string& body);
void write_json(const std::string& path, const nlohmann::json& j);

/// 64-bit FNV-1a, lowercase hex.
std::string fnv1a64_hex(const std::string& bytes);

/// UTC time as YYYYMMDDTHHMMSSZ.
std::string utc_timestamp();
/// <dir>/<experiment>_<timestamp>_<seed><ext>
std::string artifact_path(const std::string& dir, const std::string& experiment,
                          const std::string& timestamp, std::uint64_t seed,
                          const std::string& ext);

}  // namespace jpmr
