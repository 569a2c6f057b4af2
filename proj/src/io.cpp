#include "jpmr/io.hpp"

#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace jpmr {

std::string format_csv(const CsvTable& t) {
  std::ostringstream os;
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  char buf[32];
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.10g", row[i]);
      os << (i ? "," : "") << buf;
    }
    os << '\n';
  }
  return os.str();
}

namespace {

std::string meta_line(const CsvMeta& meta) {
  return "# experiment=" + meta.experiment + " config_hash=" + meta.config_hash +
         " seed=" + std::to_string(meta.seed) + "\n";
}

}  // namespace

void write_text_file(const std::string& path, const std::string& text) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << text;
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

void write_csv(const std::string& path, const CsvMeta& meta, const CsvTable& t) {
  write_text_file(path, meta_line(meta) + format_csv(t));
}

void write_csv_body(const std::string& path, const CsvMeta& meta, const std::string& body) {
  write_text_file(path, meta_line(meta) + body);
}

void write_json(const std::string& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

std::string artifact_path(const std::string& dir, const std::string& experiment,
                          const std::string& timestamp, std::uint64_t seed,
                          const std::string& ext) {
  return (std::filesystem::path(dir) /
          (experiment + "_" + timestamp + "_" + std::to_string(seed) + ext))
      .string();
}

}  // namespace jpmr
