#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "jpmr/shot.hpp"

namespace jpmr {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every accepted key with its default. Top level: device, experiment, seed,
/// shots, out, timestamp, axes, errors.*, params.*.
nlohmann::json default_run_config();

/// Recursively copies `user` onto `doc`; a key absent from `doc` is an error
/// naming its dotted path.
void merge_config(nlohmann::json& doc, const nlohmann::json& user, const std::string& prefix = "");
/// Applies one `dotted.path=value` assignment. The value is parsed as JSON
/// when possible and kept as a string otherwise; it must keep the type of
/// the default (integers may replace floats).
void apply_override(nlohmann::json& doc, const std::string& assignment);
nlohmann::json load_run_config_file(const std::string& path);

ErrorModel error_model_from_config(const nlohmann::json& errors);
nlohmann::json error_model_to_json(const ErrorModel& em);

/// Hash over the configuration with the output location and timestamp removed
/// and the device file replaced by its parsed contents.
std::string config_hash(const nlohmann::json& doc);

struct FigurePreset {
  std::string figure;
  std::string experiment;
  nlohmann::json overrides;  // merged onto the run config
  std::string description;
};
const std::vector<FigurePreset>& figure_presets();
const FigurePreset& find_preset(const std::string& figure);

}  // namespace jpmr
