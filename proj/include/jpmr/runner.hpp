#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "jpmr/experiments.hpp"

namespace jpmr {

struct Artifacts {
  std::vector<std::string> csv_files;
  std::string summary_file;
  nlohmann::json summary;
};

std::vector<std::string> experiment_names();

/// Device, operating point, error model and mapping described by a run config.
Setup setup_from_config(const nlohmann::json& config);

/// Runs config["experiment"] and writes its CSVs and JSON summary to
/// config["out"]. Throws ConfigError for an unknown experiment.
Artifacts run_experiment(const nlohmann::json& config);

/// Applies the figure preset on top of `config`, then runs it.
Artifacts reproduce_figure(const std::string& figure, nlohmann::json config);

}  // namespace jpmr
