#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace jpmr {

struct ScanProvenance {
  std::string name;
  std::string csv_path;
  nlohmann::json argmax;
};

/// Operating point handed to the sequencer. Fields stay empty until a
/// calibration step fills them.
struct CalibrationRecord {
  std::optional<double> omega_d;           // rad/s
  std::optional<double> t_d;               // s
  std::optional<double> epsilon;           // rad/s
  std::optional<double> arb_scale;         // rad/s per arb. unit
  std::optional<double> detect_flux;       // flux quanta, JPM on resonance
  std::optional<double> tunnel_amplitude;  // flux quanta added to detect_flux
  std::optional<double> tunnel_duration;   // s
  std::optional<double> photodetect_time;  // s
  std::optional<double> relax_time;        // s
  std::optional<double> readout_time;      // s
  std::optional<double> readout_snr;       // at 250 ns
  std::vector<ScanProvenance> provenance;

  std::vector<std::string> missing_fields() const;
  bool complete() const { return missing_fields().empty(); }
};

nlohmann::json calibration_to_json(const CalibrationRecord& r);
CalibrationRecord calibration_from_json(const nlohmann::json& j);

}  // namespace jpmr
