#include "jpmr/run_config.hpp"

#include <fstream>
#include <sstream>

#include "jpmr/device.hpp"
#include "jpmr/io.hpp"

namespace jpmr {

nlohmann::json default_run_config() {
  const ErrorModel em;
  return nlohmann::json{
      {"device", ""},
      {"experiment", "rabi"},
      {"seed", 1},
      {"shots", 5000},
      {"out", ""},
      {"timestamp", ""},
      {"axes", "freq,time"},
      {"errors", error_model_to_json(em)},
      {"params",
       {
           {"angle_points", 41},
           {"determinations", 1000},
           {"bins", 40},
           {"threads", 0},
           {"freq_lo_mhz", -5.0},   // relative to omega_r1
           {"freq_hi_mhz", 12.4},
           {"freq_points", 36},
           {"amp_lo", 0.0},         // arb
           {"amp_hi", 1.2},
           {"amp_points", 25},
           {"time_lo_ns", 10.0},
           {"time_hi_ns", 160.0},
           {"time_points", 31},
           {"scan_amp", 0.8},       // arb, frequency scans
           {"excess_amps", {0.25, 0.275, 0.3, 0.325, 0.35, 0.375, 0.4}},
           {"replications", 1},
           {"mitigation", "ladder"},
           {"swap_mapping", false},
           {"both_mappings", true},
           {"echo_points", 41},
           {"echo_time_us", 4.0},
           {"optimize", false},
           {"refine_levels", 0},
           {"photodetect_max_ns", 20},
           {"scurve_points", 401},
       }},
  };
}

nlohmann::json error_model_to_json(const ErrorModel& em) {
  return {
      {"excess_one_population", em.excess_one_population},
      {"gate_error", em.gate_error},
      {"qubit_relaxation", em.qubit_relaxation},
      {"T1_q", em.T1_q},
      {"ideal_detector", em.ideal_detector},
      {"rep_rate_recovery_tau", em.rep_rate_recovery_tau},
      {"rep_detector_deficit", em.rep_detector_deficit},
      {"rep_qubit_deficit", em.rep_qubit_deficit},
      {"rep_qubit_tau", em.rep_qubit_tau},
      {"crosstalk_dephasing_factor", em.crosstalk_dephasing_factor},
      {"backaction_photons", em.backaction_photons},
  };
}

ErrorModel error_model_from_config(const nlohmann::json& e) {
  ErrorModel em;
  em.excess_one_population = e.at("excess_one_population").get<double>();
  em.gate_error = e.at("gate_error").get<double>();
  em.qubit_relaxation = e.at("qubit_relaxation").get<bool>();
  em.T1_q = e.at("T1_q").get<double>();
  em.ideal_detector = e.at("ideal_detector").get<bool>();
  em.rep_rate_recovery_tau = e.at("rep_rate_recovery_tau").get<double>();
  em.rep_detector_deficit = e.at("rep_detector_deficit").get<double>();
  em.rep_qubit_deficit = e.at("rep_qubit_deficit").get<double>();
  em.rep_qubit_tau = e.at("rep_qubit_tau").get<double>();
  em.crosstalk_dephasing_factor = e.at("crosstalk_dephasing_factor").get<double>();
  em.backaction_photons = e.at("backaction_photons").get<double>();
  for (double v : {em.excess_one_population, em.gate_error, em.rep_detector_deficit,
                   em.rep_qubit_deficit}) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("error-model probability outside [0, 1]");
  }
  if (!(em.T1_q > 0.0)) throw ConfigError("errors.T1_q must be positive");
  return em;
}

namespace {

bool compatible(const nlohmann::json& def, const nlohmann::json& v) {
  if (def.is_number_float()) return v.is_number();
  if (def.is_number_integer()) return v.is_number_integer();
  if (def.is_boolean()) return v.is_boolean();
  if (def.is_string()) return v.is_string();
  if (def.is_array()) return v.is_array();
  if (def.is_object()) return v.is_object();
  return true;
}

}  // namespace

void merge_config(nlohmann::json& doc, const nlohmann::json& user, const std::string& prefix) {
  if (!user.is_object()) throw ConfigError("configuration must be an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!doc.contains(it.key())) throw ConfigError("unknown config key '" + key + "'");
    auto& slot = doc[it.key()];
    if (slot.is_object()) {
      merge_config(slot, it.value(), key);
    } else {
      if (!compatible(slot, it.value())) {
        throw ConfigError("config key '" + key + "' has the wrong type");
      }
      slot = it.value();
    }
  }
}

void apply_override(nlohmann::json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  nlohmann::json value = nlohmann::json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  nlohmann::json* node = &doc;
  std::size_t pos = 0;
  while (true) {
    const auto dot = path.find('.', pos);
    const std::string part = path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (!node->is_object() || !node->contains(part)) {
      throw ConfigError("unknown config key '" + path + "'");
    }
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    pos = dot + 1;
  }
  if (node->is_string() && !value.is_string()) value = text;
  if (!compatible(*node, value)) throw ConfigError("config key '" + path + "' has the wrong type");
  *node = value;
}

nlohmann::json load_run_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return nlohmann::json::parse(ss.str(), nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
}

std::string config_hash(const nlohmann::json& doc) {
  nlohmann::json c = doc;
  c.erase("out");
  c.erase("timestamp");
  const std::string dev = doc.value("device", "");
  c["device"] = device_to_json(dev.empty() ? table_iv_device() : load_device_file(dev));
  return fnv1a64_hex(c.dump());
}

const std::vector<FigurePreset>& figure_presets() {
  static const std::vector<FigurePreset> presets = {
      {"4b", "pointer", nlohmann::json::object(), "bright and dark pointer trajectories"},
      {"4c", "photodetect", nlohmann::json::object(), "energy transfer vs photodetection time"},
      {"4d", "scurve", nlohmann::json::object(), "tunneling S-curves for both pointers"},
      {"5", "scan2d", {{"axes", "freq,time"}, {"shots", 500}},
       "frequency-time and amplitude-time scans"},
      {"6a", "rabi", {{"shots", 5000}}, "Rabi sweep and fidelity"},
      {"6b", "stability", {{"shots", 5000}, {"params", {{"determinations", 1000}}}},
       "histogram of repeated fidelity determinations"},
      {"7c", "backaction", {{"shots", 4000}}, "Rabi visibility after a forced tunneling event"},
      {"8", "crosstalk", {{"shots", 5000}}, "spin echo with and without resonator reset"},
      {"9", "repetition", {{"shots", 20000}}, "fidelity vs time between experiments"},
      {"10", "stark", nlohmann::json::object(), "Stark-inferred photon number vs drive time"},
      {"11", "excess", {{"shots", 100000}}, "tunneling vs drive amplitude at low power"},
      {"12", "reset", nlohmann::json::object(), "passive and active reset curves"},
  };
  return presets;
}

const FigurePreset& find_preset(const std::string& figure) {
  for (const auto& p : figure_presets()) {
    if (p.figure == figure) return p;
  }
  throw ConfigError("unknown figure id '" + figure + "'");
}

}  // namespace jpmr
