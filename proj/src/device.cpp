#include "jpmr/device.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "jpmr/units.hpp"

namespace jpmr {

namespace {

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out = "invalid device parameters";
  for (const auto& l : lines) out += "\n  " + l;
  return out;
}

enum class Kind { frequency, rate, time, inductance, capacitance, current };
enum class Sign { positive, negative, any };

struct FieldSpec {
  const char* key;
  Kind kind;
  Sign sign;
  double DeviceParams::*member;  // null for optional fields
  bool required;
};

const std::vector<FieldSpec>& field_table() {
  static const std::vector<FieldSpec> table = {
      {"omega_r_bare", Kind::frequency, Sign::positive, &DeviceParams::omega_r_bare, true},
      {"omega_q_max", Kind::frequency, Sign::positive, &DeviceParams::omega_q_max, true},
      {"omega_q_op", Kind::frequency, Sign::positive, &DeviceParams::omega_q_op, true},
      {"eta", Kind::frequency, Sign::negative, &DeviceParams::eta, true},
      {"g_qr", Kind::frequency, Sign::positive, &DeviceParams::g_qr, true},
      {"g_jr", Kind::frequency, Sign::positive, &DeviceParams::g_jr, true},
      {"kappa_r", Kind::rate, Sign::positive, &DeviceParams::kappa_r, true},
      {"T1_q", Kind::time, Sign::positive, &DeviceParams::T1_q, true},
      {"T1_j", Kind::time, Sign::positive, &DeviceParams::T1_j, true},
      {"L_j", Kind::inductance, Sign::positive, &DeviceParams::L_j, true},
      {"C_j", Kind::capacitance, Sign::positive, &DeviceParams::C_j, true},
      {"I0_j", Kind::current, Sign::positive, &DeviceParams::I0_j, true},
      {"C_jr", Kind::capacitance, Sign::positive, &DeviceParams::C_jr, true},
      {"M_j", Kind::inductance, Sign::positive, &DeviceParams::M_j, true},
      {"M_q", Kind::inductance, Sign::positive, &DeviceParams::M_q, true},
      {"I0_q", Kind::current, Sign::positive, &DeviceParams::I0_q, true},
      {"C_xy", Kind::capacitance, Sign::positive, &DeviceParams::C_xy, true},
      {"kerr", Kind::frequency, Sign::any, &DeviceParams::kerr, false},
      {"g_qq", Kind::frequency, Sign::positive, nullptr, false},
      {"measured_two_chi", Kind::frequency, Sign::positive, nullptr, false},
  };
  return table;
}

const std::map<std::string, double>& unit_table(Kind kind) {
  static const std::map<std::string, double> freq = {
      {"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}};
  static const std::map<std::string, double> rate = {
      {"1/s", 1.0}, {"1/ms", 1e3}, {"1/us", 1e6}, {"1/ns", 1e9}};
  static const std::map<std::string, double> time = {
      {"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}, {"ps", 1e-12}};
  static const std::map<std::string, double> ind = {
      {"H", 1.0}, {"uH", 1e-6}, {"nH", 1e-9}, {"pH", 1e-12}};
  static const std::map<std::string, double> cap = {
      {"F", 1.0}, {"nF", 1e-9}, {"pF", 1e-12}, {"fF", 1e-15}, {"aF", 1e-18}};
  static const std::map<std::string, double> cur = {
      {"A", 1.0}, {"mA", 1e-3}, {"uA", 1e-6}, {"nA", 1e-9}};
  switch (kind) {
    case Kind::frequency: return freq;
    case Kind::rate: return rate;
    case Kind::time: return time;
    case Kind::inductance: return ind;
    case Kind::capacitance: return cap;
    case Kind::current: return cur;
  }
  return freq;
}

// Converts one config entry to SI (angular for frequencies). Appends a
// diagnostic and returns nullopt on any problem.
std::optional<double> parse_field(const FieldSpec& f, const nlohmann::json& v,
                                  std::vector<std::string>& diag) {
  const std::string where = std::string("field '") + f.key + "': ";
  double value = 0.0;
  if (v.is_number()) {
    value = v.get<double>();
  } else if (v.is_object()) {
    for (auto it = v.begin(); it != v.end(); ++it) {
      const auto& k = it.key();
      if (k != "value" && k != "unit" && k != "lifetime" && k != "note") {
        diag.push_back(where + "unknown attribute '" + k + "'");
        return std::nullopt;
      }
    }
    std::string unit;
    if (v.contains("unit")) {
      if (!v["unit"].is_string()) {
        diag.push_back(where + "unit must be a string");
        return std::nullopt;
      }
      unit = v["unit"].get<std::string>();
    }
    if (v.contains("lifetime")) {
      if (f.kind != Kind::rate) {
        diag.push_back(where + "'lifetime' is only accepted for rates");
        return std::nullopt;
      }
      if (!v["lifetime"].is_number()) {
        diag.push_back(where + "lifetime must be a number");
        return std::nullopt;
      }
      const auto& tu = unit_table(Kind::time);
      double scale = 1.0;
      if (!unit.empty()) {
        auto it = tu.find(unit);
        if (it == tu.end()) {
          diag.push_back(where + "unknown time unit '" + unit + "'");
          return std::nullopt;
        }
        scale = it->second;
      }
      const double t = v["lifetime"].get<double>() * scale;
      if (!(t > 0.0)) {
        diag.push_back(where + "lifetime must be positive");
        return std::nullopt;
      }
      return 1.0 / t;
    }
    if (!v.contains("value") || !v["value"].is_number()) {
      diag.push_back(where + "missing numeric 'value'");
      return std::nullopt;
    }
    value = v["value"].get<double>();
    if (!unit.empty()) {
      const auto& table = unit_table(f.kind);
      auto it = table.find(unit);
      if (it == table.end()) {
        diag.push_back(where + "unknown unit '" + unit + "'");
        return std::nullopt;
      }
      value *= it->second;
    }
  } else {
    diag.push_back(where + "expected a number or {value, unit}");
    return std::nullopt;
  }
  if (!std::isfinite(value)) {
    diag.push_back(where + "not finite");
    return std::nullopt;
  }
  if (f.kind == Kind::frequency) value = angular(value);
  return value;
}

}  // namespace

DeviceError::DeviceError(std::vector<std::string> diagnostics)
    : std::runtime_error(join_lines(diagnostics)), diagnostics_(std::move(diagnostics)) {}

DeviceParams table_iv_device() {
  DeviceParams p;
  p.name = "chip1";
  p.omega_r_bare = angular(5.693e9);
  p.omega_q_max = angular(5.95e9);
  p.omega_q_op = angular(5.037e9);
  p.eta = angular(-225e6);
  p.g_qr = angular(90e6);
  p.g_jr = angular(62e6);
  p.kappa_r = 1.0 / 1.53e-6;
  p.T1_q = 16.9e-6;
  p.T1_j = 5e-9;
  p.L_j = 1.3e-9;
  p.C_j = 2.2e-12;
  p.I0_j = 1.4e-6;
  p.C_jr = 33e-15;
  p.g_qq = angular(16e6);
  p.M_j = 4.8e-12;
  p.M_q = 1.4e-12;
  p.I0_q = 43e-9;
  p.C_xy = 40e-18;
  p.measured_two_chi = angular(7.4e6);
  p.kerr = angular(-50e3);
  return p;
}

std::vector<std::string> check_device(const DeviceParams& p) {
  std::vector<std::string> diag;
  for (const auto& f : field_table()) {
    if (!f.member) continue;
    const double v = p.*(f.member);
    const std::string where = std::string("field '") + f.key + "': ";
    if (!std::isfinite(v)) {
      diag.push_back(where + "not finite");
    } else if (f.sign == Sign::positive && !(v > 0.0)) {
      diag.push_back(where + "must be strictly positive");
    } else if (f.sign == Sign::negative && !(v < 0.0)) {
      diag.push_back(where + "must be strictly negative");
    }
  }
  if (p.g_qq && !(*p.g_qq > 0.0)) diag.push_back("field 'g_qq': must be strictly positive");
  if (p.measured_two_chi && !(*p.measured_two_chi > 0.0))
    diag.push_back("field 'measured_two_chi': must be strictly positive");
  if (diag.empty() && !(std::abs(p.omega_q_op - p.omega_r_bare) > p.g_qr)) {
    diag.push_back(
        "field 'omega_q_op': |omega_q_op - omega_r_bare| must exceed g_qr (dispersive regime)");
  }
  return diag;
}

void validate_device(const DeviceParams& p) {
  auto diag = check_device(p);
  if (!diag.empty()) throw DeviceError(std::move(diag));
}

double derive_chi(double g, double delta, double eta) {
  const double tol = std::max(std::abs(g), 1e-9 * std::abs(eta));
  if (std::abs(delta) <= tol || std::abs(delta + eta) <= tol) {
    throw DispersiveError("straddling regime: delta*(delta+eta) is too close to zero");
  }
  return g * g * eta / (delta * (delta + eta));
}

double derive_chi(const DeviceParams& p) {
  if (!(std::abs(p.omega_q_op - p.omega_r_bare) > p.g_qr)) {
    throw DispersiveError("dispersive-regime guard violated");
  }
  return derive_chi(p.g_qr, p.omega_q_op - p.omega_r_bare, p.eta);
}

double effective_two_chi(const DeviceParams& p) {
  if (p.measured_two_chi) return *p.measured_two_chi;
  return 2.0 * std::abs(derive_chi(p));
}

double purcell_limit(const DeviceParams& p) {
  const double delta = p.omega_q_op - p.omega_r_bare;
  if (!(std::abs(delta) > p.g_qr)) throw DispersiveError("dispersive-regime guard violated");
  if (p.g_qr == 0.0) return std::numeric_limits<double>::infinity();
  return delta * delta / (p.g_qr * p.g_qr * p.kappa_r);
}

double n_crit(const DeviceParams& p) {
  const double r = (p.omega_q_op - p.omega_r_bare) / p.g_qr;
  return r * r / 4.0;
}

BetaL beta_L(const DeviceParams& p) {
  BetaL b;
  b.value = kTwoPi * p.L_j * p.I0_j / kPhi0;
  b.double_well = b.value > 1.0;
  return b;
}

double swap_half_period(const DeviceParams& p) { return kPi / (2.0 * p.g_jr); }

double dressed_resonator(const DeviceParams& p, int qubit_level) {
  const double delta = p.omega_q_op - p.omega_r_bare;
  const double omega0 = p.omega_r_bare - p.g_qr * p.g_qr / delta;
  if (qubit_level == 0) return omega0;
  return omega0 - effective_two_chi(p);
}

DerivedQuantities derive_quantities(const DeviceParams& p) {
  validate_device(p);
  DerivedQuantities d;
  d.delta_qr = p.omega_q_op - p.omega_r_bare;
  d.chi = derive_chi(p);
  d.two_chi = 2.0 * std::abs(d.chi);
  d.chi_effective = effective_two_chi(p) / 2.0;
  d.n_crit = n_crit(p);
  d.purcell_T1 = purcell_limit(p);
  const auto b = beta_L(p);
  d.beta_L = b.value;
  d.double_well = b.double_well;
  d.swap_half_period = swap_half_period(p);
  d.pi_over_chi = kPi / d.chi_effective;
  d.omega_r0 = dressed_resonator(p, 0);
  d.omega_r1 = dressed_resonator(p, 1);
  return d;
}

nlohmann::json device_to_json(const DeviceParams& p) {
  nlohmann::json j;
  j["name"] = p.name;
  for (const auto& f : field_table()) {
    double v = 0.0;
    if (f.member) {
      v = p.*(f.member);
    } else if (std::string(f.key) == "g_qq") {
      if (!p.g_qq) continue;
      v = *p.g_qq;
    } else {
      if (!p.measured_two_chi) continue;
      v = *p.measured_two_chi;
    }
    if (f.kind == Kind::frequency) v = linear(v);
    j[f.key] = v;
  }
  return j;
}

DeviceParams device_from_json(const nlohmann::json& j) {
  std::vector<std::string> diag;
  if (!j.is_object()) throw DeviceError({"device config must be an object"});
  DeviceParams p;
  p.kerr = angular(-50e3);
  std::map<std::string, const FieldSpec*> by_key;
  for (const auto& f : field_table()) by_key[f.key] = &f;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    if (k == "name") {
      if (it->is_string()) p.name = it->get<std::string>();
      else diag.push_back("field 'name': must be a string");
      continue;
    }
    if (k == "notes") continue;
    if (!by_key.count(k)) diag.push_back("field '" + k + "': unknown key");
  }
  for (const auto& f : field_table()) {
    if (!j.contains(f.key)) {
      if (f.required) diag.push_back(std::string("field '") + f.key + "': missing");
      continue;
    }
    auto v = parse_field(f, j[f.key], diag);
    if (!v) continue;
    if (f.member) {
      p.*(f.member) = *v;
    } else if (std::string(f.key) == "g_qq") {
      p.g_qq = *v;
    } else {
      p.measured_two_chi = *v;
    }
  }
  if (!diag.empty()) throw DeviceError(std::move(diag));
  validate_device(p);
  return p;
}

DeviceParams load_device_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DeviceError({"cannot open device file '" + path + "'"});
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw DeviceError({std::string("parse error in '") + path + "': " + e.what()});
  }
  return device_from_json(j);
}

}  // namespace jpmr
