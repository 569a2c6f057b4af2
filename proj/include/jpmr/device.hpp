#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace jpmr {

/// Circuit constants of one qubit/resonator/JPM cell. All frequencies are
/// angular (rad/s); rates are in 1/s.
struct DeviceParams {
  std::string name = "chip1";

  double omega_r_bare = 0.0;  // readout resonator, bare
  double omega_q_max = 0.0;   // qubit upper sweet spot
  double omega_q_op = 0.0;    // qubit operating point
  double eta = 0.0;           // anharmonicity, negative
  double g_qr = 0.0;
  double g_jr = 0.0;
  double kappa_r = 0.0;
  double T1_q = 0.0;
  double T1_j = 0.0;
  double L_j = 0.0;
  double C_j = 0.0;
  double I0_j = 0.0;
  double C_jr = 0.0;
  std::optional<double> g_qq;

  // Carried for completeness; nothing in the dynamics reads these.
  double M_j = 0.0;
  double M_q = 0.0;
  double I0_q = 0.0;
  double C_xy = 0.0;

  /// Measured dispersive splitting 2|chi|; overrides the formula value when set.
  std::optional<double> measured_two_chi;
  /// Resonator self-Kerr per photon (rad/s).
  double kerr = 0.0;
};

struct DerivedQuantities {
  double chi = 0.0;            // formula value, negative for delta < 0
  double two_chi = 0.0;        // 2|chi|, positive
  double chi_effective = 0.0;  // measured_two_chi/2 when given, else |chi|
  double delta_qr = 0.0;       // omega_q_op - omega_r_bare
  double n_crit = 0.0;
  double purcell_T1 = 0.0;
  double beta_L = 0.0;
  bool double_well = false;
  double swap_half_period = 0.0;
  double pi_over_chi = 0.0;  // uses chi_effective
  double omega_r0 = 0.0;     // dressed resonance, qubit in |0>
  double omega_r1 = 0.0;     // dressed resonance, qubit in |1>
};

class DeviceError : public std::runtime_error {
 public:
  explicit DeviceError(std::vector<std::string> diagnostics);
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

class DispersiveError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Parameters of chip #1 with the operating point at 5.037 GHz.
DeviceParams table_iv_device();

/// Field-level invariant violations; empty when the parameters are usable.
std::vector<std::string> check_device(const DeviceParams& p);
void validate_device(const DeviceParams& p);

double derive_chi(double g, double delta, double eta);
double derive_chi(const DeviceParams& p);
double effective_two_chi(const DeviceParams& p);
double purcell_limit(const DeviceParams& p);
double n_crit(const DeviceParams& p);

struct BetaL {
  double value = 0.0;
  bool double_well = false;
};
BetaL beta_L(const DeviceParams& p);

double swap_half_period(const DeviceParams& p);
double dressed_resonator(const DeviceParams& p, int qubit_level);

DerivedQuantities derive_quantities(const DeviceParams& p);

nlohmann::json device_to_json(const DeviceParams& p);
/// Throws DeviceError naming every offending field.
DeviceParams device_from_json(const nlohmann::json& j);
DeviceParams load_device_file(const std::string& path);

}  // namespace jpmr
