#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jpmr/experiments.hpp"

namespace jpmr {

// ---------------------------------------------------------------- backaction

enum Mitigation : unsigned {
  kNoMitigation = 0,
  kResonatorReset = 1u << 0,
  kHideBias = 1u << 1,
  kQubitReset = 1u << 2,
  kFullMitigation = kResonatorReset | kHideBias | kQubitReset,
};
std::string mitigation_name(unsigned m);
/// Parses "none", "full" or a '+'-joined list such as "resonator_reset+hide_bias".
unsigned parse_mitigation(const std::string& s);

/// What a forced tunneling event leaves behind before the Rabi experiment.
struct BackactionModel {
  /// Mean stray resonator photons; thermal-like (exponential) number, random phase.
  double background_photons = 0.0;
  double resonator_reset_time = 100e-9;
  /// Qubit |1> population after the transient with the qubit left in place.
  double qubit_excitation = 0.0;
  /// Same with the qubit detuned by the hide bias during the transient.
  double qubit_excitation_hidden = 0.0;
  /// Excess |1> population that active qubit reset leaves on top of the baseline.
  double qubit_reset_residual = 0.0;
};

struct BackactionTargets {
  double mean_tunneling_none = 0.80;
  double visibility_reset_only = 0.30;
  double visibility_hidden = 0.75;
  double fidelity_deficit_full = 0.002;
};

/// Solves the model parameters so that the exact expectations hit the targets.
BackactionModel calibrate_backaction(const Setup& s, const BackactionTargets& t = {});

struct BackactionResult {
  unsigned mitigation = 0;
  bool forced_tunnel = true;
  std::vector<double> angles;
  std::vector<double> p_tunnel;  // sampled outcome-1 probability per angle
  double visibility = 0.0;       // P(pi) - P(0)
  double mean_tunneling = 0.0;
  double F = 0.0;                // same as visibility, reported with the fidelity sign
  double excess_population = 0.0;
  double background_photons = 0.0;
};

/// Rabi sweep preceded by a forced tunneling event under the given mitigation.
BackactionResult backaction_experiment(const Setup& s, unsigned mitigation,
                                       const BackactionModel& m, int n_shots, std::uint64_t seed,
                                       bool forced_tunnel = true, int angle_points = 21);
/// Exact counterpart of backaction_experiment at angles 0 and pi.
BackactionResult backaction_expectation(const Setup& s, unsigned mitigation,
                                        const BackactionModel& m, bool forced_tunnel = true);

// ---------------------------------------------------------------- crosstalk

struct CrosstalkModel {
  double echo_time = 4e-6;  // Gaussian echo decay time with the neighbour idle
  /// Photons left in the neighbour resonator by the tunneling event.
  double residual_photons = 0.0;
  /// Photon number that doubles the Gaussian decay rate.
  double photon_scale = 1.0;
  double reset_time = 100e-9;
};
/// Sets photon_scale so that residual_photons reduce the decay time by `factor`.
CrosstalkModel calibrate_crosstalk(double residual_photons, double factor = 2.6,
                                   double echo_time = 4e-6);

struct CrosstalkResult {
  bool with_reset = false;
  std::vector<double> times;
  std::vector<double> echo_quiet;      // sampled P(return to |0>)
  std::vector<double> echo_disturbed;
  double fit_time_quiet = 0.0;
  double fit_time_disturbed = 0.0;
  double ratio = 0.0;
  double photons_at_echo = 0.0;  // neighbour photons after the optional reset
};
CrosstalkResult crosstalk_spin_echo(const DeviceParams& p, bool with_reset,
                                    const CrosstalkModel& m, int n_shots, std::uint64_t seed,
                                    int points = 41);

// ---------------------------------------------------------------- repetition rate

struct RepetitionPoint {
  double interval = 0.0;  // s between experiments
  double p1_given_0 = 0.0;
  double p1_given_1 = 0.0;
  double F = 0.0;
};
struct RepetitionResult {
  bool swap_mapping = false;
  std::vector<RepetitionPoint> points;
  /// Fit of the bright-state success probability vs interval,
  /// y = offset - amplitude * exp(-interval / tau).
  SeparableFit bright_fit;
  /// Deficits at the shortest interval relative to the longest.
  double bright_deficit = 0.0;
  double dark_deficit = 0.0;
};
/// shots = 0 uses exact expectations.
RepetitionResult repetition_rate_sweep(const Setup& s, const std::vector<double>& intervals,
                                       int n_shots, std::uint64_t seed);
std::vector<double> default_repetition_intervals();

}  // namespace jpmr
