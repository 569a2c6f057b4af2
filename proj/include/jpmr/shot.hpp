#pragma once

#include <complex>
#include <limits>
#include <vector>

#include "jpmr/cavity.hpp"
#include "jpmr/device.hpp"
#include "jpmr/jpm.hpp"
#include "jpmr/rng.hpp"
#include "jpmr/sequencer.hpp"

namespace jpmr {

/// Scalar error channels applied by run_shot.
struct ErrorModel {
  double excess_one_population = 0.003;
  double gate_error = 0.001;
  bool qubit_relaxation = true;
  double T1_q = 16.9e-6;
  /// Deterministic amplitude discriminator in place of the photon-counting
  /// chain (no dark counts, photon statistics, retrapping or IQ errors).
  bool ideal_detector = false;

  // Repetition-rate model; inactive while rep_interval is infinite.
  double rep_interval = std::numeric_limits<double>::infinity();
  double rep_rate_recovery_tau = 13e-6;
  double rep_detector_deficit = 0.25;
  double rep_qubit_deficit = 0.03;
  double rep_qubit_tau = 1e-6;

  double crosstalk_dephasing_factor = 2.6;
  double backaction_photons = 100.0;

  /// Every channel off and the ideal detector selected.
  static ErrorModel noiseless();
  /// Only the photon-counting detector left as an error source.
  static ErrorModel detector_only();
};

struct ShotRecord {
  int outcome = 0;  // measured qubit state after outcome mapping
  int prepared_level = 0;  // qubit level after init and gate, before decay
  bool init_error = false;
  bool gate_error = false;
  bool decayed = false;
  double decay_fraction = 0.0;  // of t_d spent excited before decay
  double n_bar = 0.0;           // cavity photons at photodetection
  int quanta = 0;               // absorbed JPM quanta
  bool tunneled = false;
  bool retrapped = false;
  bool iq_error = false;
};

struct ShotOptions {
  double retrap_base = 0.05;
  IqConfig iq;
  /// Bright pointer on |0>: the two pointers trade places and tunneling
  /// reports qubit |0>.
  bool swap_mapping = false;
  int t1_quadrature = 64;
};

/// Executes the measurement chain of one schedule. The cavity pointers and
/// escape table are computed once on construction; shots only draw.
class ShotSimulator {
 public:
  ShotSimulator(const DeviceParams& p, const PulseSchedule& schedule,
                const ShotOptions& opt = {});

  ShotRecord run_shot(const ErrorModel& em, Rng& rng) const;
  /// `background` is a stray cavity field added to the pointer at
  /// photodetection.
  ShotRecord run_shot(double angle, const ErrorModel& em, Rng& rng,
                      std::complex<double> background = 0.0) const;

  /// Copy with new pointer amplitudes (given per qubit state before any
  /// mapping swap) and drive duration; the JPM chain is reused.
  ShotSimulator with_pointers(std::complex<double> alpha_g, std::complex<double> alpha_e,
                              double t_d) const;

  /// Exact probability of outcome 1 for the same model run_shot samples.
  double expected_p1(double angle, const ErrorModel& em,
                     std::complex<double> background = 0.0) const;
  /// Probability of outcome 1 given the photon number at photodetection.
  double outcome1_given_photons(double n_bar, const ErrorModel& em) const;

  double gate_angle() const { return gate_angle_; }
  double t_d() const { return t_d_; }
  std::complex<double> alpha(QubitState s) const { return s == QubitState::g ? alpha_g_ : alpha_e_; }
  double n_bar(QubitState s) const { return std::norm(alpha(s)); }
  double transfer() const { return transfer_; }
  double dark_count() const { return escape_.empty() ? 0.0 : escape_.front(); }
  const std::vector<double>& escape_table() const { return escape_; }
  double retrap() const { return retrap_; }
  double iq_error() const { return iq_error_; }
  double ideal_threshold() const { return threshold_; }
  const JpmPotential& detect_landscape() const { return detect_; }
  const JpmPotential& pulse_landscape() const { return pulse_; }
  const ShotOptions& options() const { return opt_; }

 private:
  double tunneled_given_quanta(int k) const;
  double outcome1_given_alpha(std::complex<double> a, const ErrorModel& em) const;
  int map_outcome(bool right) const;
  void set_pointers(std::complex<double> alpha_g, std::complex<double> alpha_e);

  DeviceParams p_;
  ShotOptions opt_;
  double gate_angle_ = 0.0;
  double t_d_ = 0.0;
  double readout_time_ = 0.0;
  std::complex<double> alpha_g_ = 0.0;
  std::complex<double> alpha_e_ = 0.0;
  double transfer_ = 0.0;
  std::vector<double> escape_;
  double retrap_ = 0.0;
  double iq_error_ = 0.0;
  double threshold_ = 0.0;
  JpmPotential detect_;
  JpmPotential pulse_;
};

/// Raw tunneling probability for Poisson-distributed absorbed quanta.
double poisson_tunnel_probability(const std::vector<double>& escape_table, double mean_quanta);
/// Escape probabilities for k = 0, 1, ... absorbed quanta, until certain escape.
std::vector<double> escape_table(const JpmPotential& pulse, double duration);

}  // namespace jpmr
