#pragma once

#include <complex>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "jpmr/device.hpp"

namespace jpmr {

enum class QubitState { g, e };
enum class Envelope { rectangular, cosine_ramped };

const char* to_string(QubitState s);

struct DrivePulse {
  double omega_d = 0.0;
  double amplitude = 0.0;  // drive rate epsilon (rad/s)
  double t_d = 0.0;        // s
  Envelope envelope = Envelope::rectangular;
  double ramp = 0.0;  // s, cosine_ramped only
};

/// Cavity amplitude sampled on a uniform grid; alpha[0] is t = 0.
struct PointerTrajectory {
  double dt = 1e-9;
  std::vector<std::complex<double>> alpha;
  QubitState qubit_state = QubitState::g;
  double kappa = 0.0;  // energy decay rate the trajectory was simulated with

  double n_bar(std::size_t i) const { return std::norm(alpha.at(i)); }
  double n_bar_at(double t) const;
  double duration() const { return dt * static_cast<double>(alpha.size() - 1); }
  std::complex<double> final_alpha() const { return alpha.back(); }
};

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimulateOptions {
  double blowup_bound = -1.0;  // photons; negative selects 10*n_crit
  double output_dt = 1e-9;
  int initial_substeps = 2;  // per output step
  int max_substeps = 1024;
  double convergence_tol = 1e-6;  // on final |alpha|
  std::complex<double> alpha0 = 0.0;
};

/// Drive detuning from the dressed resonance for one qubit state, in the
/// sense omega_r,state - omega_d.
double cavity_detuning(const DeviceParams& p, double omega_d, QubitState s);

/// Integrates d(alpha)/dt = -i(delta + K|alpha|^2) alpha - (kappa/2) alpha - i eps(t).
/// The drive is on for 0 <= t < t_d and off afterwards.
PointerTrajectory simulate_pointer(const DeviceParams& p, const DrivePulse& d, QubitState s,
                                   double kerr, double horizon,
                                   const SimulateOptions& opt = {});

/// Same integrator with an explicit detuning and decay rate.
PointerTrajectory integrate_cavity(double delta, double kerr, double kappa, const DrivePulse& d,
                                   double horizon, const SimulateOptions& opt,
                                   double blowup_bound);

struct EpsilonCalibration {
  double epsilon = 0.0;       // rad/s
  double arb_scale = 0.0;     // rad/s per arb. unit
  double achieved_n = 0.0;
  int iterations = 0;
};

inline constexpr double kOperatingArbAmplitude = 0.885;

/// Finds the drive rate that brings the bright branch to target_n at t_d.
/// bright_detuning is omega_r,bright - omega_d (zero: resonant drive).
EpsilonCalibration calibrate_epsilon(const DeviceParams& p, double target_n, double t_d,
                                     double bright_detuning = 0.0, double kerr = 0.0);

/// Free decay of the final cavity amplitude at energy rate kappa + extra_decay.
PointerTrajectory ring_down(const PointerTrajectory& traj, double extra_decay, double duration);

void write_trajectory_csv(std::ostream& os, const std::vector<PointerTrajectory>& trajectories);

}  // namespace jpmr
