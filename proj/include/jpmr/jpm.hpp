#pragma once

#include <iosfwd>
#include <stdexcept>
#include <utility>
#include <vector>

#include "jpmr/device.hpp"
#include "jpmr/rng.hpp"

namespace jpmr {

struct WellMinimum {
  double phase = 0.0;
  double energy = 0.0;   // J
  double omega_p = 0.0;  // small-oscillation frequency, rad/s
};

/// Summary of U(phi) = E_L (phi - phi_x)^2 / 2 - E_J cos(phi) at one flux.
/// The left well is the minimum nearest zero phase (|phase| < pi); the
/// barrier is the next maximum towards larger phase.
struct JpmPotential {
  double beta_L = 0.0;
  double phi_ext = 0.0;  // units of flux quantum
  std::vector<WellMinimum> well_minima;  // ascending phase
  std::vector<double> maxima;            // phases of local maxima
  bool has_left_well = false;
  double left_phase = 0.0;
  double barrier_phase = 0.0;
  double barrier_height = 0.0;  // J
  double omega_p_left = 0.0;
  int n_bound_left = 0;

  /// Barrier in units of the left-well level spacing.
  double barrier_quanta() const;
};

enum class Well { left, right };

struct JpmShotState {
  Well well = Well::left;
  double excitation = 0.0;  // J above the left-well ground state
};

struct IqPoint {
  double i = 0.0;
  double q = 0.0;
};

class NoDoubleWellError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

double josephson_energy(const DeviceParams& p);
double inductive_energy(const DeviceParams& p);
double potential_energy(const DeviceParams& p, double phi_ext, double phase);
/// Plasma frequency for curvature at a given phase.
double plasma_frequency(const DeviceParams& p, double phase);

/// Throws NoDoubleWellError if require_two_wells and fewer than two minima exist.
JpmPotential potential_landscape(const DeviceParams& p, double phi_ext,
                                 bool require_two_wells = false);

struct FluxWindow {
  double lo = 0.0;
  double hi = 0.0;
};
/// Contiguous flux interval around half a flux quantum with exactly two minima.
FluxWindow bistable_window(const DeviceParams& p);
/// Flux in (1/2, 3/2) at which the left well disappears.
double critical_flux(const DeviceParams& p);
/// Flux in [1/2, critical) where the left-well plasma frequency equals omega.
double resonance_flux(const DeviceParams& p, double omega);

struct PlasmaRange {
  double omega_max = 0.0;
  double omega_min = 0.0;
  double flux_at_max = 0.0;
  double flux_at_min = 0.0;
  std::vector<std::pair<double, double>> samples;  // (flux, omega_p)
};
/// Sweeps the left-well plasma frequency from zero flux up to the last flux at
/// which the left well still holds at least one level.
PlasmaRange plasma_frequency_range(const DeviceParams& p, int samples = 600);

/// Fraction of the cavity energy handed to the JPM after interaction time t.
double transfer_fraction(const DeviceParams& p, double t);
/// Energy (J) absorbed from a cavity holding n_bar photons.
double photodetect(const DeviceParams& p, const JpmPotential& landscape, double n_bar, double t);
/// Interaction time maximising the transferred energy.
double photodetect_optimum(const DeviceParams& p);

/// Escape rate for a given excitation (in level-spacing units of the pulse landscape).
double escape_rate(const JpmPotential& pulse, double excitation_quanta);
double escape_probability(const JpmPotential& pulse, double excitation_quanta, double duration);
/// Overload taking the excitation energy deposited at the photodetection bias.
double escape_probability(const JpmPotential& pulse, const JpmPotential& detect,
                          const JpmShotState& state, double duration);

double retrap_probability(const DeviceParams& p, double hold_time, double base = 0.05);
JpmShotState relax_after_tunnel(const DeviceParams& p, const JpmShotState& state,
                                double hold_time, Rng& rng, double base = 0.05);

struct IqConfig {
  double snr_ref = 8.0;         // cloud separation / sigma at t_ref
  double t_ref = 250e-9;
  double rotation = 0.0;        // radians, applied to both centres
};
double effective_snr(const IqConfig& cfg, double readout_time);
double iq_misassignment(double snr);
std::pair<IqPoint, Well> readout_iq(Well well, double readout_time, const IqConfig& cfg,
                                    Rng& rng);
/// Bisector decision for an arbitrary pair of centres.
Well classify_iq(const IqPoint& x, const IqPoint& c_left, const IqPoint& c_right);

/// Energy decay rate of the resonator with the JPM tuned on or off resonance.
double hybridized_decay_rate(const DeviceParams& p, bool on_resonance);
/// Qubit decay rate with qubit, resonator and JPM all on resonance.
double qubit_reset_decay_rate(const DeviceParams& p);

void write_landscape_csv(std::ostream& os, const DeviceParams& p, double phi_ext,
                         double phase_lo, double phase_hi, int points);

}  // namespace jpmr
