#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "jpmr/calibration.hpp"
#include "jpmr/cavity.hpp"
#include "jpmr/device.hpp"
#include "jpmr/fit.hpp"
#include "jpmr/sequencer.hpp"
#include "jpmr/shot.hpp"

namespace jpmr {

/// Everything one experiment needs: device, operating point, schedule and
/// shot options, error model.
struct Setup {
  DeviceParams device;
  CalibrationRecord calib;
  ScheduleOptions schedule;
  ShotOptions shot;
  ErrorModel errors;

  PulseSchedule build_schedule() const;
  ShotSimulator simulator() const;
};

/// Operating point of chip #1 with the default error model.
Setup default_setup(const DeviceParams& p = table_iv_device());

// ---------------------------------------------------------------- fidelity

struct BudgetLine {
  std::string label;
  double infidelity = 0.0;
};

struct FidelityReport {
  double p1_given_1 = 0.0;
  double p1_given_0 = 0.0;
  double F = 0.0;
  int n_shots = 0;
  double expected_F = 0.0;  // exact expectation for the same model
  std::vector<BudgetLine> budget;
  std::vector<double> angles;    // Rabi sweep
  std::vector<double> p1_curve;  // sampled P(outcome 1) per angle
};

/// Budget labels in table order.
inline const char* const kBudgetLabels[] = {"excess_one_population", "imperfect_dark_pointer",
                                            "qubit_relaxation", "x_gate"};

/// The error model reduced to one budget channel; the dark-pointer channel
/// is the photon-counting detector, the others use the ideal detector.
ErrorModel single_channel(const ErrorModel& em, const std::string& label);
/// Exact 1 - F of each single channel.
std::vector<BudgetLine> fidelity_budget(const ShotSimulator& sim, const ErrorModel& em);

/// Sampled P(1|1) - P(1|0) with n_shots per prepared state; the streams of
/// determination `block` are disjoint from every other block.
FidelityReport sample_fidelity(const ShotSimulator& sim, const ErrorModel& em, int n_shots,
                               std::uint64_t seed, std::uint64_t block = 0);

FidelityReport rabi_fidelity(const ShotSimulator& sim, const ErrorModel& em, int n_shots,
                             std::uint64_t seed, int angle_points = 41);

struct StabilityResult {
  std::vector<double> values;
  double mean = 0.0;
  double std = 0.0;
  std::vector<double> bin_edges;
  std::vector<int> bin_counts;
};
/// Independent fidelity determinations; threads = 0 picks the hardware
/// concurrency. The result does not depend on the thread count.
StabilityResult stability_histogram(const ShotSimulator& sim, const ErrorModel& em,
                                    int n_determinations, int n_shots, std::uint64_t seed,
                                    int bins = 40, int threads = 0);

// ---------------------------------------------------------------- scans

enum class ScanVariable { freq, amp, time };

struct ScanAxis {
  ScanVariable variable = ScanVariable::time;
  std::vector<double> values;  // rad/s, arb. units or s
};
std::string axis_name(ScanVariable v);
std::string axis_unit(ScanVariable v);
ScanAxis make_axis(ScanVariable v, double lo, double hi, int points);

struct ScanResult {
  ScanAxis x;  // freq or amp
  ScanAxis y;  // time
  /// Row-major, rows along x. Probabilities of outcome 1.
  std::vector<double> p_g;
  std::vector<double> p_e;
  std::vector<double> diff;  // p_e - p_g
  std::size_t argmax_x = 0;
  std::size_t argmax_y = 0;
  double argmax_value = 0.0;

  double at(const std::vector<double>& g, std::size_t ix, std::size_t iy) const {
    return g[ix * y.values.size() + iy];
  }
};

/// Outcome-1 probabilities for prepared |0> and |1> along a column of drive
/// times; shots = 0 gives the exact expectation. Drive times are rounded to
/// whole ns.
std::vector<std::pair<double, double>> column_probabilities(const Setup& s,
                                                            const ShotSimulator& base,
                                                            double omega_d, double epsilon,
                                                            const std::vector<double>& times,
                                                            int shots, std::uint64_t seed);

/// 2D scan over (freq or amp) x time at the record's remaining settings.
ScanResult scan_2d(const Setup& s, const ScanAxis& x, const ScanAxis& y, int shots,
                   std::uint64_t seed);

struct FrequencyScanPeaks {
  /// Interior maxima of |diff| with prominence >= threshold. A maximum on
  /// the grid edge is a cut through a ridge that continues outside the
  /// window, so it is not counted.
  std::vector<Peak2D> peaks;
  bool two_peaks = false;
  double freq_peak_r0 = 0.0;  // rad/s of the peak nearest omega_r0
  double freq_peak_r1 = 0.0;
  double time_peak_r0 = 0.0;
  double time_peak_r1 = 0.0;
};
FrequencyScanPeaks analyze_frequency_scan(const ScanResult& r, const DeviceParams& p,
                                          double min_prominence = 0.1);

/// F = P(1|1) - P(1|0) evaluated along drive-time columns.
ColumnObjective fidelity_objective(const Setup& s, std::uint64_t seed);

/// Default optimizer axes around the record: freq omega_r1 - 5 MHz .. + 3 MHz,
/// amplitude 0.5 .. 1.0 arb, time 60 .. 200 ns.
OptimizeOptions default_optimize_options(const Setup& s);

// ---------------------------------------------------------------- Stark

struct StarkPoint {
  double t = 0.0;
  double shift_bright = 0.0;  // rad/s, qubit frequency shift
  double shift_dark = 0.0;
  double n_bright = 0.0;
  double n_dark = 0.0;
};
/// Photon number from a measured Stark shift.
double stark_photon_number(double shift, double two_chi);
/// Drives the resonator for each time and reads the Stark shift 2chi * n_bar
/// off the trajectory.
std::vector<StarkPoint> stark_calibration(const Setup& s, const std::vector<double>& times);

// ---------------------------------------------------------------- excess population

struct ExcessEstimate {
  double estimate = 0.0;
  LinearFit fit_g;
  LinearFit fit_e;
  std::vector<double> amplitudes;  // arb
  std::vector<double> p_g;         // tunneling probability, nominal |0>
  std::vector<double> p_e;
};
/// Ratio-of-slopes estimate from sampled tunneling probabilities; the planted
/// value is s.errors.excess_one_population. Needs at least 4 amplitudes.
/// n_shots = 0 fits the exact outcome-1 probabilities instead; retrapping
/// and IQ errors rescale both slopes alike, so the ratio is unchanged.
ExcessEstimate excess_population_estimate(const Setup& s, const std::vector<double>& amplitudes,
                                          int n_shots, std::uint64_t seed,
                                          std::uint64_t block = 0);

// ---------------------------------------------------------------- reset

struct ResetCurves {
  std::vector<double> times_active;  // 1 ns grid
  std::vector<double> resonator_active;
  std::vector<double> qubit_active;
  std::vector<double> times_passive;  // 10 ns grid
  std::vector<double> resonator_passive;
  std::vector<double> qubit_passive;
  double resonator_passive_1e = 0.0;   // s
  double resonator_active_time = 0.0;  // s to reach resonator_target
  double qubit_active_time = 0.0;      // s to reach qubit_target
  double hybridized_decay_time = 0.0;
  double qubit_reset_decay_time = 0.0;
};
ResetCurves reset_experiments(const DeviceParams& p, double n0 = 27.0, double p0 = 1.0,
                              double resonator_target = 1e-3, double qubit_target = 1e-2);

// ---------------------------------------------------------------- figure helpers

/// Bright and dark pointer trajectories at the operating point, extended past
/// the end of the drive.
std::vector<PointerTrajectory> pointer_evolution(const Setup& s, double extra = 50e-9);

struct PhotodetectPoint {
  double t = 0.0;
  double energy_fraction = 0.0;
  double p_g = 0.0;
  double p_e = 0.0;
};
std::vector<PhotodetectPoint> photodetect_sweep(const Setup& s, const std::vector<double>& times);

TunnelCalibration scurves(const Setup& s, int grid_points = 401);

}  // namespace jpmr
