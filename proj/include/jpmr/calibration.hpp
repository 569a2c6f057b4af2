#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "jpmr/calibration_record.hpp"
#include "jpmr/device.hpp"

namespace jpmr {

class CalibrationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Axis {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
  int points = 1;
  std::vector<double> values() const;
  double centre() const { return 0.5 * (lo + hi); }
};

struct DrivePoint {
  double omega_d = 0.0;
  double epsilon = 0.0;
  double t_d = 0.0;
};

/// Evaluates the objective along a column of drive times for fixed
/// (omega_d, epsilon). shots == 0 requests the exact expectation.
using ColumnObjective = std::function<std::vector<double>(
    double omega_d, double epsilon, const std::vector<double>& t_values, int shots)>;

ColumnObjective pointwise(std::function<double(const DrivePoint&)> f);

struct OptimizeOptions {
  Axis freq;
  Axis amp;
  Axis time;
  double tol = 1e-3;
  int max_rounds = 10;
  long budget = 2'000'000;  // objective evaluations
  int refine_levels = 0;    // zoom steps after the fixed-grid stage
  std::vector<int> shots_per_level = {0};
};

struct ScanSummary {
  std::string name;  // "freq_time" or "amp_time"
  int round = 0;
  int level = 0;
  int shots = 0;
  DrivePoint argmax;
  double value = 0.0;
};

struct OptimizeResult {
  DrivePoint best;
  double value = 0.0;
  double start_value = 0.0;
  int rounds = 0;
  long evaluations = 0;
  bool converged = false;
  bool budget_exhausted = false;
  bool degenerate = false;
  std::vector<ScanSummary> history;
  CalibrationRecord record;  // omega_d, epsilon, t_d and provenance filled
};

/// Alternating (omega_d, t_d) and (epsilon, t_d) grid scans. Ties go to the
/// lowest epsilon, then the shortest t_d, then the lowest omega_d.
OptimizeResult coordinate_optimize(const ColumnObjective& objective, const DrivePoint& start,
                                   const OptimizeOptions& opt);

struct SCurvePoint {
  double amplitude = 0.0;
  double p_g = 0.0;
  double p_e = 0.0;
};

struct TunnelCalibration {
  double amplitude = 0.0;
  double contrast = 0.0;
  double dark_count = 0.0;  // zero-photon escape probability at the chosen amplitude
  std::vector<SCurvePoint> scurves;
};

/// Grid argmax of p_e - p_g. Fails when the best contrast is below 0.5.
TunnelCalibration calibrate_from_scurves(const std::vector<double>& grid,
                                         const std::function<double(double)>& p_g,
                                         const std::function<double(double)>& p_e);

/// S-curves for the two pointer photon numbers at photodetection; picks the
/// contrast-maximising tunnel amplitude, or the amplitude whose zero-photon
/// escape probability is closest to target_dark_count when given. With
/// target_loss the amplitude is moved above the contrast optimum until
/// 1 - contrast reaches target_loss.
TunnelCalibration tunnel_bias_calibrate(const DeviceParams& p, double detect_flux,
                                        double photodetect_time, double tunnel_duration,
                                        double n_g, double n_e, int grid_points = 2001,
                                        std::optional<double> target_dark_count = std::nullopt,
                                        std::optional<double> target_loss = std::nullopt);

struct OperatingPointOptions {
  double drive_offset = -2.0 * 3.141592653589793 * 2.1e6;  // omega_d - omega_r1
  double t_d = 105e-9;
  double target_n = 27.0;
  double photodetect_time = 5e-9;
  double tunnel_duration = 10e-9;
  double relax_time = 30e-9;
  double readout_time = 250e-9;
  double readout_snr = 8.0;
  /// Detector share of the infidelity at the chosen tunnel bias.
  std::optional<double> detector_loss = 0.006;
};

/// Record at the published operating point: drive below the |1> resonance,
/// epsilon chosen so the bright branch holds target_n photons at t_d in the
/// linear model, JPM on resonance with the |1> resonance, tunnel amplitude
/// from tunnel_bias_calibrate.
CalibrationRecord published_operating_point(const DeviceParams& p,
                                        const OperatingPointOptions& opt = {});

/// Re-derives the tunnel amplitude for the record's current pointer settings.
CalibrationRecord recalibrate_tunnel(const DeviceParams& p, const CalibrationRecord& r,
                                     std::optional<double> target_loss = std::nullopt);

struct RetargetResult {
  DeviceParams device;
  CalibrationRecord record;
};
/// Moves the qubit operating point; only omega_d and t_d = pi/chi change.
/// The measured 2chi is rescaled by the ratio of formula values.
RetargetResult frequency_retarget(const DeviceParams& p, const CalibrationRecord& r,
                                  double new_omega_q);

}  // namespace jpmr
