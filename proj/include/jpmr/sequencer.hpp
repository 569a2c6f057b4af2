#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "jpmr/calibration_record.hpp"
#include "jpmr/device.hpp"

namespace jpmr {

enum class SegmentKind {
  qubit_gate,
  pointer_drive,
  photodetect,
  tunnel_bias,
  relax,
  jpm_readout,
  resonator_reset,
  qubit_reset,
  hide_bias,
  idle
};

const char* to_string(SegmentKind k);
SegmentKind segment_kind_from_string(const std::string& s);

/// One block of the timing diagram. Only the parameters relevant to `kind`
/// are meaningful; the rest keep their defaults.
struct ScheduleSegment {
  SegmentKind kind = SegmentKind::idle;
  std::string channel;
  std::int64_t start_ns = 0;
  std::int64_t duration_ns = 0;

  double angle = 0.0;           // qubit_gate
  std::string shape = "cosine";  // qubit_gate
  double omega_d = 0.0;         // pointer_drive
  double epsilon = 0.0;         // pointer_drive
  double flux = 0.0;            // JPM flux bias (photodetect, tunnel_bias, relax, resets)
  double qubit_freq = 0.0;      // hide_bias, rad/s

  std::int64_t end_ns() const { return start_ns + duration_ns; }
  bool operator==(const ScheduleSegment&) const = default;
};

struct PulseSchedule {
  std::vector<ScheduleSegment> segments;

  std::int64_t total_duration_ns() const;
  /// Duration up to the end of the last non-reset segment.
  std::int64_t pre_reset_duration_ns() const;
  const ScheduleSegment* find(SegmentKind k) const;
  ScheduleSegment* find(SegmentKind k);
  bool operator==(const PulseSchedule&) const = default;
};

class ScheduleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingCalibrationError : public std::runtime_error {
 public:
  explicit MissingCalibrationError(std::vector<std::string> fields);
  const std::vector<std::string>& fields() const { return fields_; }

 private:
  std::vector<std::string> fields_;
};

struct ScheduleOptions {
  double gate_angle = 3.141592653589793;
  std::int64_t gate_ns = 15;
  bool include_reset = true;
  std::int64_t resonator_reset_ns = 100;
  std::int64_t qubit_reset_ns = 100;
};

inline constexpr std::int64_t kGateSlotNs = 15;

PulseSchedule build_default_schedule(const DeviceParams& p, const CalibrationRecord& calib,
                                     const ScheduleOptions& opt = {});
void validate_schedule(const PulseSchedule& s);

/// Text form: header line, then one row per segment
/// `channel,start_ns,duration_ns,kind,params` with params as key=value pairs
/// separated by ';'. Doubles are written with 17 significant digits.
std::string serialize_schedule(const PulseSchedule& s);
PulseSchedule parse_schedule(const std::string& text);

struct GateEnvelope {
  std::vector<double> envelope;    // in-phase, peak 1
  std::vector<double> derivative;  // d(envelope)/dt per ns, quadrature companion
};
GateEnvelope gate_envelope(const std::string& shape, std::int64_t duration_ns);

/// One row per ns with one column per channel.
void write_waveforms_csv(std::ostream& os, const PulseSchedule& s);

}  // namespace jpmr
