#include "jpmr/sequencer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <ostream>
#include <sstream>

#include "jpmr/units.hpp"

namespace jpmr {

namespace {

struct KindName {
  SegmentKind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {SegmentKind::qubit_gate, "qubit_gate"},
    {SegmentKind::pointer_drive, "pointer_drive"},
    {SegmentKind::photodetect, "photodetect"},
    {SegmentKind::tunnel_bias, "tunnel_bias"},
    {SegmentKind::relax, "relax"},
    {SegmentKind::jpm_readout, "jpm_readout"},
    {SegmentKind::resonator_reset, "resonator_reset"},
    {SegmentKind::qubit_reset, "qubit_reset"},
    {SegmentKind::hide_bias, "hide_bias"},
    {SegmentKind::idle, "idle"},
};

bool is_reset(SegmentKind k) {
  return k == SegmentKind::resonator_reset || k == SegmentKind::qubit_reset;
}

std::int64_t to_ns(double seconds, const char* what) {
  const double ns = seconds / kNs;
  const double r = std::round(ns);
  if (std::abs(ns - r) > 1e-6 || r < 0.0) {
    throw ScheduleError(std::string(what) + " is not a non-negative multiple of 1 ns");
  }
  return static_cast<std::int64_t>(r);
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool uses(SegmentKind k, const std::string& key) {
  switch (k) {
    case SegmentKind::qubit_gate: return key == "angle" || key == "shape";
    case SegmentKind::pointer_drive: return key == "omega_d" || key == "epsilon";
    case SegmentKind::photodetect:
    case SegmentKind::tunnel_bias:
    case SegmentKind::relax:
    case SegmentKind::resonator_reset: return key == "flux";
    case SegmentKind::qubit_reset:
    case SegmentKind::hide_bias: return key == "qubit_freq";
    default: return false;
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw ScheduleError("bad number '" + s + "'");
  return v;
}

std::int64_t parse_int(const std::string& s) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') throw ScheduleError("bad integer '" + s + "'");
  return v;
}

}  // namespace

const char* to_string(SegmentKind k) {
  for (const auto& kn : kKindNames)
    if (kn.kind == k) return kn.name;
  return "idle";
}

SegmentKind segment_kind_from_string(const std::string& s) {
  for (const auto& kn : kKindNames)
    if (s == kn.name) return kn.kind;
  throw ScheduleError("unknown segment kind '" + s + "'");
}

std::int64_t PulseSchedule::total_duration_ns() const {
  std::int64_t end = 0;
  for (const auto& s : segments) end = std::max(end, s.end_ns());
  return end;
}

std::int64_t PulseSchedule::pre_reset_duration_ns() const {
  std::int64_t end = 0;
  for (const auto& s : segments)
    if (!is_reset(s.kind)) end = std::max(end, s.end_ns());
  return end;
}

const ScheduleSegment* PulseSchedule::find(SegmentKind k) const {
  for (const auto& s : segments)
    if (s.kind == k) return &s;
  return nullptr;
}

ScheduleSegment* PulseSchedule::find(SegmentKind k) {
  for (auto& s : segments)
    if (s.kind == k) return &s;
  return nullptr;
}

MissingCalibrationError::MissingCalibrationError(std::vector<std::string> fields)
    : std::runtime_error([&] {
        std::string m = "calibration record is missing:";
        for (const auto& f : fields) m += " " + f;
        return m;
      }()),
      fields_(std::move(fields)) {}

PulseSchedule build_default_schedule(const DeviceParams& p, const CalibrationRecord& calib,
                                     const ScheduleOptions& opt) {
  auto missing = calib.missing_fields();
  if (!missing.empty()) throw MissingCalibrationError(std::move(missing));
  const double detect = *calib.detect_flux;
  PulseSchedule s;
  std::int64_t t = 0;
  ScheduleSegment gate;
  gate.kind = SegmentKind::qubit_gate;
  gate.channel = "xy";
  gate.duration_ns = opt.gate_ns;
  gate.angle = opt.gate_angle;
  s.segments.push_back(gate);
  t = std::max(opt.gate_ns, kGateSlotNs);

  ScheduleSegment drive;
  drive.kind = SegmentKind::pointer_drive;
  drive.channel = "ro";
  drive.start_ns = t;
  drive.duration_ns = to_ns(*calib.t_d, "t_d");
  drive.omega_d = *calib.omega_d;
  drive.epsilon = *calib.epsilon;
  s.segments.push_back(drive);
  t = drive.end_ns();

  auto jpm = [&](SegmentKind k, double seconds, double flux, const char* what) {
    ScheduleSegment seg;
    seg.kind = k;
    seg.channel = "jpm";
    seg.start_ns = t;
    seg.duration_ns = to_ns(seconds, what);
    seg.flux = flux;
    s.segments.push_back(seg);
    t = seg.end_ns();
  };
  jpm(SegmentKind::photodetect, *calib.photodetect_time, detect, "photodetect time");
  jpm(SegmentKind::tunnel_bias, *calib.tunnel_duration, detect + *calib.tunnel_amplitude,
      "tunnel duration");
  jpm(SegmentKind::relax, *calib.relax_time, detect, "relax time");

  ScheduleSegment ro;
  ro.kind = SegmentKind::jpm_readout;
  ro.channel = "jr";
  ro.start_ns = t;
  ro.duration_ns = to_ns(*calib.readout_time, "readout time");
  s.segments.push_back(ro);
  t = ro.end_ns();

  if (opt.include_reset) {
    ScheduleSegment rr;
    rr.kind = SegmentKind::resonator_reset;
    rr.channel = "jpm";
    rr.start_ns = t;
    rr.duration_ns = opt.resonator_reset_ns;
    rr.flux = detect;
    s.segments.push_back(rr);
    t = rr.end_ns();
    ScheduleSegment qr;
    qr.kind = SegmentKind::qubit_reset;
    qr.channel = "qz";
    qr.start_ns = t;
    qr.duration_ns = opt.qubit_reset_ns;
    qr.qubit_freq = dressed_resonator(p, 0);
    s.segments.push_back(qr);
  }
  validate_schedule(s);
  return s;
}

void validate_schedule(const PulseSchedule& s) {
  std::map<std::string, std::vector<const ScheduleSegment*>> by_channel;
  for (const auto& seg : s.segments) {
    if (seg.duration_ns < 0 || seg.start_ns < 0) {
      throw ScheduleError(std::string("negative timing in ") + to_string(seg.kind));
    }
    by_channel[seg.channel].push_back(&seg);
  }
  for (auto& [ch, list] : by_channel) {
    std::sort(list.begin(), list.end(), [](auto* a, auto* b) { return a->start_ns < b->start_ns; });
    for (std::size_t i = 1; i < list.size(); ++i) {
      if (list[i]->start_ns < list[i - 1]->end_ns()) {
        throw ScheduleError("overlapping segments on channel '" + ch + "'");
      }
    }
  }
}

std::string serialize_schedule(const PulseSchedule& s) {
  const ScheduleSegment defaults;
  std::ostringstream os;
  os << "channel,start_ns,duration_ns,kind,params\n";
  for (const auto& seg : s.segments) {
    std::vector<std::string> params;
    auto add = [&](const char* key, bool differs, const std::string& value) {
      if (uses(seg.kind, key) || differs) params.push_back(std::string(key) + "=" + value);
    };
    add("angle", seg.angle != defaults.angle, fmt17(seg.angle));
    add("shape", seg.shape != defaults.shape, seg.shape);
    add("omega_d", seg.omega_d != defaults.omega_d, fmt17(seg.omega_d));
    add("epsilon", seg.epsilon != defaults.epsilon, fmt17(seg.epsilon));
    add("flux", seg.flux != defaults.flux, fmt17(seg.flux));
    add("qubit_freq", seg.qubit_freq != defaults.qubit_freq, fmt17(seg.qubit_freq));
    os << seg.channel << ',' << seg.start_ns << ',' << seg.duration_ns << ',' << to_string(seg.kind)
       << ',';
    for (std::size_t i = 0; i < params.size(); ++i) os << (i ? ";" : "") << params[i];
    os << '\n';
  }
  return os.str();
}

PulseSchedule parse_schedule(const std::string& text) {
  PulseSchedule s;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      if (line.rfind("channel,", 0) == 0) continue;
    }
    auto cols = split(line, ',');
    if (cols.size() != 5) throw ScheduleError("schedule row needs 5 columns: " + line);
    ScheduleSegment seg;
    seg.channel = cols[0];
    seg.start_ns = parse_int(cols[1]);
    seg.duration_ns = parse_int(cols[2]);
    seg.kind = segment_kind_from_string(cols[3]);
    if (!cols[4].empty()) {
      for (const auto& kv : split(cols[4], ';')) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ScheduleError("bad parameter '" + kv + "'");
        const auto key = kv.substr(0, eq);
        const auto val = kv.substr(eq + 1);
        if (key == "angle") seg.angle = parse_double(val);
        else if (key == "shape") seg.shape = val;
        else if (key == "omega_d") seg.omega_d = parse_double(val);
        else if (key == "epsilon") seg.epsilon = parse_double(val);
        else if (key == "flux") seg.flux = parse_double(val);
        else if (key == "qubit_freq") seg.qubit_freq = parse_double(val);
        else throw ScheduleError("unknown parameter '" + key + "'");
      }
    }
    s.segments.push_back(seg);
  }
  validate_schedule(s);
  return s;
}

GateEnvelope gate_envelope(const std::string& shape, std::int64_t duration_ns) {
  if (duration_ns < 1) throw std::invalid_argument("gate duration must be >= 1 ns");
  GateEnvelope g;
  const auto n = static_cast<std::size_t>(duration_ns);
  g.envelope.resize(n);
  g.derivative.resize(n);
  if (shape == "square") {
    std::fill(g.envelope.begin(), g.envelope.end(), 1.0);
    return g;
  }
  if (shape != "cosine") throw std::invalid_argument("unknown gate shape '" + shape + "'");
  if (n == 1) return g;
  const double span = static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k) {
    const double x = kTwoPi * static_cast<double>(k) / span;
    g.envelope[k] = 0.5 * (1.0 - std::cos(x));
    g.derivative[k] = kPi / span * std::sin(x);
  }
  g.envelope.front() = g.envelope.back() = 0.0;
  g.derivative.front() = g.derivative.back() = 0.0;
  return g;
}

void write_waveforms_csv(std::ostream& os, const PulseSchedule& s) {
  const auto n = s.total_duration_ns();
  std::vector<double> xy_i(n, 0.0), xy_q(n, 0.0), ro(n, 0.0), flux(n, 0.0), jr(n, 0.0),
      qz(n, 0.0);
  for (const auto& seg : s.segments) {
    const auto a = seg.start_ns;
    switch (seg.kind) {
      case SegmentKind::qubit_gate:
        if (seg.duration_ns > 0) {
          auto env = gate_envelope(seg.shape, seg.duration_ns);
          for (std::int64_t k = 0; k < seg.duration_ns; ++k) {
            xy_i[a + k] = seg.angle / kPi * env.envelope[k];
            xy_q[a + k] = -seg.angle / kPi * env.derivative[k];
          }
        }
        break;
      case SegmentKind::pointer_drive:
        for (std::int64_t k = 0; k < seg.duration_ns; ++k) ro[a + k] = linear(seg.epsilon) / 1e6;
        break;
      case SegmentKind::photodetect:
      case SegmentKind::tunnel_bias:
      case SegmentKind::relax:
      case SegmentKind::resonator_reset:
        for (std::int64_t k = 0; k < seg.duration_ns; ++k) flux[a + k] = seg.flux;
        break;
      case SegmentKind::jpm_readout:
        for (std::int64_t k = 0; k < seg.duration_ns; ++k) jr[a + k] = 1.0;
        break;
      case SegmentKind::qubit_reset:
      case SegmentKind::hide_bias:
        for (std::int64_t k = 0; k < seg.duration_ns; ++k) qz[a + k] = linear(seg.qubit_freq) / 1e9;
        break;
      case SegmentKind::idle: break;
    }
  }
  os << "time_ns,xy_i,xy_q,ro_eps_MHz,jpm_flux,jr_tone,qz_GHz\n";
  char buf[200];
  for (std::int64_t t = 0; t < n; ++t) {
    std::snprintf(buf, sizeof buf, "%lld,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                  static_cast<long long>(t), xy_i[t], xy_q[t], ro[t], flux[t], jr[t], qz[t]);
    os << buf;
  }
}

}  // namespace jpmr
