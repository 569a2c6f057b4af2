#include "jpmr/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "jpmr/cavity.hpp"
#include "jpmr/jpm.hpp"
#include "jpmr/shot.hpp"
#include "jpmr/units.hpp"

namespace jpmr {

// ---------------------------------------------------------------- record

namespace {

struct RecordField {
  const char* key;
  std::optional<double> CalibrationRecord::*member;
};

constexpr RecordField kRecordFields[] = {
    {"omega_d", &CalibrationRecord::omega_d},
    {"t_d", &CalibrationRecord::t_d},
    {"epsilon", &CalibrationRecord::epsilon},
    {"arb_scale", &CalibrationRecord::arb_scale},
    {"detect_flux", &CalibrationRecord::detect_flux},
    {"tunnel_amplitude", &CalibrationRecord::tunnel_amplitude},
    {"tunnel_duration", &CalibrationRecord::tunnel_duration},
    {"photodetect_time", &CalibrationRecord::photodetect_time},
    {"relax_time", &CalibrationRecord::relax_time},
    {"readout_time", &CalibrationRecord::readout_time},
    {"readout_snr", &CalibrationRecord::readout_snr},
};

}  // namespace

std::vector<std::string> CalibrationRecord::missing_fields() const {
  std::vector<std::string> out;
  for (const auto& f : kRecordFields) {
    if (std::string(f.key) == "arb_scale") continue;
    if (!(this->*(f.member))) out.emplace_back(f.key);
  }
  if (t_d && (*t_d < 10e-9 || *t_d > 1e-6)) out.emplace_back("t_d (outside 10 ns .. 1 us)");
  return out;
}

nlohmann::json calibration_to_json(const CalibrationRecord& r) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& f : kRecordFields) {
    if (r.*(f.member)) j[f.key] = *(r.*(f.member));
  }
  nlohmann::json prov = nlohmann::json::array();
  for (const auto& p : r.provenance) {
    prov.push_back({{"name", p.name}, {"csv", p.csv_path}, {"argmax", p.argmax}});
  }
  j["provenance"] = prov;
  return j;
}

CalibrationRecord calibration_from_json(const nlohmann::json& j) {
  CalibrationRecord r;
  if (!j.is_object()) throw std::invalid_argument("calibration record must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = it.key() == "provenance";
    for (const auto& f : kRecordFields) known = known || it.key() == f.key;
    if (!known) throw std::invalid_argument("unknown calibration key '" + it.key() + "'");
  }
  for (const auto& f : kRecordFields) {
    if (j.contains(f.key)) r.*(f.member) = j[f.key].get<double>();
  }
  if (j.contains("provenance")) {
    for (const auto& p : j["provenance"]) {
      r.provenance.push_back({p.value("name", ""), p.value("csv", ""),
                              p.contains("argmax") ? p["argmax"] : nlohmann::json()});
    }
  }
  return r;
}

// ---------------------------------------------------------------- optimizer

std::vector<double> Axis::values() const {
  if (points < 1) throw std::invalid_argument("axis '" + name + "' has no points");
  std::vector<double> v(points);
  for (int i = 0; i < points; ++i) {
    v[i] = points == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (points - 1);
  }
  return v;
}

ColumnObjective pointwise(std::function<double(const DrivePoint&)> f) {
  return [f](double w, double e, const std::vector<double>& ts, int) {
    std::vector<double> out;
    out.reserve(ts.size());
    for (double t : ts) out.push_back(f({w, e, t}));
    return out;
  };
}

namespace {

struct Candidate {
  DrivePoint pt;
  double value = -std::numeric_limits<double>::infinity();
};

// True if a should replace b under the tie-break order.
bool better(const Candidate& a, const Candidate& b) {
  if (a.value != b.value) return a.value > b.value;
  return std::tie(a.pt.epsilon, a.pt.t_d, a.pt.omega_d) <
         std::tie(b.pt.epsilon, b.pt.t_d, b.pt.omega_d);
}

Axis zoom(const Axis& a, const Axis& bounds, double centre, double factor) {
  Axis z = a;
  const double half = 0.5 * (a.hi - a.lo) * factor;
  z.lo = std::max(bounds.lo, centre - half);
  z.hi = std::min(bounds.hi, centre + half);
  if (z.hi <= z.lo) z.lo = z.hi = centre;
  return z;
}

}  // namespace

OptimizeResult coordinate_optimize(const ColumnObjective& objective, const DrivePoint& start,
                                   const OptimizeOptions& opt) {
  OptimizeResult res;
  Axis fa = opt.freq, aa = opt.amp, ta = opt.time;
  double global_min = std::numeric_limits<double>::infinity();
  double global_max = -global_min;

  auto shots_at = [&](int level) {
    if (opt.shots_per_level.empty()) return 0;
    const auto i = std::min<std::size_t>(level, opt.shots_per_level.size() - 1);
    return opt.shots_per_level[i];
  };

  Candidate cur{start, objective(start.omega_d, start.epsilon, {start.t_d}, shots_at(0)).at(0)};
  res.evaluations = 1;
  res.start_value = cur.value;

  bool stop = false;
  for (int level = 0; level <= opt.refine_levels && !stop; ++level) {
    const int shots = shots_at(level);
    if (level > 0) {
      fa = zoom(fa, opt.freq, cur.pt.omega_d, 0.5);
      aa = zoom(aa, opt.amp, cur.pt.epsilon, 0.5);
      ta = zoom(ta, opt.time, cur.pt.t_d, 0.5);
      if (shots != shots_at(level - 1)) {
        cur.value = objective(cur.pt.omega_d, cur.pt.epsilon, {cur.pt.t_d}, shots).at(0);
        ++res.evaluations;
      }
    }
    const auto tv = ta.values();
    for (int round = 1; round <= opt.max_rounds; ++round) {
      const double before = cur.value;
      for (int pass = 0; pass < 2; ++pass) {
        const auto outer = pass == 0 ? fa.values() : aa.values();
        const long cost = static_cast<long>(outer.size() * tv.size());
        if (res.evaluations + cost > opt.budget) {
          res.budget_exhausted = true;
          stop = true;
          break;
        }
        Candidate best;
        for (double x : outer) {
          const double w = pass == 0 ? x : cur.pt.omega_d;
          const double e = pass == 0 ? cur.pt.epsilon : x;
          const auto col = objective(w, e, tv, shots);
          for (std::size_t k = 0; k < tv.size(); ++k) {
            Candidate c{{w, e, tv[k]}, col[k]};
            global_min = std::min(global_min, c.value);
            global_max = std::max(global_max, c.value);
            if (better(c, best)) best = c;
          }
        }
        res.evaluations += cost;
        ScanSummary s;
        s.name = pass == 0 ? "freq_time" : "amp_time";
        s.round = round;
        s.level = level;
        s.shots = shots;
        s.argmax = best.pt;
        s.value = best.value;
        res.history.push_back(s);
        if (better(best, cur)) cur = best;
      }
      res.rounds += 1;
      if (stop) break;
      if (level == 0 && round == 1 && global_max == global_min) {
        res.degenerate = true;
        res.best = {fa.centre(), aa.centre(), ta.centre()};
        res.value = global_max;
        stop = true;
        break;
      }
      if (cur.value - before < opt.tol) {
        res.converged = true;
        break;
      }
    }
  }
  if (!res.degenerate) {
    res.best = cur.pt;
    res.value = cur.value;
  }
  res.record.omega_d = res.best.omega_d;
  res.record.epsilon = res.best.epsilon;
  res.record.t_d = res.best.t_d;
  for (const auto& s : res.history) {
    ScanProvenance p;
    p.name = s.name + "_round" + std::to_string(s.round) + "_level" + std::to_string(s.level);
    p.argmax = {{"omega_d", s.argmax.omega_d}, {"epsilon", s.argmax.epsilon},
                {"t_d", s.argmax.t_d}, {"value", s.value}, {"shots", s.shots}};
    res.record.provenance.push_back(std::move(p));
  }
  return res;
}

// ---------------------------------------------------------------- tunnel bias

TunnelCalibration calibrate_from_scurves(const std::vector<double>& grid,
                                         const std::function<double(double)>& p_g,
                                         const std::function<double(double)>& p_e) {
  if (grid.empty()) throw CalibrationFailure("empty tunnel amplitude grid");
  TunnelCalibration out;
  double best = -std::numeric_limits<double>::infinity();
  for (double a : grid) {
    SCurvePoint s{a, p_g(a), p_e(a)};
    out.scurves.push_back(s);
    const double c = s.p_e - s.p_g;
    if (c > best) {
      best = c;
      out.amplitude = a;
    }
  }
  out.contrast = best;
  if (!(best >= 0.5)) {
    throw CalibrationFailure("S-curves are not separated (max contrast < 0.5)");
  }
  return out;
}

TunnelCalibration tunnel_bias_calibrate(const DeviceParams& p, double detect_flux,
                                        double photodetect_time, double tunnel_duration,
                                        double n_g, double n_e, int grid_points,
                                        std::optional<double> target_dark_count,
                                        std::optional<double> target_loss) {
  const double fc = critical_flux(p);
  const double span = fc - detect_flux;
  if (!(span > 0.0)) throw CalibrationFailure("photodetection bias beyond the critical flux");
  const double s = transfer_fraction(p, photodetect_time);
  std::vector<double> grid(grid_points);
  for (int i = 0; i < grid_points; ++i) grid[i] = span * (i + 1) / grid_points;
  std::vector<std::vector<double>> tables;
  tables.reserve(grid.size());
  for (double a : grid) tables.push_back(escape_table(potential_landscape(p, detect_flux + a),
                                                      tunnel_duration));
  auto index_of = [&](double a) {
    const auto it = std::lower_bound(grid.begin(), grid.end(), a);
    return static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - grid.begin(),
                                                             static_cast<std::ptrdiff_t>(grid.size()) - 1));
  };
  auto pg = [&](double a) { return poisson_tunnel_probability(tables[index_of(a)], n_g * s); };
  auto pe = [&](double a) { return poisson_tunnel_probability(tables[index_of(a)], n_e * s); };
  auto out = calibrate_from_scurves(grid, pg, pe);
  if (target_dark_count) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double d = std::abs(tables[i].front() - *target_dark_count);
      if (d < best) {
        best = d;
        out.amplitude = grid[i];
        out.contrast = out.scurves[i].p_e - out.scurves[i].p_g;
      }
    }
  }
  if (target_loss && !target_dark_count) {
    double best = std::numeric_limits<double>::infinity();
    const double a0 = out.amplitude;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (grid[i] < a0) continue;
      const double loss = 1.0 - (out.scurves[i].p_e - out.scurves[i].p_g);
      const double d = std::abs(loss - *target_loss);
      if (d < best) {
        best = d;
        out.amplitude = grid[i];
        out.contrast = 1.0 - loss;
      }
    }
  }
  out.dark_count = tables[index_of(out.amplitude)].front();
  return out;
}

// ---------------------------------------------------------------- operating point

CalibrationRecord recalibrate_tunnel(const DeviceParams& p, const CalibrationRecord& r,
                                     std::optional<double> target_loss) {
  CalibrationRecord out = r;
  DrivePulse d;
  d.omega_d = *r.omega_d;
  d.amplitude = *r.epsilon;
  d.t_d = *r.t_d;
  SimulateOptions so;
  so.blowup_bound = 1e7;
  const double n_g = simulate_pointer(p, d, QubitState::g, p.kerr, d.t_d, so).n_bar(
      static_cast<std::size_t>(std::llround(d.t_d / so.output_dt)));
  const double n_e = simulate_pointer(p, d, QubitState::e, p.kerr, d.t_d, so).n_bar(
      static_cast<std::size_t>(std::llround(d.t_d / so.output_dt)));
  // The dimmer pointer is the dark one whichever state is driven.
  const auto tc = tunnel_bias_calibrate(p, *r.detect_flux, *r.photodetect_time,
                                        *r.tunnel_duration, std::min(n_g, n_e),
                                        std::max(n_g, n_e), 2001, std::nullopt, target_loss);
  out.tunnel_amplitude = tc.amplitude;
  return out;
}

CalibrationRecord published_operating_point(const DeviceParams& p, const OperatingPointOptions& opt) {
  validate_device(p);
  CalibrationRecord r;
  const double w1 = dressed_resonator(p, 1);
  r.omega_d = w1 + opt.drive_offset;
  r.t_d = opt.t_d;
  const auto ec = calibrate_epsilon(p, opt.target_n, opt.t_d, w1 - *r.omega_d, 0.0);
  r.epsilon = ec.epsilon;
  r.arb_scale = ec.arb_scale;
  r.detect_flux = resonance_flux(p, w1);
  r.photodetect_time = opt.photodetect_time;
  r.tunnel_duration = opt.tunnel_duration;
  r.relax_time = opt.relax_time;
  r.readout_time = opt.readout_time;
  r.readout_snr = opt.readout_snr;
  return recalibrate_tunnel(p, r, opt.detector_loss);
}

RetargetResult frequency_retarget(const DeviceParams& p, const CalibrationRecord& r,
                                  double new_omega_q) {
  if (!r.omega_d || !r.t_d) throw std::invalid_argument("record lacks omega_d or t_d");
  RetargetResult out{p, r};
  if (new_omega_q == p.omega_q_op) return out;
  DeviceParams q = p;
  q.omega_q_op = new_omega_q;
  const double chi_old = derive_chi(p);
  const double chi_new = derive_chi(q);  // throws on a dispersive-guard violation
  if (p.measured_two_chi) q.measured_two_chi = *p.measured_two_chi * chi_new / chi_old;
  const double offset = *r.omega_d - dressed_resonator(p, 1);
  out.device = q;
  out.record.omega_d = dressed_resonator(q, 1) + offset;
  const double chi_eff = effective_two_chi(q) / 2.0;
  out.record.t_d = std::round(kPi / chi_eff / kNs) * kNs;
  return out;
}

}  // namespace jpmr
