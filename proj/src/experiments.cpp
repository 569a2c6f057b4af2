#include "jpmr/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>
#include <thread>

#include "jpmr/jpm.hpp"
#include "jpmr/rng.hpp"
#include "jpmr/units.hpp"

namespace jpmr {

PulseSchedule Setup::build_schedule() const { return build_default_schedule(device, calib, schedule); }

ShotSimulator Setup::simulator() const { return ShotSimulator(device, build_schedule(), shot); }

Setup default_setup(const DeviceParams& p) {
  Setup s;
  s.device = p;
  s.calib = published_operating_point(p);
  return s;
}

// ---------------------------------------------------------------- fidelity

ErrorModel single_channel(const ErrorModel& em, const std::string& label) {
  ErrorModel out = ErrorModel::noiseless();
  out.T1_q = em.T1_q;
  if (label == "excess_one_population") {
    out.excess_one_population = em.excess_one_population;
  } else if (label == "imperfect_dark_pointer") {
    out.ideal_detector = false;
  } else if (label == "qubit_relaxation") {
    out.qubit_relaxation = true;
  } else if (label == "x_gate") {
    out.gate_error = em.gate_error;
  } else {
    throw std::invalid_argument("unknown budget channel '" + label + "'");
  }
  return out;
}

std::vector<BudgetLine> fidelity_budget(const ShotSimulator& sim, const ErrorModel& em) {
  std::vector<BudgetLine> out;
  for (const char* label : kBudgetLabels) {
    const auto e = single_channel(em, label);
    out.push_back({label, 1.0 - (sim.expected_p1(kPi, e) - sim.expected_p1(0.0, e))});
  }
  return out;
}

FidelityReport sample_fidelity(const ShotSimulator& sim, const ErrorModel& em, int n_shots,
                               std::uint64_t seed, std::uint64_t block) {
  FidelityReport r;
  r.n_shots = n_shots;
  Rng r0(seed, stream_id(block, 0)), r1(seed, stream_id(block, 1));
  long c0 = 0, c1 = 0;
  for (int i = 0; i < n_shots; ++i) {
    c0 += sim.run_shot(0.0, em, r0).outcome;
    c1 += sim.run_shot(kPi, em, r1).outcome;
  }
  r.p1_given_0 = n_shots ? static_cast<double>(c0) / n_shots : 0.0;
  r.p1_given_1 = n_shots ? static_cast<double>(c1) / n_shots : 0.0;
  r.F = r.p1_given_1 - r.p1_given_0;
  return r;
}

FidelityReport rabi_fidelity(const ShotSimulator& sim, const ErrorModel& em, int n_shots,
                             std::uint64_t seed, int angle_points) {
  auto r = sample_fidelity(sim, em, n_shots, seed, 0);
  r.expected_F = sim.expected_p1(kPi, em) - sim.expected_p1(0.0, em);
  r.budget = fidelity_budget(sim, em);
  for (int k = 0; k < angle_points; ++k) {
    const double a = angle_points > 1 ? kTwoPi * k / (angle_points - 1) : 0.0;
    Rng rng(seed, stream_id(1, k));
    long c = 0;
    for (int i = 0; i < n_shots; ++i) c += sim.run_shot(a, em, rng).outcome;
    r.angles.push_back(a);
    r.p1_curve.push_back(n_shots ? static_cast<double>(c) / n_shots : 0.0);
  }
  return r;
}

StabilityResult stability_histogram(const ShotSimulator& sim, const ErrorModel& em,
                                    int n_determinations, int n_shots, std::uint64_t seed,
                                    int bins, int threads) {
  StabilityResult out;
  out.values.assign(std::max(0, n_determinations), 0.0);
  int nt = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  nt = std::max(1, std::min(nt, n_determinations));
  auto work = [&](int w) {
    for (int i = w; i < n_determinations; i += nt) {
      out.values[i] = sample_fidelity(sim, em, n_shots, seed, 100 + static_cast<std::uint64_t>(i)).F;
    }
  };
  if (nt == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nt; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  const auto m = gaussian_mle(out.values);
  out.mean = m.mean;
  out.std = m.std;
  if (!out.values.empty() && bins > 0) {
    const auto [lo_it, hi_it] = std::minmax_element(out.values.begin(), out.values.end());
    double lo = *lo_it, hi = *hi_it;
    if (hi <= lo) {
      lo -= 0.5e-6;
      hi += 0.5e-6;
    }
    out.bin_counts.assign(bins, 0);
    for (int b = 0; b <= bins; ++b) out.bin_edges.push_back(lo + (hi - lo) * b / bins);
    for (double v : out.values) {
      int b = static_cast<int>((v - lo) / (hi - lo) * bins);
      out.bin_counts[std::clamp(b, 0, bins - 1)] += 1;
    }
  }
  return out;
}

// ---------------------------------------------------------------- scans

std::string axis_name(ScanVariable v) {
  switch (v) {
    case ScanVariable::freq: return "freq";
    case ScanVariable::amp: return "amp";
    default: return "time";
  }
}

std::string axis_unit(ScanVariable v) {
  switch (v) {
    case ScanVariable::freq: return "rad/s";
    case ScanVariable::amp: return "arb";
    default: return "s";
  }
}

ScanAxis make_axis(ScanVariable v, double lo, double hi, int points) {
  Axis a{axis_name(v), lo, hi, points};
  return {v, a.values()};
}

namespace {

std::uint64_t bits_of(double x) {
  std::uint64_t u;
  std::memcpy(&u, &x, sizeof u);
  return u;
}

std::uint64_t cell_stream(double omega_d, double epsilon, std::int64_t t_ns, int state) {
  return mix64(bits_of(omega_d) ^ mix64(bits_of(epsilon) ^ mix64(static_cast<std::uint64_t>(t_ns) * 2 + state)));
}

}  // namespace

std::vector<std::pair<double, double>> column_probabilities(const Setup& s,
                                                            const ShotSimulator& base,
                                                            double omega_d, double epsilon,
                                                            const std::vector<double>& times,
                                                            int shots, std::uint64_t seed) {
  std::vector<std::pair<double, double>> out;
  if (times.empty()) return out;
  std::vector<std::int64_t> ns;
  for (double t : times) ns.push_back(std::llround(t / kNs));
  const std::int64_t tmax = *std::max_element(ns.begin(), ns.end());
  std::vector<std::complex<double>> ag(tmax + 1, 0.0), ae(tmax + 1, 0.0);
  if (epsilon > 0.0 && tmax > 0) {
    DrivePulse d;
    d.omega_d = omega_d;
    d.amplitude = epsilon;
    d.t_d = tmax * kNs;
    SimulateOptions so;
    so.blowup_bound = 1e7;
    ag = simulate_pointer(s.device, d, QubitState::g, s.device.kerr, d.t_d, so).alpha;
    ae = simulate_pointer(s.device, d, QubitState::e, s.device.kerr, d.t_d, so).alpha;
  }
  const double angle = base.gate_angle() != 0.0 ? base.gate_angle() : kPi;
  for (auto k : ns) {
    const auto sim = base.with_pointers(ag[k], ae[k], k * kNs);
    if (shots <= 0) {
      out.emplace_back(sim.expected_p1(0.0, s.errors), sim.expected_p1(angle, s.errors));
    } else {
      Rng r0(seed, cell_stream(omega_d, epsilon, k, 0));
      Rng r1(seed, cell_stream(omega_d, epsilon, k, 1));
      long c0 = 0, c1 = 0;
      for (int i = 0; i < shots; ++i) {
        c0 += sim.run_shot(0.0, s.errors, r0).outcome;
        c1 += sim.run_shot(angle, s.errors, r1).outcome;
      }
      out.emplace_back(static_cast<double>(c0) / shots, static_cast<double>(c1) / shots);
    }
  }
  return out;
}

ScanResult scan_2d(const Setup& s, const ScanAxis& x, const ScanAxis& y, int shots,
                   std::uint64_t seed) {
  if (x.values.empty() || y.values.empty()) throw std::invalid_argument("empty scan axis");
  if (x.variable == ScanVariable::time || y.variable != ScanVariable::time) {
    throw std::invalid_argument("scan axes must be (freq or amp) x time");
  }
  const auto base = s.simulator();
  ScanResult r;
  r.x = x;
  r.y = y;
  const std::size_t ny = y.values.size();
  r.p_g.resize(x.values.size() * ny);
  r.p_e.resize(r.p_g.size());
  r.diff.resize(r.p_g.size());
  r.argmax_value = -INFINITY;
  for (std::size_t ix = 0; ix < x.values.size(); ++ix) {
    const double w = x.variable == ScanVariable::freq ? x.values[ix] : *s.calib.omega_d;
    const double e = x.variable == ScanVariable::amp ? x.values[ix] * *s.calib.arb_scale
                                                     : *s.calib.epsilon;
    const auto col = column_probabilities(s, base, w, e, y.values, shots, seed);
    for (std::size_t iy = 0; iy < ny; ++iy) {
      const std::size_t k = ix * ny + iy;
      r.p_g[k] = col[iy].first;
      r.p_e[k] = col[iy].second;
      r.diff[k] = r.p_e[k] - r.p_g[k];
      if (r.diff[k] > r.argmax_value) {
        r.argmax_value = r.diff[k];
        r.argmax_x = ix;
        r.argmax_y = iy;
      }
    }
  }
  return r;
}

FrequencyScanPeaks analyze_frequency_scan(const ScanResult& r, const DeviceParams& p,
                                          double min_prominence) {
  FrequencyScanPeaks out;
  std::vector<double> mag(r.diff.size());
  for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(r.diff[i]);
  const std::size_t nx = r.x.values.size(), ny = r.y.values.size();
  for (const auto& pk : find_peaks_2d(mag, nx, ny, min_prominence)) {
    if (pk.row == 0 || pk.row + 1 == nx || pk.col == 0 || pk.col + 1 == ny) continue;
    out.peaks.push_back(pk);
  }
  const double w0 = dressed_resonator(p, 0), w1 = dressed_resonator(p, 1);
  const double tchi = kPi / (effective_two_chi(p) / 2.0);
  bool have0 = false, have1 = false;
  for (const auto& pk : out.peaks) {
    const double f = r.x.values[pk.row], t = r.y.values[pk.col];
    const bool near0 = std::abs(f - w0) < std::abs(f - w1);
    if (near0 && !have0) {
      have0 = true;
      out.freq_peak_r0 = f;
      out.time_peak_r0 = t;
    } else if (!near0 && !have1) {
      have1 = true;
      out.freq_peak_r1 = f;
      out.time_peak_r1 = t;
    }
  }
  auto time_ok = [&](double t) { return t >= 0.6 * tchi && t <= 1.2 * tchi; };
  out.two_peaks = out.peaks.size() == 2 && have0 && have1 && time_ok(out.time_peak_r0) &&
                  time_ok(out.time_peak_r1);
  return out;
}

ColumnObjective fidelity_objective(const Setup& s, std::uint64_t seed) {
  auto base = std::make_shared<ShotSimulator>(s.simulator());
  return [s, base, seed](double w, double e, const std::vector<double>& ts, int shots) {
    const auto col = column_probabilities(s, *base, w, e, ts, shots, seed);
    std::vector<double> out;
    out.reserve(col.size());
    for (const auto& [p0, p1] : col) out.push_back(p1 - p0);
    return out;
  };
}

OptimizeOptions default_optimize_options(const Setup& s) {
  OptimizeOptions o;
  const double w1 = dressed_resonator(s.device, 1);
  const double mhz = kTwoPi * 1e6;
  o.freq = {"freq", w1 - 5.0 * mhz, w1 + 3.0 * mhz, 33};
  o.amp = {"amp", 0.5 * *s.calib.arb_scale, 1.0 * *s.calib.arb_scale, 26};
  o.time = {"time", 60e-9, 200e-9, 71};
  return o;
}

// ---------------------------------------------------------------- Stark

double stark_photon_number(double shift, double two_chi) {
  if (!(two_chi > 0.0)) throw std::invalid_argument("Stark shift per photon must be positive");
  return shift == 0.0 ? 0.0 : -shift / two_chi;
}

std::vector<StarkPoint> stark_calibration(const Setup& s, const std::vector<double>& times) {
  std::vector<StarkPoint> out;
  if (times.empty()) return out;
  const double tmax = *std::max_element(times.begin(), times.end());
  DrivePulse d;
  d.omega_d = *s.calib.omega_d;
  d.amplitude = *s.calib.epsilon;
  d.t_d = std::max(tmax, kNs);
  SimulateOptions so;
  so.blowup_bound = 1e7;
  const auto tg = simulate_pointer(s.device, d, QubitState::g, s.device.kerr, d.t_d, so);
  const auto te = simulate_pointer(s.device, d, QubitState::e, s.device.kerr, d.t_d, so);
  const double two_chi = effective_two_chi(s.device);
  for (double t : times) {
    StarkPoint sp;
    sp.t = t;
    sp.shift_bright = -two_chi * te.n_bar_at(t);
    sp.shift_dark = -two_chi * tg.n_bar_at(t);
    sp.n_bright = stark_photon_number(sp.shift_bright, two_chi);
    sp.n_dark = stark_photon_number(sp.shift_dark, two_chi);
    out.push_back(sp);
  }
  return out;
}

// ---------------------------------------------------------------- excess population

ExcessEstimate excess_population_estimate(const Setup& s, const std::vector<double>& amplitudes,
                                          int n_shots, std::uint64_t seed, std::uint64_t block) {
  if (amplitudes.size() < 4) {
    throw FitError("ill-conditioned fit: excess estimate needs at least 4 amplitudes");
  }
  const auto base = s.simulator();
  ExcessEstimate out;
  out.amplitudes = amplitudes;
  const double t_d = *s.calib.t_d;
  SimulateOptions so;
  so.blowup_bound = 1e7;
  for (std::size_t k = 0; k < amplitudes.size(); ++k) {
    DrivePulse d;
    d.omega_d = *s.calib.omega_d;
    d.amplitude = amplitudes[k] * *s.calib.arb_scale;
    d.t_d = t_d;
    std::complex<double> ag = 0.0, ae = 0.0;
    if (d.amplitude > 0.0) {
      ag = simulate_pointer(s.device, d, QubitState::g, s.device.kerr, t_d, so).final_alpha();
      ae = simulate_pointer(s.device, d, QubitState::e, s.device.kerr, t_d, so).final_alpha();
    }
    const auto sim = base.with_pointers(ag, ae, t_d);
    if (n_shots == 0) {
      out.p_g.push_back(sim.expected_p1(0.0, s.errors));
      out.p_e.push_back(sim.expected_p1(kPi, s.errors));
      continue;
    }
    Rng r0(seed, stream_id(block, 2 * k)), r1(seed, stream_id(block, 2 * k + 1));
    long c0 = 0, c1 = 0;
    for (int i = 0; i < n_shots; ++i) {
      c0 += sim.run_shot(0.0, s.errors, r0).tunneled;
      c1 += sim.run_shot(kPi, s.errors, r1).tunneled;
    }
    out.p_g.push_back(static_cast<double>(c0) / n_shots);
    out.p_e.push_back(static_cast<double>(c1) / n_shots);
  }
  out.fit_g = linear_fit(amplitudes, out.p_g, 4);
  out.fit_e = linear_fit(amplitudes, out.p_e, 4);
  if (out.fit_e.slope == 0.0) throw FitError("ill-conditioned fit: zero |1> slope");
  const double ratio = out.fit_g.slope / out.fit_e.slope;
  out.estimate = ratio / (1.0 + ratio);
  return out;
}

// ---------------------------------------------------------------- reset

namespace {

double crossing_time(const std::vector<double>& t, const std::vector<double>& y, double level) {
  for (std::size_t i = 1; i < y.size(); ++i) {
    if (y[i] <= level) {
      if (!(y[i] > 0.0) || !(y[i - 1] > 0.0)) return t[i];
      const double f = std::log(y[i - 1] / level) / std::log(y[i - 1] / y[i]);
      return t[i - 1] + f * (t[i] - t[i - 1]);
    }
  }
  return INFINITY;
}

}  // namespace

ResetCurves reset_experiments(const DeviceParams& p, double n0, double p0,
                              double resonator_target, double qubit_target) {
  ResetCurves c;
  PointerTrajectory start;
  start.dt = kNs;
  start.kappa = p.kappa_r;
  start.alpha = {std::sqrt(std::max(0.0, n0))};
  const double extra = hybridized_decay_rate(p, true) - p.kappa_r;
  const auto active = ring_down(start, std::max(0.0, extra), 200e-9);
  const auto passive = ring_down(start, 0.0, 20e-6);
  const double gq = qubit_reset_decay_rate(p);
  for (std::size_t i = 0; i < active.alpha.size(); ++i) {
    const double t = i * kNs;
    c.times_active.push_back(t);
    c.resonator_active.push_back(active.n_bar(i));
    c.qubit_active.push_back(p0 * std::exp(-gq * t));
  }
  std::vector<double> tp, np;
  for (std::size_t i = 0; i < passive.alpha.size(); ++i) {
    tp.push_back(i * kNs);
    np.push_back(passive.n_bar(i));
    if (i % 10 == 0) {
      c.times_passive.push_back(i * kNs);
      c.resonator_passive.push_back(passive.n_bar(i));
      c.qubit_passive.push_back(p0 * std::exp(-(i * kNs) / p.T1_q));
    }
  }
  c.resonator_passive_1e = n0 > 0.0 ? crossing_time(tp, np, n0 / std::exp(1.0)) : 0.0;
  c.resonator_active_time = n0 > resonator_target
                                ? crossing_time(c.times_active, c.resonator_active, resonator_target)
                                : 0.0;
  c.qubit_active_time =
      p0 > qubit_target ? crossing_time(c.times_active, c.qubit_active, qubit_target) : 0.0;
  c.hybridized_decay_time = 1.0 / hybridized_decay_rate(p, true);
  c.qubit_reset_decay_time = 1.0 / gq;
  return c;
}

// ---------------------------------------------------------------- figure helpers

std::vector<PointerTrajectory> pointer_evolution(const Setup& s, double extra) {
  DrivePulse d;
  d.omega_d = *s.calib.omega_d;
  d.amplitude = *s.calib.epsilon;
  d.t_d = *s.calib.t_d;
  SimulateOptions so;
  so.blowup_bound = 1e7;
  return {simulate_pointer(s.device, d, QubitState::g, s.device.kerr, d.t_d + extra, so),
          simulate_pointer(s.device, d, QubitState::e, s.device.kerr, d.t_d + extra, so)};
}

std::vector<PhotodetectPoint> photodetect_sweep(const Setup& s, const std::vector<double>& times) {
  std::vector<PhotodetectPoint> out;
  for (double t : times) {
    Setup v = s;
    v.calib.photodetect_time = std::round(t / kNs) * kNs;
    const auto sim = v.simulator();
    PhotodetectPoint pt;
    pt.t = *v.calib.photodetect_time;
    pt.energy_fraction = transfer_fraction(s.device, pt.t);
    pt.p_g = sim.expected_p1(0.0, s.errors);
    pt.p_e = sim.expected_p1(kPi, s.errors);
    out.push_back(pt);
  }
  return out;
}

TunnelCalibration scurves(const Setup& s, int grid_points) {
  const auto sim = s.simulator();
  return tunnel_bias_calibrate(s.device, *s.calib.detect_flux, *s.calib.photodetect_time,
                               *s.calib.tunnel_duration, sim.n_bar(QubitState::g),
                               sim.n_bar(QubitState::e), grid_points);
}

}  // namespace jpmr
