#include "jpmr/mitigation.hpp"

#include <cmath>
#include <stdexcept>

#include "jpmr/jpm.hpp"
#include "jpmr/rng.hpp"
#include "jpmr/units.hpp"

namespace jpmr {

std::string mitigation_name(unsigned m) {
  if (m == kNoMitigation) return "none";
  if (m == kFullMitigation) return "full";
  std::string out;
  auto add = [&](const char* n) { out += (out.empty() ? "" : "+") + std::string(n); };
  if (m & kResonatorReset) add("resonator_reset");
  if (m & kHideBias) add("hide_bias");
  if (m & kQubitReset) add("qubit_reset");
  return out;
}

unsigned parse_mitigation(const std::string& s) {
  if (s == "none") return kNoMitigation;
  if (s == "full") return kFullMitigation;
  unsigned m = 0;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto next = s.find('+', pos);
    const auto tok = s.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    if (tok == "resonator_reset") {
      m |= kResonatorReset;
    } else if (tok == "hide_bias") {
      m |= kHideBias;
    } else if (tok == "qubit_reset") {
      m |= kQubitReset;
    } else {
      throw std::invalid_argument("unknown mitigation '" + tok + "'");
    }
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return m;
}

namespace {

struct Transient {
  double excess = 0.0;
  double photons = 0.0;
};

Transient transient(const Setup& s, unsigned mitigation, const BackactionModel& m, bool forced) {
  Transient t;
  t.excess = s.errors.excess_one_population;
  if (!forced) return t;
  if (mitigation & kQubitReset) {
    t.excess = s.errors.excess_one_population + m.qubit_reset_residual;
  } else {
    t.excess = (mitigation & kHideBias) ? m.qubit_excitation_hidden : m.qubit_excitation;
  }
  t.photons = m.background_photons;
  if (mitigation & kResonatorReset) {
    t.photons *= std::exp(-hybridized_decay_rate(s.device, true) * m.resonator_reset_time);
  }
  return t;
}

// Average over an exponentially distributed photon number with uniform phase.
double averaged_p1(const ShotSimulator& sim, double angle, const ErrorModel& em, double photons) {
  if (!(photons > 0.0)) return sim.expected_p1(angle, em);
  constexpr int kN = 48, kPhases = 16;
  double acc = 0.0;
  for (int i = 0; i < kN; ++i) {
    const double u = (i + 0.5) / kN;
    const double r = std::sqrt(-photons * std::log1p(-u));
    for (int j = 0; j < kPhases; ++j) {
      const double th = kTwoPi * (j + 0.5) / kPhases;
      acc += sim.expected_p1(angle, em, std::polar(r, th));
    }
  }
  return acc / (kN * kPhases);
}

template <class F>
double bisect(F f, double lo, double hi, double target, bool log_scale = false) {
  // f increasing in x unless sign flips; handles either orientation.
  const bool inc = f(hi) > f(lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = log_scale ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    if ((f(mid) < target) == inc) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (std::abs(hi - lo) <= 1e-12 * std::max(1.0, std::abs(hi))) break;
  }
  return log_scale ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
}

}  // namespace

BackactionResult backaction_expectation(const Setup& s, unsigned mitigation,
                                        const BackactionModel& m, bool forced_tunnel) {
  const auto sim = s.simulator();
  const auto tr = transient(s, mitigation, m, forced_tunnel);
  ErrorModel em = s.errors;
  em.excess_one_population = tr.excess;
  BackactionResult r;
  r.mitigation = mitigation;
  r.forced_tunnel = forced_tunnel;
  r.angles = {0.0, kPi};
  r.p_tunnel = {averaged_p1(sim, 0.0, em, tr.photons), averaged_p1(sim, kPi, em, tr.photons)};
  r.visibility = r.p_tunnel[1] - r.p_tunnel[0];
  r.mean_tunneling = 0.5 * (r.p_tunnel[0] + r.p_tunnel[1]);
  r.F = r.visibility;
  r.excess_population = tr.excess;
  r.background_photons = tr.photons;
  return r;
}

BackactionModel calibrate_backaction(const Setup& s, const BackactionTargets& t) {
  BackactionModel m;
  auto vis = [&](unsigned mit, BackactionModel trial) {
    return backaction_expectation(s, mit, trial, true).visibility;
  };
  m.qubit_excitation = bisect(
      [&](double q) {
        auto x = m;
        x.qubit_excitation = q;
        return vis(kResonatorReset, x);
      },
      0.0, 0.5, t.visibility_reset_only);
  m.qubit_excitation_hidden = bisect(
      [&](double q) {
        auto x = m;
        x.qubit_excitation_hidden = q;
        return vis(kResonatorReset | kHideBias, x);
      },
      0.0, 0.5, t.visibility_hidden);
  const double baseline = backaction_expectation(s, kNoMitigation, m, false).F;
  m.qubit_reset_residual = bisect(
      [&](double r) {
        auto x = m;
        x.qubit_reset_residual = r;
        return baseline - vis(kFullMitigation, x);
      },
      0.0, 0.1, t.fidelity_deficit_full);
  m.background_photons = bisect(
      [&](double n) {
        auto x = m;
        x.background_photons = n;
        return backaction_expectation(s, kNoMitigation, x, true).mean_tunneling;
      },
      1e-4, 1e3, t.mean_tunneling_none, true);
  return m;
}

BackactionResult backaction_experiment(const Setup& s, unsigned mitigation,
                                       const BackactionModel& m, int n_shots, std::uint64_t seed,
                                       bool forced_tunnel, int angle_points) {
  const auto sim = s.simulator();
  const auto tr = transient(s, mitigation, m, forced_tunnel);
  ErrorModel em = s.errors;
  em.excess_one_population = tr.excess;
  BackactionResult r;
  r.mitigation = mitigation;
  r.forced_tunnel = forced_tunnel;
  r.excess_population = tr.excess;
  r.background_photons = tr.photons;
  const int np = std::max(2, angle_points);
  for (int k = 0; k < np; ++k) {
    const double a = kTwoPi * k / (np - 1);
    Rng rng(seed, stream_id(7000 + mitigation + (forced_tunnel ? 0 : 64), k));
    long c = 0;
    for (int i = 0; i < n_shots; ++i) {
      std::complex<double> b = 0.0;
      if (tr.photons > 0.0) {
        const double n = rng.exponential(tr.photons);
        b = std::polar(std::sqrt(n), kTwoPi * rng.uniform());
      }
      c += sim.run_shot(a, em, rng, b).outcome;
    }
    r.angles.push_back(a);
    r.p_tunnel.push_back(n_shots ? static_cast<double>(c) / n_shots : 0.0);
  }
  std::size_t i0 = 0, ipi = 0;
  for (std::size_t k = 0; k < r.angles.size(); ++k) {
    if (std::abs(r.angles[k] - kPi) < std::abs(r.angles[ipi] - kPi)) ipi = k;
  }
  r.visibility = r.p_tunnel[ipi] - r.p_tunnel[i0];
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < r.p_tunnel.size(); ++k) sum += r.p_tunnel[k];
  r.mean_tunneling = sum / (r.p_tunnel.size() - 1);
  r.F = r.visibility;
  return r;
}

// ---------------------------------------------------------------- crosstalk

CrosstalkModel calibrate_crosstalk(double residual_photons, double factor, double echo_time) {
  if (!(factor > 1.0)) throw std::invalid_argument("dephasing factor must exceed 1");
  if (!(residual_photons > 0.0)) throw std::invalid_argument("residual photons must be positive");
  CrosstalkModel m;
  m.echo_time = echo_time;
  m.residual_photons = residual_photons;
  m.photon_scale = residual_photons / (factor - 1.0);
  return m;
}

CrosstalkResult crosstalk_spin_echo(const DeviceParams& p, bool with_reset,
                                    const CrosstalkModel& m, int n_shots, std::uint64_t seed,
                                    int points) {
  CrosstalkResult r;
  r.with_reset = with_reset;
  r.photons_at_echo = m.residual_photons;
  if (with_reset) r.photons_at_echo *= std::exp(-hybridized_decay_rate(p, true) * m.reset_time);
  const double t_quiet = m.echo_time;
  const double t_dist = m.echo_time / (1.0 + r.photons_at_echo / m.photon_scale);
  const double t_max = 2.5 * t_quiet;
  for (int i = 0; i < points; ++i) {
    const double t = t_max * i / (points - 1);
    r.times.push_back(t);
    const double pq = 0.5 * (1.0 + std::exp(-(t / t_quiet) * (t / t_quiet)));
    const double pd = 0.5 * (1.0 + std::exp(-(t / t_dist) * (t / t_dist)));
    Rng rq(seed, stream_id(8000 + (with_reset ? 1 : 0), 2 * i));
    Rng rd(seed, stream_id(8000 + (with_reset ? 1 : 0), 2 * i + 1));
    long cq = 0, cd = 0;
    for (int k = 0; k < n_shots; ++k) {
      cq += rq.bernoulli(pq);
      cd += rd.bernoulli(pd);
    }
    r.echo_quiet.push_back(n_shots ? static_cast<double>(cq) / n_shots : pq);
    r.echo_disturbed.push_back(n_shots ? static_cast<double>(cd) / n_shots : pd);
  }
  r.fit_time_quiet = fit_gaussian_decay(r.times, r.echo_quiet, 0.02 * t_quiet, 20 * t_quiet).theta;
  r.fit_time_disturbed =
      fit_gaussian_decay(r.times, r.echo_disturbed, 0.02 * t_quiet, 20 * t_quiet).theta;
  r.ratio = r.fit_time_quiet / r.fit_time_disturbed;
  return r;
}

// ---------------------------------------------------------------- repetition rate

std::vector<double> default_repetition_intervals() {
  return {1e-6, 2e-6, 3e-6, 5e-6, 7e-6, 10e-6, 15e-6, 20e-6, 30e-6, 40e-6, 60e-6, 100e-6};
}

RepetitionResult repetition_rate_sweep(const Setup& s, const std::vector<double>& intervals,
                                       int n_shots, std::uint64_t seed) {
  RepetitionResult r;
  r.swap_mapping = s.shot.swap_mapping;
  const auto sim = s.simulator();
  std::vector<double> x, bright, dark;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    ErrorModel em = s.errors;
    em.rep_interval = intervals[i];
    RepetitionPoint pt;
    pt.interval = intervals[i];
    if (n_shots <= 0) {
      pt.p1_given_0 = sim.expected_p1(0.0, em);
      pt.p1_given_1 = sim.expected_p1(kPi, em);
    } else {
      const auto f = sample_fidelity(sim, em, n_shots, seed, 9000 + i);
      pt.p1_given_0 = f.p1_given_0;
      pt.p1_given_1 = f.p1_given_1;
    }
    pt.F = pt.p1_given_1 - pt.p1_given_0;
    r.points.push_back(pt);
    x.push_back(pt.interval);
    // Bright pointer success: tunneling recorded as the bright state's outcome.
    bright.push_back(r.swap_mapping ? 1.0 - pt.p1_given_0 : pt.p1_given_1);
    dark.push_back(r.swap_mapping ? pt.p1_given_1 : 1.0 - pt.p1_given_0);
  }
  if (x.size() >= 3) r.bright_fit = fit_exponential_recovery(x, bright, 1e-7, 1e-3);
  if (!x.empty()) {
    std::size_t lo = 0, hi = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] < x[lo]) lo = i;
      if (x[i] > x[hi]) hi = i;
    }
    r.bright_deficit = bright[hi] - bright[lo];
    r.dark_deficit = dark[hi] - dark[lo];
  }
  return r;
}

}  // namespace jpmr
