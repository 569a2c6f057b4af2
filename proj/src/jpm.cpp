#include "jpmr/jpm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "jpmr/units.hpp"

namespace jpmr {

namespace {

constexpr double kEscapeExponent = 7.2;
// Below this barrier (in level spacings) the particle is treated as free.
constexpr double kOverBarrierQuanta = 0.05;

struct Stationary {
  double phase;
  bool minimum;
};

double dU(double el, double ej, double phx, double phi) {
  return el * (phi - phx) + ej * std::sin(phi);
}

double polish_root(double el, double ej, double phx, double a, double b) {
  double fa = dU(el, ej, phx, a);
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (a + b);
    const double fm = dU(el, ej, phx, m);
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
    if (b - a < 1e-15 * std::max(1.0, std::abs(m))) break;
  }
  double x = 0.5 * (a + b);
  for (int i = 0; i < 4; ++i) {
    const double d2 = el + ej * std::cos(x);
    if (d2 == 0.0) break;
    const double step = dU(el, ej, phx, x) / d2;
    if (!(std::abs(step) < 1e-6)) break;
    x -= step;
  }
  return x;
}

std::vector<Stationary> stationary_points(double el, double ej, double phx) {
  const double beta = ej / el;
  const double lo = phx - beta - 2.0;
  const double hi = phx + beta + 2.0;
  const int n = static_cast<int>(std::ceil((hi - lo) / 2e-3));
  const double h = (hi - lo) / n;
  std::vector<Stationary> out;
  double x0 = lo;
  double f0 = dU(el, ej, phx, x0);
  for (int i = 1; i <= n; ++i) {
    const double x1 = lo + h * i;
    const double f1 = dU(el, ej, phx, x1);
    if (f1 == 0.0 || (f0 != 0.0 && (f0 < 0.0) != (f1 < 0.0))) {
      const double r = f1 == 0.0 ? x1 : polish_root(el, ej, phx, x0, x1);
      const double d2 = el + ej * std::cos(r);
      out.push_back({r, d2 > 0.0});
    }
    x0 = x1;
    f0 = f1;
  }
  return out;
}

}  // namespace

double JpmPotential::barrier_quanta() const {
  if (!has_left_well || omega_p_left <= 0.0) return 0.0;
  return barrier_height / (kHbar * omega_p_left);
}

double josephson_energy(const DeviceParams& p) { return p.I0_j * kReducedPhi0; }
double inductive_energy(const DeviceParams& p) { return kReducedPhi0 * kReducedPhi0 / p.L_j; }

double potential_energy(const DeviceParams& p, double phi_ext, double phase) {
  const double d = phase - kTwoPi * phi_ext;
  return 0.5 * inductive_energy(p) * d * d - josephson_energy(p) * std::cos(phase);
}

double plasma_frequency(const DeviceParams& p, double phase) {
  const double curv = inductive_energy(p) + josephson_energy(p) * std::cos(phase);
  if (curv <= 0.0) return 0.0;
  return std::sqrt(curv / (p.C_j * kReducedPhi0 * kReducedPhi0));
}

JpmPotential potential_landscape(const DeviceParams& p, double phi_ext, bool require_two_wells) {
  const double el = inductive_energy(p);
  const double ej = josephson_energy(p);
  const double phx = kTwoPi * phi_ext;
  JpmPotential out;
  out.beta_L = ej / el;
  out.phi_ext = phi_ext;
  for (const auto& s : stationary_points(el, ej, phx)) {
    if (s.minimum) {
      out.well_minima.push_back(
          {s.phase, potential_energy(p, phi_ext, s.phase), plasma_frequency(p, s.phase)});
    } else {
      out.maxima.push_back(s.phase);
    }
  }
  if (require_two_wells && out.well_minima.size() < 2) {
    throw NoDoubleWellError("flux bias is outside the double-well window");
  }
  const WellMinimum* left = nullptr;
  for (const auto& m : out.well_minima) {
    if (std::abs(m.phase) < kPi && (!left || std::abs(m.phase) < std::abs(left->phase))) {
      left = &m;
    }
  }
  if (!left) return out;
  out.has_left_well = true;
  out.left_phase = left->phase;
  out.omega_p_left = left->omega_p;
  auto it = std::find_if(out.maxima.begin(), out.maxima.end(),
                         [&](double x) { return x > left->phase; });
  if (it != out.maxima.end()) {
    out.barrier_phase = *it;
    out.barrier_height = std::max(0.0, potential_energy(p, phi_ext, *it) - left->energy);
  }
  out.n_bound_left = static_cast<int>(std::floor(out.barrier_quanta()));
  return out;
}

FluxWindow bistable_window(const DeviceParams& p) {
  auto count = [&](double f) { return potential_landscape(p, f).well_minima.size(); };
  if (count(0.5) != 2) throw NoDoubleWellError("no double well at half flux quantum");
  auto edge = [&](double dir) {
    double inside = 0.5;
    double step = 1e-2;
    double outside = inside;
    while (true) {
      outside = inside + dir * step;
      if (std::abs(outside - 0.5) > 0.5) return inside;
      if (count(outside) != 2) break;
      inside = outside;
    }
    for (int i = 0; i < 40; ++i) {
      const double m = 0.5 * (inside + outside);
      if (count(m) == 2) inside = m;
      else outside = m;
    }
    return inside;
  };
  return {edge(-1.0), edge(1.0)};
}

double critical_flux(const DeviceParams& p) {
  double a = 0.5, b = 1.5;
  if (!potential_landscape(p, a).has_left_well) {
    throw NoDoubleWellError("left well absent at half flux quantum");
  }
  auto present = [&](double f) {
    const auto L = potential_landscape(p, f);
    return L.has_left_well && L.barrier_height > 0.0;
  };
  for (int i = 0; i < 60; ++i) {
    const double m = 0.5 * (a + b);
    if (present(m)) a = m;
    else b = m;
  }
  return a;
}

double resonance_flux(const DeviceParams& p, double omega) {
  double a = 0.5;
  double b = critical_flux(p);
  const double wa = potential_landscape(p, a).omega_p_left;
  if (omega > wa) throw std::domain_error("frequency above the left-well tuning range");
  for (int i = 0; i < 200 && b - a > 1e-15; ++i) {
    const double m = 0.5 * (a + b);
    const auto L = potential_landscape(p, m);
    if (L.has_left_well && L.omega_p_left > omega) a = m;
    else b = m;
  }
  return 0.5 * (a + b);
}

PlasmaRange plasma_frequency_range(const DeviceParams& p, int samples) {
  PlasmaRange r;
  const double fc = critical_flux(p);
  r.omega_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= samples; ++i) {
    const double f = fc * static_cast<double>(i) / samples;
    const auto L = potential_landscape(p, f);
    if (!L.has_left_well || L.n_bound_left < 1) continue;
    r.samples.emplace_back(f, L.omega_p_left);
    if (L.omega_p_left > r.omega_max) {
      r.omega_max = L.omega_p_left;
      r.flux_at_max = f;
    }
    if (L.omega_p_left < r.omega_min) {
      r.omega_min = L.omega_p_left;
      r.flux_at_min = f;
    }
  }
  return r;
}

double transfer_fraction(const DeviceParams& p, double t) {
  const double s = std::sin(p.g_jr * t);
  return s * s * std::exp(-t / p.T1_j);
}

double photodetect(const DeviceParams& p, const JpmPotential& landscape, double n_bar, double t) {
  if (t <= 0.0 || n_bar <= 0.0) return 0.0;
  return kHbar * landscape.omega_p_left * n_bar * transfer_fraction(p, t);
}

double photodetect_optimum(const DeviceParams& p) {
  double a = 0.0, b = kPi / (2.0 * p.g_jr);
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a), d = a + r * (b - a);
  for (int i = 0; i < 200; ++i) {
    if (transfer_fraction(p, c) > transfer_fraction(p, d)) b = d;
    else a = c;
    c = b - r * (b - a);
    d = a + r * (b - a);
  }
  return 0.5 * (a + b);
}

double escape_rate(const JpmPotential& pulse, double excitation_quanta) {
  if (!pulse.has_left_well) return std::numeric_limits<double>::infinity();
  const double n_eff = pulse.barrier_quanta() - std::max(0.0, excitation_quanta);
  if (n_eff <= kOverBarrierQuanta) return std::numeric_limits<double>::infinity();
  return pulse.omega_p_left / kTwoPi * std::exp(-kEscapeExponent * n_eff);
}

double escape_probability(const JpmPotential& pulse, double excitation_quanta, double duration) {
  if (duration <= 0.0) return 0.0;
  const double g = escape_rate(pulse, excitation_quanta);
  if (std::isinf(g)) return 1.0;
  return -std::expm1(-g * duration);
}

double escape_probability(const JpmPotential& pulse, const JpmPotential& detect,
                          const JpmShotState& state, double duration) {
  if (state.well != Well::left) throw std::invalid_argument("escape requires the left well");
  const double quanta = detect.omega_p_left > 0.0
                            ? state.excitation / (kHbar * detect.omega_p_left)
                            : 0.0;
  return escape_probability(pulse, quanta, duration);
}

double retrap_probability(const DeviceParams& p, double hold_time, double base) {
  return base * std::exp(-std::max(0.0, hold_time) / p.T1_j);
}

JpmShotState relax_after_tunnel(const DeviceParams& p, const JpmShotState& state,
                                double hold_time, Rng& rng, double base) {
  if (state.well != Well::right) {
    throw std::invalid_argument("relax_after_tunnel expects a tunneled (right-well) state");
  }
  JpmShotState out = state;
  if (rng.bernoulli(retrap_probability(p, hold_time, base))) {
    out.well = Well::left;
    out.excitation = 0.0;
  }
  return out;
}

double effective_snr(const IqConfig& cfg, double readout_time) {
  return cfg.snr_ref * std::sqrt(std::max(0.0, readout_time) / cfg.t_ref);
}

double iq_misassignment(double snr) { return 0.5 * std::erfc(snr / (2.0 * std::sqrt(2.0))); }

Well classify_iq(const IqPoint& x, const IqPoint& c_left, const IqPoint& c_right) {
  const double dl = (x.i - c_left.i) * (x.i - c_left.i) + (x.q - c_left.q) * (x.q - c_left.q);
  const double dr =
      (x.i - c_right.i) * (x.i - c_right.i) + (x.q - c_right.q) * (x.q - c_right.q);
  return dr < dl ? Well::right : Well::left;
}

std::pair<IqPoint, Well> readout_iq(Well well, double readout_time, const IqConfig& cfg,
                                    Rng& rng) {
  const double s = effective_snr(cfg, readout_time);
  if (!(s > 0.0)) throw std::invalid_argument("readout snr must be positive");
  const double c = std::cos(cfg.rotation), sn = std::sin(cfg.rotation);
  const IqPoint left{-0.5 * s * c, -0.5 * s * sn};
  const IqPoint right{0.5 * s * c, 0.5 * s * sn};
  const IqPoint& centre = well == Well::left ? left : right;
  IqPoint x{centre.i + rng.normal(), centre.q + rng.normal()};
  return {x, classify_iq(x, left, right)};
}

double hybridized_decay_rate(const DeviceParams& p, bool on_resonance) {
  if (!on_resonance) return p.kappa_r;
  return 0.5 * (p.kappa_r + 1.0 / p.T1_j);
}

double qubit_reset_decay_rate(const DeviceParams& p) {
  return (1.0 / p.T1_q + p.kappa_r + 1.0 / p.T1_j) / 3.0;
}

void write_landscape_csv(std::ostream& os, const DeviceParams& p, double phi_ext,
                         double phase_lo, double phase_hi, int points) {
  os << "phi,U_J\n";
  char buf[96];
  for (int i = 0; i < points; ++i) {
    const double x = phase_lo + (phase_hi - phase_lo) * i / std::max(1, points - 1);
    std::snprintf(buf, sizeof buf, "%.10g,%.12g\n", x, potential_energy(p, phi_ext, x));
    os << buf;
  }
}

}  // namespace jpmr
