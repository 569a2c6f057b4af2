#include "jpmr/shot.hpp"

#include <cmath>

#include "jpmr/units.hpp"

namespace jpmr {

namespace {

// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = 0.5 * (1.0 - z);
    w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
  }
}

double poisson_pmf(int k, double mu) {
  if (mu <= 0.0) return k == 0 ? 1.0 : 0.0;
  return std::exp(-mu + k * std::log(mu) - std::lgamma(k + 1.0));
}

}  // namespace

ErrorModel ErrorModel::noiseless() {
  ErrorModel e;
  e.excess_one_population = 0.0;
  e.gate_error = 0.0;
  e.qubit_relaxation = false;
  e.ideal_detector = true;
  return e;
}

ErrorModel ErrorModel::detector_only() {
  ErrorModel e = noiseless();
  e.ideal_detector = false;
  return e;
}

std::vector<double> escape_table(const JpmPotential& pulse, double duration) {
  std::vector<double> t;
  for (int k = 0; k < 100000; ++k) {
    const double pk = escape_probability(pulse, static_cast<double>(k), duration);
    t.push_back(pk);
    if (pk >= 1.0) break;
  }
  return t;
}

double poisson_tunnel_probability(const std::vector<double>& table, double mu) {
  if (table.empty()) return 0.0;
  double acc = 0.0, mass = 0.0;
  for (std::size_t k = 0; k + 1 < table.size(); ++k) {
    const double pk = poisson_pmf(static_cast<int>(k), mu);
    acc += pk * table[k];
    mass += pk;
  }
  return acc + std::max(0.0, 1.0 - mass) * table.back();
}

ShotSimulator::ShotSimulator(const DeviceParams& p, const PulseSchedule& schedule,
                             const ShotOptions& opt)
    : p_(p), opt_(opt) {
  validate_schedule(schedule);
  if (const auto* g = schedule.find(SegmentKind::qubit_gate)) gate_angle_ = g->angle;
  const auto* drive = schedule.find(SegmentKind::pointer_drive);
  const auto* pd = schedule.find(SegmentKind::photodetect);
  const auto* tb = schedule.find(SegmentKind::tunnel_bias);
  if (!drive || !pd || !tb) {
    throw ScheduleError("schedule needs pointer_drive, photodetect and tunnel_bias segments");
  }
  t_d_ = static_cast<double>(drive->duration_ns) * kNs;
  if (drive->epsilon > 0.0 && drive->duration_ns > 0) {
    DrivePulse d;
    d.omega_d = drive->omega_d;
    d.amplitude = drive->epsilon;
    d.t_d = t_d_;
    SimulateOptions so;
    so.blowup_bound = 1e7;
    set_pointers(simulate_pointer(p, d, QubitState::g, p.kerr, t_d_, so).final_alpha(),
                 simulate_pointer(p, d, QubitState::e, p.kerr, t_d_, so).final_alpha());
  }
  detect_ = potential_landscape(p, pd->flux);
  pulse_ = potential_landscape(p, tb->flux);
  transfer_ = transfer_fraction(p, static_cast<double>(pd->duration_ns) * kNs);
  escape_ = ::jpmr::escape_table(pulse_, static_cast<double>(tb->duration_ns) * kNs);
  const auto* relax = schedule.find(SegmentKind::relax);
  retrap_ = retrap_probability(p, relax ? static_cast<double>(relax->duration_ns) * kNs : 0.0,
                               opt.retrap_base);
  const auto* ro = schedule.find(SegmentKind::jpm_readout);
  readout_time_ = ro ? static_cast<double>(ro->duration_ns) * kNs : opt.iq.t_ref;
  iq_error_ = iq_misassignment(effective_snr(opt.iq, readout_time_));
}

void ShotSimulator::set_pointers(std::complex<double> alpha_g, std::complex<double> alpha_e) {
  alpha_g_ = opt_.swap_mapping ? alpha_e : alpha_g;
  alpha_e_ = opt_.swap_mapping ? alpha_g : alpha_e;
  threshold_ = 0.5 * (std::abs(alpha_g_) + std::abs(alpha_e_));
}

ShotSimulator ShotSimulator::with_pointers(std::complex<double> alpha_g,
                                           std::complex<double> alpha_e, double t_d) const {
  ShotSimulator s = *this;
  s.t_d_ = t_d;
  s.set_pointers(alpha_g, alpha_e);
  return s;
}

int ShotSimulator::map_outcome(bool right) const {
  return opt_.swap_mapping ? (right ? 0 : 1) : (right ? 1 : 0);
}

double ShotSimulator::tunneled_given_quanta(int k) const {
  if (k < 0) return 0.0;
  const auto i = static_cast<std::size_t>(k);
  return i < escape_.size() ? escape_[i] : escape_.back();
}

double ShotSimulator::outcome1_given_photons(double n_bar, const ErrorModel& em) const {
  return outcome1_given_alpha(std::sqrt(std::max(0.0, n_bar)), em);
}

double ShotSimulator::outcome1_given_alpha(std::complex<double> a, const ErrorModel& em) const {
  if (em.ideal_detector) {
    const bool right = std::abs(a) > threshold_;
    return map_outcome(right) == 1 ? 1.0 : 0.0;
  }
  double blind = 0.0;
  if (std::isfinite(em.rep_interval)) {
    blind = em.rep_detector_deficit * std::exp(-em.rep_interval / em.rep_rate_recovery_tau);
  }
  const double mu = std::norm(a) * transfer_;
  const double p_tunnel = (1.0 - blind) * poisson_tunnel_probability(escape_, mu) +
                          blind * tunneled_given_quanta(0);
  const double p_stay = p_tunnel * (1.0 - retrap_);
  const double p_right = p_stay * (1.0 - iq_error_) + (1.0 - p_stay) * iq_error_;
  return opt_.swap_mapping ? 1.0 - p_right : p_right;
}

double ShotSimulator::expected_p1(double angle, const ErrorModel& em,
                                  std::complex<double> background) const {
  double p1 = em.excess_one_population;
  if (angle != 0.0) {
    const double c = std::cos(0.5 * angle), s = std::sin(0.5 * angle);
    p1 = p1 * c * c + (1.0 - p1) * s * s;
    p1 = p1 * (1.0 - em.gate_error) + (1.0 - p1) * em.gate_error;
  }
  if (std::isfinite(em.rep_interval)) {
    p1 *= 1.0 - em.rep_qubit_deficit * std::exp(-em.rep_interval / em.rep_qubit_tau);
  }
  const double p_dec = em.qubit_relaxation ? -std::expm1(-t_d_ / em.T1_q) : 0.0;
  const auto ag = alpha_g_ + background, ae = alpha_e_ + background;
  const double r_g = outcome1_given_alpha(ag, em);
  const double r_e = outcome1_given_alpha(ae, em);
  double r_dec = 0.0;
  if (p_dec > 0.0) {
    if (em.ideal_detector) {
      const int n = 4096;
      for (int i = 0; i < n; ++i) {
        const double u = (i + 0.5) / n;
        r_dec += outcome1_given_alpha(ae * u + ag * (1.0 - u), em) / n;
      }
    } else {
      std::vector<double> x, w;
      gauss_legendre(opt_.t1_quadrature, x, w);
      for (std::size_t i = 0; i < x.size(); ++i) {
        r_dec += w[i] * outcome1_given_alpha(ae * x[i] + ag * (1.0 - x[i]), em);
      }
    }
  }
  return (1.0 - p1) * r_g + p1 * ((1.0 - p_dec) * r_e + p_dec * r_dec);
}

ShotRecord ShotSimulator::run_shot(const ErrorModel& em, Rng& rng) const {
  return run_shot(gate_angle_, em, rng);
}

ShotRecord ShotSimulator::run_shot(double angle, const ErrorModel& em, Rng& rng,
                                   std::complex<double> background) const {
  ShotRecord rec;
  // Fixed draw order so that runs with different error parameters share
  // random numbers shot by shot.
  const double u_init = rng.uniform();
  const double u_rot = rng.uniform();
  const double u_gate = rng.uniform();
  const double u_rep = rng.uniform();
  const double u_decay = rng.uniform();
  const double u_tau = rng.uniform();

  int level = 0;
  if (u_init < em.excess_one_population) {
    level = 1;
    rec.init_error = true;
  }
  if (angle != 0.0) {
    const double s = std::sin(0.5 * angle);
    if (u_rot < s * s) level ^= 1;
    if (u_gate < em.gate_error) {
      level ^= 1;
      rec.gate_error = true;
    }
  }
  rec.prepared_level = level;
  std::complex<double> a = level ? alpha_e_ : alpha_g_;
  if (level == 1 && std::isfinite(em.rep_interval) &&
      u_rep < em.rep_qubit_deficit * std::exp(-em.rep_interval / em.rep_qubit_tau)) {
    rec.decayed = true;
    rec.decay_fraction = 0.0;
    a = alpha_g_;
  } else if (level == 1 && em.qubit_relaxation && u_decay < -std::expm1(-t_d_ / em.T1_q)) {
    rec.decayed = true;
    rec.decay_fraction = u_tau;
    a = alpha_e_ * u_tau + alpha_g_ * (1.0 - u_tau);
  }
  a += background;
  rec.n_bar = std::norm(a);

  if (em.ideal_detector) {
    rec.tunneled = std::abs(a) > threshold_;
    rec.outcome = map_outcome(rec.tunneled);
    return rec;
  }
  bool blind = false;
  if (std::isfinite(em.rep_interval)) {
    blind = rng.bernoulli(em.rep_detector_deficit *
                          std::exp(-em.rep_interval / em.rep_rate_recovery_tau));
  }
  rec.quanta = blind ? 0 : rng.poisson(rec.n_bar * transfer_);
  rec.tunneled = rng.bernoulli(tunneled_given_quanta(rec.quanta));
  Well well = rec.tunneled ? Well::right : Well::left;
  if (rec.tunneled && rng.bernoulli(retrap_)) {
    rec.retrapped = true;
    well = Well::left;
  }
  const auto [pt, inferred] = readout_iq(well, readout_time_, opt_.iq, rng);
  (void)pt;
  rec.iq_error = inferred != well;
  rec.outcome = map_outcome(inferred == Well::right);
  return rec;
}

}  // namespace jpmr
