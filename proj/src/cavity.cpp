#include "jpmr/cavity.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "jpmr/units.hpp"

namespace jpmr {

namespace {

using cd = std::complex<double>;

double drive_envelope(const DrivePulse& d, double t) {
  if (t < 0.0 || t >= d.t_d) return 0.0;
  if (d.envelope == Envelope::rectangular || d.ramp <= 0.0) return 1.0;
  const double r = std::min(d.ramp, d.t_d / 2.0);
  if (t < r) return 0.5 * (1.0 - std::cos(kPi * t / r));
  if (t > d.t_d - r) return 0.5 * (1.0 - std::cos(kPi * (d.t_d - t) / r));
  return 1.0;
}

struct Rhs {
  double delta, kerr, kappa;
  const DrivePulse* drive;
  // On the open interval (t0, t1) the drive is either on or off; the flag
  // pins it so stage evaluations at t_d do not flip it.
  cd operator()(double t, cd a, bool on) const {
    const double env = on ? drive_envelope(*drive, std::min(t, drive->t_d * (1.0 - 1e-15))) : 0.0;
    return cd(0.0, -1.0) * (delta + kerr * std::norm(a)) * a - 0.5 * kappa * a -
           cd(0.0, 1.0) * (drive->amplitude * env);
  }
};

cd rk4_span(const Rhs& f, cd a, double t0, double t1, int m, bool on) {
  const double h = (t1 - t0) / m;
  double t = t0;
  for (int i = 0; i < m; ++i) {
    const cd k1 = f(t, a, on);
    const cd k2 = f(t + 0.5 * h, a + 0.5 * h * k1, on);
    const cd k3 = f(t + 0.5 * h, a + 0.5 * h * k2, on);
    const cd k4 = f(t + h, a + h * k3, on);
    a += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t = t0 + (i + 1) * h;
  }
  return a;
}

std::vector<cd> run(const Rhs& f, const DrivePulse& d, std::size_t n_out, double dt, int m,
                    cd a0, double bound) {
  std::vector<cd> out;
  out.reserve(n_out + 1);
  cd a = a0;
  out.push_back(a);
  for (std::size_t i = 0; i < n_out; ++i) {
    const double t0 = dt * static_cast<double>(i);
    const double t1 = dt * static_cast<double>(i + 1);
    const bool any_drive = d.amplitude != 0.0;
    if (any_drive && d.t_d > t0 && d.t_d < t1 && std::abs(d.t_d - t1) > 1e-6 * dt) {
      const int m1 = std::max(1, static_cast<int>(std::lround(m * (d.t_d - t0) / dt)));
      const int m2 = std::max(1, m - m1);
      a = rk4_span(f, a, t0, d.t_d, m1, true);
      a = rk4_span(f, a, d.t_d, t1, m2, false);
    } else {
      const bool on = any_drive && t0 < d.t_d - 1e-6 * dt;
      a = rk4_span(f, a, t0, t1, m, on);
    }
    if (!(std::norm(a) <= bound)) {
      throw IntegrationError("cavity amplitude exceeded the blow-up bound");
    }
    out.push_back(a);
  }
  return out;
}

}  // namespace

const char* to_string(QubitState s) { return s == QubitState::g ? "g" : "e"; }

double PointerTrajectory::n_bar_at(double t) const {
  const double x = t / dt;
  const auto i = static_cast<std::size_t>(std::floor(x));
  if (i + 1 >= alpha.size()) return std::norm(alpha.back());
  const double w = x - static_cast<double>(i);
  return std::norm((1.0 - w) * alpha[i] + w * alpha[i + 1]);
}

double cavity_detuning(const DeviceParams& p, double omega_d, QubitState s) {
  return dressed_resonator(p, s == QubitState::g ? 0 : 1) - omega_d;
}

PointerTrajectory integrate_cavity(double delta, double kerr, double kappa, const DrivePulse& d,
                                   double horizon, const SimulateOptions& opt,
                                   double blowup_bound) {
  if (!(d.amplitude >= 0.0)) throw std::invalid_argument("drive amplitude must be >= 0");
  if (!(d.t_d > 0.0)) throw std::invalid_argument("drive time must be > 0");
  const double steps = horizon / opt.output_dt;
  const auto n_out = static_cast<std::size_t>(std::llround(steps));
  if (std::abs(steps - static_cast<double>(n_out)) > 1e-6 || horizon < 0.0) {
    throw std::invalid_argument("horizon must be a multiple of the output step");
  }
  Rhs f{delta, kerr, kappa, &d};
  int m = std::max(1, opt.initial_substeps);
  auto coarse = run(f, d, n_out, opt.output_dt, m, opt.alpha0, blowup_bound);
  while (true) {
    if (2 * m > opt.max_substeps) {
      throw IntegrationError("substep refinement did not converge");
    }
    auto fine = run(f, d, n_out, opt.output_dt, 2 * m, opt.alpha0, blowup_bound);
    const double change = std::abs(std::abs(fine.back()) - std::abs(coarse.back()));
    coarse = std::move(fine);
    m *= 2;
    if (change < opt.convergence_tol) break;
  }
  PointerTrajectory tr;
  tr.dt = opt.output_dt;
  tr.alpha = std::move(coarse);
  tr.kappa = kappa;
  return tr;
}

PointerTrajectory simulate_pointer(const DeviceParams& p, const DrivePulse& d, QubitState s,
                                   double kerr, double horizon, const SimulateOptions& opt) {
  const double bound = opt.blowup_bound > 0.0 ? opt.blowup_bound : 10.0 * n_crit(p);
  auto tr = integrate_cavity(cavity_detuning(p, d.omega_d, s), kerr, p.kappa_r, d, horizon, opt,
                             bound);
  tr.qubit_state = s;
  return tr;
}

EpsilonCalibration calibrate_epsilon(const DeviceParams& p, double target_n, double t_d,
                                     double bright_detuning, double kerr) {
  if (!(target_n >= 0.0)) throw std::invalid_argument("target photon number must be >= 0");
  EpsilonCalibration out;
  if (target_n == 0.0) return out;
  SimulateOptions opt;
  opt.blowup_bound = 1e9;
  const double horizon = std::ceil(t_d / opt.output_dt - 1e-9) * opt.output_dt;
  auto n_at = [&](double eps) {
    DrivePulse d;
    d.amplitude = eps;
    d.t_d = t_d;
    auto tr = integrate_cavity(bright_detuning, kerr, p.kappa_r, d, horizon, opt, 1e9);
    return tr.n_bar_at(t_d);
  };
  double eps = std::sqrt(target_n) / t_d;
  double n = n_at(eps);
  int it = 0;
  for (; it < 60; ++it) {
    if (std::abs(n - target_n) <= 1e-4 * target_n) break;
    // Photon number grows as eps^2 away from bistability; rescale and repeat.
    const double next = eps * std::sqrt(target_n / std::max(n, 1e-300));
    eps = it < 3 ? next : 0.5 * (eps + next);
    n = n_at(eps);
  }
  if (std::abs(n - target_n) > 1e-3 * target_n) {
    throw std::runtime_error("calibrate_epsilon did not converge");
  }
  out.epsilon = eps;
  out.achieved_n = n;
  out.iterations = it;
  out.arb_scale = eps / kOperatingArbAmplitude;
  return out;
}

PointerTrajectory ring_down(const PointerTrajectory& traj, double extra_decay, double duration) {
  if (extra_decay < 0.0) throw std::invalid_argument("extra decay must be >= 0");
  PointerTrajectory out;
  out.dt = traj.dt;
  out.qubit_state = traj.qubit_state;
  out.kappa = traj.kappa + extra_decay;
  const auto n = static_cast<std::size_t>(std::llround(duration / traj.dt));
  const std::complex<double> a0 = traj.alpha.empty() ? 0.0 : traj.alpha.back();
  out.alpha.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = traj.dt * static_cast<double>(i);
    out.alpha.push_back(a0 * std::exp(-0.5 * out.kappa * t));
  }
  return out;
}

void write_trajectory_csv(std::ostream& os, const std::vector<PointerTrajectory>& trajectories) {
  os << "time_ns,re_alpha,im_alpha,n_bar,qubit_state\n";
  char buf[160];
  for (const auto& tr : trajectories) {
    for (std::size_t i = 0; i < tr.alpha.size(); ++i) {
      const double t_ns = tr.dt * static_cast<double>(i) / kNs;
      std::snprintf(buf, sizeof buf, "%.6g,%.12g,%.12g,%.12g,%s\n", t_ns, tr.alpha[i].real(),
                    tr.alpha[i].imag(), std::norm(tr.alpha[i]), to_string(tr.qubit_state));
      os << buf;
    }
  }
}

}  // namespace jpmr
