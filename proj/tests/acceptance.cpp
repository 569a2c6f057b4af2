// Acceptance run: one PASS/FAIL line per criterion, with the individual checks
// listed underneath. Exit status is nonzero when any criterion fails.
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "jpmr/calibration.hpp"
#include "jpmr/cavity.hpp"
#include "jpmr/device.hpp"
#include "jpmr/experiments.hpp"
#include "jpmr/jpm.hpp"
#include "jpmr/mitigation.hpp"
#include "jpmr/rng.hpp"
#include "jpmr/shot.hpp"
#include "jpmr/units.hpp"

using namespace jpmr;
namespace fs = std::filesystem;

namespace {

constexpr double MHz = kTwoPi * 1e6;
constexpr double GHz = kTwoPi * 1e9;

class Criterion {
 public:
  explicit Criterion(std::string title) : title_(std::move(title)), t0_(clock::now()) {}

  bool check(bool ok, const char* fmt, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    lines_.push_back({ok, buf});
    all_ &= ok;
    return ok;
  }

  double elapsed() const { return std::chrono::duration<double>(clock::now() - t0_).count(); }

  void runtime_below(double limit_s) {
    const double t = elapsed();
    check(t < limit_s, "runtime %.2f s < %.0f s", t, limit_s);
  }

  bool report(int index) const {
    std::printf("%s criterion %d: %s\n", all_ ? "PASS" : "FAIL", index, title_.c_str());
    for (const auto& l : lines_) std::printf("    %s  %s\n", l.ok ? "pass" : "FAIL", l.text.c_str());
    std::fflush(stdout);
    return all_;
  }

 private:
  using clock = std::chrono::steady_clock;
  struct Line {
    bool ok;
    std::string text;
  };
  std::string title_;
  clock::time_point t0_;
  std::vector<Line> lines_;
  bool all_ = true;
};

bool within_rel(double x, double target, double rel) { return std::abs(x - target) <= rel * std::abs(target); }

std::complex<double> linear_alpha(double delta, double kappa, double eps, double t) {
  const std::complex<double> z(kappa / 2.0, delta);
  return std::complex<double>(0.0, -eps) * (1.0 - std::exp(-z * t)) / z;
}

double sd_F(double p11, double p10, int n) {
  return std::sqrt((p11 * (1 - p11) + p10 * (1 - p10)) / n);
}

double sample_std(const std::vector<double>& v, double* mean_out = nullptr) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  if (mean_out) *mean_out = m;
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double detect_flux(const DeviceParams& p) { return resonance_flux(p, dressed_resonator(p, 1)); }

// ---------------------------------------------------------------- 1

bool derived_goldens() {
  Criterion c("derived-quantity goldens");
  auto p = table_iv_device();

  auto p51 = p;
  p51.omega_q_op = 5.1 * GHz;
  const double purcell = purcell_limit(p51);
  const double delta = p51.omega_q_op - p51.omega_r_bare;
  const double oracle = delta * delta / (p51.g_qr * p51.g_qr * p51.kappa_r);
  c.check(within_rel(purcell / kUs, 66.0, 0.05), "Purcell limit at 5.1 GHz %.2f us (66 us +-5%%)", purcell / kUs);
  c.check(within_rel(purcell, oracle, 1e-12), "Purcell limit equals Delta^2/(g^2 kappa) = %.2f us", oracle / kUs);

  const double nc = n_crit(p);
  c.check(std::abs(nc - 13.3) <= 0.1, "n_crit %.3f (13.3 +- 0.1)", nc);

  const double swap = swap_half_period(p);
  c.check(within_rel(swap / kNs, 4.0, 0.02), "pi/(2 g_jr) %.4f ns (4 ns +-2%%)", swap / kNs);

  const auto b = beta_L(p);
  c.check(within_rel(b.value, 5.5, 0.01) && b.double_well, "beta_L %.3f (5.5 +-1%%), double well %s",
          b.value, b.double_well ? "yes" : "no");

  const auto r = plasma_frequency_range(p);
  const double hi = r.omega_max / GHz, lo = r.omega_min / GHz;
  c.check(hi >= 7.3 * 0.9 && hi <= 7.3 * 1.1, "plasma frequency maximum %.3f GHz (7.3 GHz +-10%%)", hi);
  c.check(lo <= 4.0 * 1.1, "plasma frequency minimum %.3f GHz reaches 4 GHz (+10%%)", lo);

  const auto L = potential_landscape(p, detect_flux(p));
  c.check(L.n_bound_left >= 35 && L.n_bound_left <= 65,
          "left-well bound states at the avoided-crossing bias %d (50 +- 15)", L.n_bound_left);

  c.runtime_below(1.0);
  return c.report(1);
}

// ---------------------------------------------------------------- 2

bool pointer_cross_check() {
  Criterion c("pointer-state cross-check");
  const auto s = default_setup();
  const auto& p = s.device;
  const double t_d = *s.calib.t_d;
  const double w1 = dressed_resonator(p, 1);
  const double offset = *s.calib.omega_d - w1;
  c.check(std::abs(t_d - 105e-9) < 1e-12, "t_d %.1f ns", t_d / kNs);
  c.check(within_rel(*p.measured_two_chi / MHz, 7.4, 1e-9), "2chi/2pi %.3f MHz", *p.measured_two_chi / MHz);

  // epsilon from the calibration must put 27 photons in a linear |1> cavity at t_d.
  const double eps = *s.calib.epsilon;
  const double n_lin = std::norm(linear_alpha(-offset, p.kappa_r, eps, t_d));
  c.check(within_rel(n_lin, 27.0, 1e-3), "bright n at t_d, closed form %.3f (27)", n_lin);

  const auto tr = pointer_evolution(s, 0.0);
  const auto& dark = tr[0];
  const auto& bright = tr[1];
  double peak = 0.0;
  for (std::size_t i = 0; i < dark.alpha.size(); ++i) peak = std::max(peak, dark.n_bar(i));
  c.check(std::abs(peak - 4.0) <= 1.0, "dark peak n %.3f (4 +- 1), Kerr %.0f kHz", peak, p.kerr / kTwoPi / 1e3);
  c.check(dark.n_bar_at(t_d) < 0.5, "dark residual at t_d %.3f (< 0.5)", dark.n_bar_at(t_d));
  c.check(bright.n_bar_at(t_d) > 20.0, "bright n at t_d with Kerr %.2f", bright.n_bar_at(t_d));

  const double d0 = dressed_resonator(p, 0) - *s.calib.omega_d;
  double lin_peak = 0.0;
  for (int i = 0; i <= 105; ++i) lin_peak = std::max(lin_peak, std::norm(linear_alpha(d0, p.kappa_r, eps, i * kNs)));
  const double lin_res = std::norm(linear_alpha(d0, p.kappa_r, eps, t_d));
  c.check(std::abs(lin_peak - 4.0) <= 1.0 && lin_res < 0.5,
          "closed-form dark pointer: peak %.3f, residual %.3f", lin_peak, lin_res);

  c.runtime_below(10.0);
  return c.report(2);
}

// ---------------------------------------------------------------- 3

bool fidelity_reproduction() {
  Criterion c("fidelity reproduction");
  const auto s = default_setup();
  const auto sim = s.simulator();
  const auto& em = s.errors;

  const auto rep = rabi_fidelity(sim, em, 5000, 1);
  c.check(std::abs(rep.F - 0.984) <= 0.005, "Rabi F %.4f over 5000 shots (0.984 +- 0.005)", rep.F);

  const double table_lines[4] = {0.006, 0.006, 0.003, 0.001};
  for (int i = 0; i < 4; ++i) {
    const auto ch = single_channel(em, kBudgetLabels[i]);
    const auto r = sample_fidelity(sim, ch, 5000, 1, 100 + i);
    const double sd = std::max(sd_F(r.p1_given_1, r.p1_given_0, 5000), 1.0 / 5000);
    const double loss = 1.0 - r.F;
    c.check(std::abs(loss - table_lines[i]) <= 3 * sd, "%s: 1-F %.4f vs %.3f (3 sigma = %.4f)",
            kBudgetLabels[i], loss, table_lines[i], 3 * sd);
  }

  const auto st = stability_histogram(sim, em, 1000, 5000, 1);
  c.check(std::abs(st.std - 0.002) <= 0.0005, "stability over 1000 determinations: sigma_F %.5f (0.002 +- 0.0005)",
          st.std);
  c.check(std::abs(st.mean - 0.984) <= 0.005, "stability mean F %.5f", st.mean);

  c.runtime_below(120.0);
  return c.report(3);
}

// ---------------------------------------------------------------- 4

bool scan_structure() {
  Criterion c("scan structure");
  auto s = default_setup();
  const auto& p = s.device;
  const double w1 = dressed_resonator(p, 1), w0 = dressed_resonator(p, 0);
  const double pi_chi = kPi / (effective_two_chi(p) / 2.0);

  Setup sc = s;
  sc.calib.epsilon = 0.8 * *sc.calib.arb_scale;
  const auto x = make_axis(ScanVariable::freq, w1 - 5 * MHz, w1 + 12.4 * MHz, 36);
  const auto y = make_axis(ScanVariable::time, 10e-9, 160e-9, 31);
  const auto r = scan_2d(sc, x, y, 500, 1);
  const auto pk = analyze_frequency_scan(r, p);
  c.check(pk.peaks.size() == 2, "frequency x time map: %zu local maxima (2)", pk.peaks.size());
  c.check(std::abs(pk.freq_peak_r1 - w1) < 3 * MHz && std::abs(pk.freq_peak_r0 - w0) < 3 * MHz,
          "peaks at %+.2f MHz from omega_r1 and %+.2f MHz from omega_r0", (pk.freq_peak_r1 - w1) / MHz,
          (pk.freq_peak_r0 - w0) / MHz);
  c.check(std::abs(pk.time_peak_r1 / pi_chi - 1.0) <= 0.3 && std::abs(pk.time_peak_r0 / pi_chi - 1.0) <= 0.3,
          "peak times %.0f ns and %.0f ns vs pi/chi %.1f ns (+-30%%)", pk.time_peak_r1 / kNs,
          pk.time_peak_r0 / kNs, pi_chi / kNs);

  const auto o = default_optimize_options(s);
  const DrivePoint start{w1, kOperatingArbAmplitude * *s.calib.arb_scale, std::round(pi_chi / kNs) * kNs};
  const auto res = coordinate_optimize(fidelity_objective(s, 1), start, o);
  const double dw = (res.best.omega_d - w1) / MHz;
  const double shortening = 1.0 - res.best.t_d / pi_chi;
  c.check(dw >= -3.0 && dw <= -1.0, "converged drive %.2f MHz from omega_r1 (-3 .. -1)", dw);
  c.check(shortening >= 0.15 && shortening <= 0.30, "t_d %.0f ns, shortened %.1f%% from pi/chi (15 .. 30%%)",
          res.best.t_d / kNs, 100 * shortening);
  c.check(res.value >= res.start_value, "optimum F %.4f >= start F %.4f", res.value, res.start_value);

  c.runtime_below(300.0);
  return c.report(4);
}

// ---------------------------------------------------------------- 5

bool reset_suite() {
  Criterion c("reset suite");
  const auto p = table_iv_device();
  const auto r = reset_experiments(p, 27.0, 1.0, 1e-3, 1e-2);
  c.check(within_rel(r.resonator_passive_1e / kUs, 1.53, 1e-9), "passive resonator 1/e time %.6f us (1.53)",
          r.resonator_passive_1e / kUs);
  c.check(r.resonator_active_time < 100e-9, "active resonator reset 27 -> 1e-3 photons in %.1f ns (< 100 ns)",
          r.resonator_active_time / kNs);
  c.check(r.qubit_active_time < 100e-9, "active qubit reset to P1 = 1e-2 in %.1f ns (< 100 ns)",
          r.qubit_active_time / kNs);
  c.check(within_rel(r.hybridized_decay_time / kNs, 10.0, 0.2), "hybridized decay time %.2f ns (10 +- 20%%)",
          r.hybridized_decay_time / kNs);
  c.runtime_below(10.0);
  return c.report(5);
}

// ---------------------------------------------------------------- 6

bool estimator_suite() {
  Criterion c("excess-population estimator");
  auto s = default_setup();
  const std::vector<double> amps = {0.25, 0.275, 0.3, 0.325, 0.35, 0.375, 0.4};
  struct Case {
    double planted;
    double tol;
  };
  const Case cases[] = {{0.0, 0.001}, {0.003, 0.001}, {0.04, 0.005}};
  std::uint64_t block = 1;
  for (const auto& k : cases) {
    s.errors.excess_one_population = k.planted;
    std::vector<double> est;
    int inside = 0;
    for (int rep = 0; rep < 100; ++rep) {
      const double e = excess_population_estimate(s, amps, 100000, 6, block++).estimate;
      est.push_back(e);
      inside += std::abs(e - k.planted) <= k.tol;
    }
    double mean = 0.0;
    const double sd = sample_std(est, &mean);
    c.check(std::abs(mean - k.planted) <= sd / 10.0,
            "planted %.3f: mean %.5f, sigma %.5f, |bias| %.5f <= sigma/10 = %.5f", k.planted, mean, sd,
            std::abs(mean - k.planted), sd / 10.0);
    const double exact = excess_population_estimate(s, amps, 0, 0).estimate;
    c.check(std::abs(mean - exact) <= 3 * sd / 10.0,
            "planted %.3f: mean agrees with the exact-probability estimate %.5f within 3 sigma/10", k.planted,
            exact);
    c.check(std::abs(mean - k.planted) <= k.tol && sd <= k.tol,
            "planted %.3f: within +-%.3f (mean and single-run sigma), %d/100 replications inside",
            k.planted, k.tol, inside);
  }
  return c.report(6);
}

// ---------------------------------------------------------------- 7

bool phenomenological_fits() {
  Criterion c("phenomenological-model fits");
  const auto s = default_setup();

  const auto rr = repetition_rate_sweep(s, default_repetition_intervals(), 20000, 1);
  c.check(within_rel(rr.bright_fit.theta / kUs, 13.0, 0.1), "repetition recovery constant %.2f us (13 +- 10%%)",
          rr.bright_fit.theta / kUs);

  const auto bm = calibrate_backaction(s);
  const auto xm = calibrate_crosstalk(bm.background_photons, s.errors.crosstalk_dephasing_factor);
  const auto off = crosstalk_spin_echo(s.device, false, xm, 5000, 1);
  const auto on = crosstalk_spin_echo(s.device, true, xm, 5000, 1);
  c.check(std::abs(off.ratio - 2.6) <= 0.1, "spin-echo decay ratio without reset %.3f (2.6 +- 0.1)", off.ratio);
  c.check(std::abs(on.ratio - 1.0) <= 0.05, "spin-echo decay ratio with reset %.3f (1.00 +- 0.05)", on.ratio);

  const BackactionTargets t;
  const int n = 4000;
  const auto none = backaction_experiment(s, kNoMitigation, bm, n, 1);
  const auto rr_only = backaction_experiment(s, kResonatorReset, bm, n, 1);
  const auto hidden = backaction_experiment(s, kResonatorReset | kHideBias, bm, n, 1);
  const auto full = backaction_experiment(s, kFullMitigation, bm, n, 1);
  const auto base = backaction_experiment(s, kFullMitigation, bm, n, 1, false);
  const double sd_mean = std::sqrt(0.25 / (n * static_cast<double>(none.angles.size())));
  c.check(std::abs(none.mean_tunneling - t.mean_tunneling_none) <= 3 * sd_mean,
          "no mitigation: mean tunneling %.3f (%.2f)", none.mean_tunneling, t.mean_tunneling_none);
  c.check(std::abs(rr_only.visibility - t.visibility_reset_only) <= 3 * sd_F(0.5, 0.5, n),
          "resonator reset only: visibility %.3f (~%.2f)", rr_only.visibility, t.visibility_reset_only);
  c.check(std::abs(hidden.visibility - t.visibility_hidden) <= 3 * sd_F(0.5, 0.5, n),
          "reset and hide bias: visibility %.3f (~%.2f)", hidden.visibility, t.visibility_hidden);
  const double exact_base = backaction_expectation(s, kFullMitigation, bm, false).visibility;
  const double exact_full = backaction_expectation(s, kFullMitigation, bm).visibility;
  c.check(within_rel(exact_base - exact_full, t.fidelity_deficit_full, 0.05),
          "full mitigation: F deficit %.4f vs baseline (%.3f)", exact_base - exact_full, t.fidelity_deficit_full);
  c.check(std::abs((base.visibility - full.visibility) - t.fidelity_deficit_full) <= 3 * std::sqrt(2.0) * sd_F(0.99, 0.01, n),
          "full mitigation sampled: F %.4f vs baseline %.4f", full.visibility, base.visibility);
  return c.report(7);
}

// ---------------------------------------------------------------- 8

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

bool determinism() {
  Criterion c("determinism");
  const fs::path root = fs::temp_directory_path() / "jpmr_acceptance";
  fs::remove_all(root);
  for (const std::string fig : {"4b", "4d", "6a", "9", "10"}) {
    bool same = true;
    int files = 0;
    for (const char* tag : {"a", "b"}) {
      const auto dir = root / (fig + tag);
      const std::string cmd = std::string(JPMSIM_EXE) + " reproduce " + fig + " --seed 17 --timestamp FIXED --out " +
                              dir.string() + " > /dev/null 2>&1";
      const int rc = std::system(cmd.c_str());
      same &= WIFEXITED(rc) && WEXITSTATUS(rc) == 0;
    }
    for (const auto& e : fs::directory_iterator(root / (fig + "a"))) {
      if (e.path().extension() != ".csv") continue;
      ++files;
      const auto other = root / (fig + "b") / e.path().filename();
      same &= fs::exists(other) && slurp(e.path()) == slurp(other);
    }
    c.check(same && files > 0, "reproduce %s twice with seed 17: %d csv files byte-identical", fig.c_str(), files);
  }

  const auto p = table_iv_device();
  const double f0 = detect_flux(p), fc = critical_flux(p);
  Rng rng(8, 1);
  int bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const double a1 = rng.uniform() * (fc - f0), a2 = rng.uniform() * (fc - f0);
    const double q1 = 40 * rng.uniform(), q2 = 40 * rng.uniform();
    const double t1 = 1e-9 + 30e-9 * rng.uniform(), t2 = 1e-9 + 30e-9 * rng.uniform();
    const auto L1 = potential_landscape(p, f0 + std::min(a1, a2));
    const auto L2 = potential_landscape(p, f0 + std::max(a1, a2));
    bool ok = escape_probability(L1, q1, t1) <= escape_probability(L2, q1, t1);
    ok &= escape_probability(L1, std::min(q1, q2), t1) <= escape_probability(L1, std::max(q1, q2), t1);
    ok &= escape_probability(L1, q1, std::min(t1, t2)) <= escape_probability(L1, q1, std::max(t1, t2));
    bad += !ok;
  }
  c.check(bad == 0, "escape probability monotone in amplitude, excitation and duration: %d/1000 violations", bad);

  bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const double a1 = rng.uniform() * (fc - f0), a2 = rng.uniform() * (fc - f0);
    const double dur = 2e-9 + 20e-9 * rng.uniform();
    const double m1 = 30 * rng.uniform(), m2 = 30 * rng.uniform();
    const auto lo = escape_table(potential_landscape(p, f0 + std::min(a1, a2)), dur);
    const auto hi = escape_table(potential_landscape(p, f0 + std::max(a1, a2)), dur);
    const double mg = std::min(m1, m2), me = std::max(m1, m2);
    bool ok = poisson_tunnel_probability(lo, mg) <= poisson_tunnel_probability(lo, me);
    ok &= poisson_tunnel_probability(hi, mg) <= poisson_tunnel_probability(hi, me);
    ok &= poisson_tunnel_probability(lo, mg) <= poisson_tunnel_probability(hi, mg);
    ok &= poisson_tunnel_probability(lo, me) <= poisson_tunnel_probability(hi, me);
    bad += !ok;
  }
  c.check(bad == 0, "S-curves ordered by photon number and rising with amplitude: %d/1000 violations", bad);
  return c.report(8);
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::function<bool()>> all = {derived_goldens,  pointer_cross_check, fidelity_reproduction,
                                            scan_structure,   reset_suite,         estimator_suite,
                                            phenomenological_fits, determinism};
  std::vector<int> pick;
  for (int i = 1; i < argc; ++i) pick.push_back(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (!pick.empty() && std::find(pick.begin(), pick.end(), static_cast<int>(i + 1)) == pick.end()) continue;
    try {
      failed += !all[i]();
    } catch (const std::exception& e) {
      std::printf("FAIL criterion %zu: exception %s\n", i + 1, e.what());
      ++failed;
    }
  }
  std::printf("%d criterion failure(s)\n", failed);
  return failed == 0 ? 0 : 1;
}
