#include "jpmr/runner.hpp"

#include <functional>
#include <map>
#include <sstream>

#include "jpmr/io.hpp"
#include "jpmr/jpm.hpp"
#include "jpmr/mitigation.hpp"
#include "jpmr/run_config.hpp"
#include "jpmr/units.hpp"

namespace jpmr {

namespace {

constexpr double kMHz = kTwoPi * 1e6;

struct Ctx {
  nlohmann::json config;
  nlohmann::json params;
  Setup setup;
  std::string experiment;
  std::string out;
  std::string timestamp;
  std::uint64_t seed = 0;
  int shots = 0;
  std::string hash;
  Artifacts art;

  std::string csv(const std::string& part, const CsvTable& t) {
    const std::string name = part.empty() ? experiment : experiment + "-" + part;
    const auto path = artifact_path(out, name, timestamp, seed, ".csv");
    write_csv(path, {name, hash, seed}, t);
    art.csv_files.push_back(path);
    return path;
  }
  std::string csv_body(const std::string& part, const std::string& body) {
    const std::string name = part.empty() ? experiment : experiment + "-" + part;
    const auto path = artifact_path(out, name, timestamp, seed, ".csv");
    write_csv_body(path, {name, hash, seed}, body);
    art.csv_files.push_back(path);
    return path;
  }
  int p_int(const char* k) const { return params.at(k).get<int>(); }
  double p_dbl(const char* k) const { return params.at(k).get<double>(); }
};

nlohmann::json calib_summary(const CalibrationRecord& r) { return calibration_to_json(r); }

// ---------------------------------------------------------------- experiments

void run_rabi(Ctx& c) {
  const auto sim = c.setup.simulator();
  const auto rep = rabi_fidelity(sim, c.setup.errors, c.shots, c.seed, c.p_int("angle_points"));
  CsvTable t{{"angle_rad", "p_outcome1"}, {}};
  for (std::size_t i = 0; i < rep.angles.size(); ++i) t.add({rep.angles[i], rep.p1_curve[i]});
  c.csv("", t);
  nlohmann::json budget = nlohmann::json::array();
  for (const auto& b : rep.budget) budget.push_back({{"label", b.label}, {"infidelity", b.infidelity}});
  c.art.summary["result"] = {{"p1_given_0", rep.p1_given_0}, {"p1_given_1", rep.p1_given_1},
                             {"F", rep.F},  {"expected_F", rep.expected_F},
                             {"n_shots", rep.n_shots}, {"budget", budget}};
}

void run_stability(Ctx& c) {
  const auto sim = c.setup.simulator();
  const auto st = stability_histogram(sim, c.setup.errors, c.p_int("determinations"), c.shots,
                                      c.seed, c.p_int("bins"), c.p_int("threads"));
  CsvTable h{{"bin_lo", "bin_hi", "count"}, {}};
  for (std::size_t i = 0; i < st.bin_counts.size(); ++i) {
    h.add({st.bin_edges[i], st.bin_edges[i + 1], static_cast<double>(st.bin_counts[i])});
  }
  c.csv("", h);
  CsvTable v{{"determination", "F"}, {}};
  for (std::size_t i = 0; i < st.values.size(); ++i) v.add({static_cast<double>(i), st.values[i]});
  c.csv("values", v);
  c.art.summary["result"] = {{"mean", st.mean}, {"std", st.std},
                             {"determinations", st.values.size()}, {"shots_each", c.shots}};
}

ScanAxis time_axis(const Ctx& c) {
  return make_axis(ScanVariable::time, c.p_dbl("time_lo_ns") * kNs, c.p_dbl("time_hi_ns") * kNs,
                   c.p_int("time_points"));
}

nlohmann::json scan_summary(const ScanResult& r) {
  return {{"argmax_x", r.x.values[r.argmax_x]},
          {"argmax_t", r.y.values[r.argmax_y]},
          {"argmax_diff", r.argmax_value}};
}

CsvTable scan_table(const ScanResult& r, bool freq) {
  CsvTable t{{freq ? "freq_GHz" : "amp_arb", "t_ns", "p1_prep0", "p1_prep1", "diff"}, {}};
  for (std::size_t ix = 0; ix < r.x.values.size(); ++ix) {
    for (std::size_t iy = 0; iy < r.y.values.size(); ++iy) {
      const double x = freq ? r.x.values[ix] / kTwoPi / 1e9 : r.x.values[ix];
      t.add({x, r.y.values[iy] / kNs, r.at(r.p_g, ix, iy), r.at(r.p_e, ix, iy),
             r.at(r.diff, ix, iy)});
    }
  }
  return t;
}

void run_scan2d(Ctx& c) {
  const std::string axes = c.config.at("axes").get<std::string>();
  const auto& p = c.setup.device;
  if (axes == "freq,time") {
    Setup s = c.setup;
    s.calib.epsilon = c.p_dbl("scan_amp") * *s.calib.arb_scale;
    const double w1 = dressed_resonator(p, 1);
    const auto x = make_axis(ScanVariable::freq, w1 + c.p_dbl("freq_lo_mhz") * kMHz,
                             w1 + c.p_dbl("freq_hi_mhz") * kMHz, c.p_int("freq_points"));
    const auto r = scan_2d(s, x, time_axis(c), c.shots, c.seed);
    const auto pk = analyze_frequency_scan(r, p);
    c.csv("freq", scan_table(r, true));
    nlohmann::json peaks = nlohmann::json::array();
    for (const auto& k : pk.peaks) {
      peaks.push_back({{"freq_GHz", r.x.values[k.row] / kTwoPi / 1e9},
                       {"t_ns", r.y.values[k.col] / kNs},
                       {"abs_diff", k.value},
                       {"prominence", k.prominence}});
    }
    c.art.summary["freq_time"] = scan_summary(r);
    c.art.summary["freq_time"]["peaks"] = peaks;
    c.art.summary["freq_time"]["two_peaks"] = pk.two_peaks;
  } else if (axes == "amp,time") {
    const auto x = make_axis(ScanVariable::amp, c.p_dbl("amp_lo"), c.p_dbl("amp_hi"),
                             c.p_int("amp_points"));
    const auto r = scan_2d(c.setup, x, time_axis(c), c.shots, c.seed);
    c.csv("amp", scan_table(r, false));
    c.art.summary["amp_time"] = scan_summary(r);
  } else {
    throw ConfigError("axes must be 'freq,time' or 'amp,time', got '" + axes + "'");
  }
}

void run_optimize(Ctx& c) {
  auto o = default_optimize_options(c.setup);
  o.refine_levels = c.p_int("refine_levels");
  if (c.shots > 0) o.shots_per_level = {c.shots / 10 > 0 ? c.shots / 10 : 1, c.shots};
  const auto& p = c.setup.device;
  const double w1 = dressed_resonator(p, 1);
  const double t_chi = std::round(kPi / (effective_two_chi(p) / 2.0) / kNs) * kNs;
  const DrivePoint start{w1, kOperatingArbAmplitude * *c.setup.calib.arb_scale, t_chi};
  const auto res = coordinate_optimize(fidelity_objective(c.setup, c.seed), start, o);
  CsvTable t{{"round", "level", "pass", "shots", "omega_d_GHz", "epsilon_arb", "t_ns", "F"}, {}};
  for (const auto& h : res.history) {
    t.add({static_cast<double>(h.round), static_cast<double>(h.level),
           h.name == "freq_time" ? 0.0 : 1.0, static_cast<double>(h.shots),
           h.argmax.omega_d / kTwoPi / 1e9, h.argmax.epsilon / *c.setup.calib.arb_scale,
           h.argmax.t_d / kNs, h.value});
  }
  const auto path = c.csv("", t);
  CalibrationRecord rec = c.setup.calib;
  rec.omega_d = res.best.omega_d;
  rec.epsilon = res.best.epsilon;
  rec.t_d = res.best.t_d;
  rec.provenance = res.record.provenance;
  for (auto& pv : rec.provenance) pv.csv_path = path;
  c.art.summary["result"] = {
      {"detuning_MHz", (res.best.omega_d - w1) / kMHz},
      {"t_d_ns", res.best.t_d / kNs},
      {"t_d_over_pi_over_chi", res.best.t_d / t_chi},
      {"epsilon_arb", res.best.epsilon / *c.setup.calib.arb_scale},
      {"F", res.value},
      {"start_F", res.start_value},
      {"rounds", res.rounds},
      {"evaluations", res.evaluations},
      {"converged", res.converged},
      {"budget_exhausted", res.budget_exhausted},
      {"degenerate", res.degenerate},
  };
  c.art.summary["record"] = calib_summary(rec);
}

void run_stark(Ctx& c) {
  std::vector<double> ts;
  const double td = *c.setup.calib.t_d;
  for (int i = 0; i <= static_cast<int>(std::llround(td / kNs)); ++i) ts.push_back(i * kNs);
  const auto pts = stark_calibration(c.setup, ts);
  CsvTable t{{"t_ns", "shift_bright_MHz", "shift_dark_MHz", "n_bright", "n_dark"}, {}};
  double peak = 0.0, t_peak = 0.0;
  for (const auto& s : pts) {
    t.add({s.t / kNs, s.shift_bright / kMHz, s.shift_dark / kMHz, s.n_bright, s.n_dark});
    if (s.n_dark > peak) {
      peak = s.n_dark;
      t_peak = s.t;
    }
  }
  c.csv("", t);
  c.art.summary["result"] = {{"n_bright_at_td", pts.back().n_bright},
                             {"n_dark_peak", peak},
                             {"t_dark_peak_ns", t_peak / kNs},
                             {"n_dark_at_td", pts.back().n_dark}};
}

void run_excess(Ctx& c) {
  const auto amps = c.params.at("excess_amps").get<std::vector<double>>();
  const int reps = c.p_int("replications");
  CsvTable est{{"replication", "estimate"}, {}};
  std::vector<double> values;
  ExcessEstimate first;
  for (int r = 0; r < reps; ++r) {
    const auto e = excess_population_estimate(c.setup, amps, c.shots, c.seed, 5000 + r);
    if (r == 0) first = e;
    values.push_back(e.estimate);
    est.add({static_cast<double>(r), e.estimate});
  }
  CsvTable t{{"amp_arb", "p_tunnel_prep0", "p_tunnel_prep1"}, {}};
  for (std::size_t i = 0; i < amps.size(); ++i) t.add({amps[i], first.p_g[i], first.p_e[i]});
  c.csv("", t);
  if (reps > 1) c.csv("replications", est);
  const auto m = gaussian_mle(values);
  c.art.summary["result"] = {{"planted", c.setup.errors.excess_one_population},
                             {"estimate", first.estimate},
                             {"slope_prep0", first.fit_g.slope},
                             {"slope_prep1", first.fit_e.slope},
                             {"mean_estimate", m.mean},
                             {"std_estimate", m.std},
                             {"replications", reps}};
}

void run_reset(Ctx& c) {
  const auto r = reset_experiments(c.setup.device);
  CsvTable a{{"t_ns", "resonator_n_active", "qubit_p1_active"}, {}};
  for (std::size_t i = 0; i < r.times_active.size(); ++i) {
    a.add({r.times_active[i] / kNs, r.resonator_active[i], r.qubit_active[i]});
  }
  c.csv("active", a);
  CsvTable p{{"t_us", "resonator_n_passive", "qubit_p1_passive"}, {}};
  for (std::size_t i = 0; i < r.times_passive.size(); ++i) {
    p.add({r.times_passive[i] / kUs, r.resonator_passive[i], r.qubit_passive[i]});
  }
  c.csv("passive", p);
  c.art.summary["result"] = {{"resonator_passive_1e_us", r.resonator_passive_1e / kUs},
                             {"resonator_active_ns", r.resonator_active_time / kNs},
                             {"qubit_active_ns", r.qubit_active_time / kNs},
                             {"hybridized_decay_ns", r.hybridized_decay_time / kNs},
                             {"qubit_reset_decay_ns", r.qubit_reset_decay_time / kNs}};
}

void run_repetition(Ctx& c) {
  const bool both = c.params.at("both_mappings").get<bool>();
  std::vector<bool> maps = both ? std::vector<bool>{false, true}
                                : std::vector<bool>{c.params.at("swap_mapping").get<bool>()};
  for (bool sw : maps) {
    Setup s = c.setup;
    s.shot.swap_mapping = sw;
    const auto r = repetition_rate_sweep(s, default_repetition_intervals(), c.shots, c.seed);
    CsvTable t{{"interval_us", "p1_given_0", "p1_given_1", "F"}, {}};
    for (const auto& pt : r.points) t.add({pt.interval / kUs, pt.p1_given_0, pt.p1_given_1, pt.F});
    c.csv(sw ? "swapped" : "", t);
    c.art.summary[sw ? "swapped" : "standard"] = {{"recovery_tau_us", r.bright_fit.theta / kUs},
                                                 {"bright_deficit", r.bright_deficit},
                                                 {"dark_deficit", r.dark_deficit}};
  }
}

void run_backaction(Ctx& c) {
  const auto model = calibrate_backaction(c.setup);
  const std::string which = c.params.at("mitigation").get<std::string>();
  std::vector<unsigned> ladder;
  if (which == "ladder") {
    ladder = {kNoMitigation, kResonatorReset, kResonatorReset | kHideBias, kFullMitigation};
  } else {
    ladder = {parse_mitigation(which)};
  }
  const int np = c.p_int("angle_points");
  CsvTable t;
  t.columns.push_back("angle_rad");
  std::vector<BackactionResult> res;
  for (unsigned m : ladder) {
    res.push_back(backaction_experiment(c.setup, m, model, c.shots, c.seed, true, np));
    t.columns.push_back("p_" + mitigation_name(m));
  }
  const auto base = backaction_experiment(c.setup, kNoMitigation, model, c.shots, c.seed, false, np);
  t.columns.push_back("p_no_forced_tunnel");
  for (int k = 0; k < np; ++k) {
    std::vector<double> row{res.front().angles[k]};
    for (const auto& r : res) row.push_back(r.p_tunnel[k]);
    row.push_back(base.p_tunnel[k]);
    t.add(row);
  }
  c.csv("", t);
  nlohmann::json out = nlohmann::json::object();
  for (const auto& r : res) {
    out[mitigation_name(r.mitigation)] = {{"visibility", r.visibility},
                                          {"mean_tunneling", r.mean_tunneling},
                                          {"excess_population", r.excess_population},
                                          {"background_photons", r.background_photons}};
  }
  out["no_forced_tunnel"] = {{"visibility", base.visibility}};
  c.art.summary["result"] = out;
  c.art.summary["model"] = {{"background_photons", model.background_photons},
                            {"qubit_excitation", model.qubit_excitation},
                            {"qubit_excitation_hidden", model.qubit_excitation_hidden},
                            {"qubit_reset_residual", model.qubit_reset_residual}};
}

void run_crosstalk(Ctx& c) {
  const auto bm = calibrate_backaction(c.setup);
  const auto m = calibrate_crosstalk(bm.background_photons,
                                     c.setup.errors.crosstalk_dephasing_factor,
                                     c.p_dbl("echo_time_us") * kUs);
  const auto off = crosstalk_spin_echo(c.setup.device, false, m, c.shots, c.seed, c.p_int("echo_points"));
  const auto on = crosstalk_spin_echo(c.setup.device, true, m, c.shots, c.seed, c.p_int("echo_points"));
  CsvTable t{{"t_us", "echo_quiet", "echo_after_tunnel", "echo_quiet_reset", "echo_after_tunnel_reset"}, {}};
  for (std::size_t i = 0; i < off.times.size(); ++i) {
    t.add({off.times[i] / kUs, off.echo_quiet[i], off.echo_disturbed[i], on.echo_quiet[i],
           on.echo_disturbed[i]});
  }
  c.csv("", t);
  c.art.summary["result"] = {{"ratio_without_reset", off.ratio},
                             {"ratio_with_reset", on.ratio},
                             {"implied_neighbour_photons", m.residual_photons},
                             {"photon_scale", m.photon_scale},
                             {"photons_after_reset", on.photons_at_echo}};
}

void run_pointer(Ctx& c) {
  const auto tr = pointer_evolution(c.setup);
  std::ostringstream os;
  write_trajectory_csv(os, tr);
  c.csv_body("", os.str());
  c.art.summary["result"] = {{"n_bright_at_td", tr[1].n_bar_at(*c.setup.calib.t_d)},
                             {"n_dark_at_td", tr[0].n_bar_at(*c.setup.calib.t_d)}};
}

void run_photodetect(Ctx& c) {
  std::vector<double> ts;
  for (int i = 1; i <= c.p_int("photodetect_max_ns"); ++i) ts.push_back(i * kNs);
  const auto pts = photodetect_sweep(c.setup, ts);
  CsvTable t{{"t_ns", "energy_fraction", "p1_prep0", "p1_prep1"}, {}};
  for (const auto& p : pts) t.add({p.t / kNs, p.energy_fraction, p.p_g, p.p_e});
  c.csv("", t);
  c.art.summary["result"] = {{"optimum_ns", photodetect_optimum(c.setup.device) / kNs},
                             {"operating_ns", *c.setup.calib.photodetect_time / kNs}};
}

void run_scurve(Ctx& c) {
  const auto tc = scurves(c.setup, c.p_int("scurve_points"));
  CsvTable t{{"amplitude_phi0", "p_tunnel_g", "p_tunnel_e"}, {}};
  for (const auto& s : tc.scurves) t.add({s.amplitude, s.p_g, s.p_e});
  c.csv("", t);
  c.art.summary["result"] = {{"contrast_max_amplitude", tc.amplitude},
                             {"max_contrast", tc.contrast},
                             {"operating_amplitude", *c.setup.calib.tunnel_amplitude}};
}

const std::map<std::string, std::function<void(Ctx&)>>& registry() {
  static const std::map<std::string, std::function<void(Ctx&)>> r = {
      {"rabi", run_rabi},         {"stability", run_stability},   {"scan2d", run_scan2d},
      {"optimize", run_optimize}, {"stark", run_stark},           {"excess", run_excess},
      {"reset", run_reset},       {"repetition", run_repetition}, {"backaction", run_backaction},
      {"crosstalk", run_crosstalk}, {"pointer", run_pointer},     {"photodetect", run_photodetect},
      {"scurve", run_scurve},
  };
  return r;
}

}  // namespace

std::vector<std::string> experiment_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : registry()) out.push_back(k);
  return out;
}

Setup setup_from_config(const nlohmann::json& config) {
  const std::string dev = config.value("device", "");
  Setup s = default_setup(dev.empty() ? table_iv_device() : load_device_file(dev));
  s.errors = error_model_from_config(config.at("errors"));
  s.shot.swap_mapping = config.at("params").at("swap_mapping").get<bool>();
  return s;
}

Artifacts run_experiment(const nlohmann::json& config) {
  Ctx c;
  c.config = config;
  c.experiment = config.at("experiment").get<std::string>();
  const auto it = registry().find(c.experiment);
  if (it == registry().end()) throw ConfigError("unknown experiment '" + c.experiment + "'");
  c.params = config.at("params");
  c.seed = config.at("seed").get<std::uint64_t>();
  c.shots = config.at("shots").get<int>();
  c.out = config.at("out").get<std::string>();
  if (c.out.empty()) c.out = ".";
  c.timestamp = config.at("timestamp").get<std::string>();
  if (c.timestamp.empty()) c.timestamp = utc_timestamp();
  c.hash = config_hash(config);
  c.setup = setup_from_config(config);
  c.art.summary = {{"experiment", c.experiment}, {"seed", c.seed}, {"config_hash", c.hash},
                   {"config", config}, {"operating_point", calib_summary(c.setup.calib)}};
  it->second(c);
  c.art.summary["csv"] = c.art.csv_files;
  c.art.summary_file = artifact_path(c.out, c.experiment, c.timestamp, c.seed, ".json");
  write_json(c.art.summary_file, c.art.summary);
  return c.art;
}

Artifacts reproduce_figure(const std::string& figure, nlohmann::json config) {
  const auto& p = find_preset(figure);
  merge_config(config, p.overrides);
  config["experiment"] = p.experiment;
  if (figure == "5") {
    // Both scan types of the figure.
    auto a = run_experiment(config);
    config["axes"] = "amp,time";
    auto b = run_experiment(config);
    a.csv_files.insert(a.csv_files.end(), b.csv_files.begin(), b.csv_files.end());
    a.summary["amp_time"] = b.summary["amp_time"];
    return a;
  }
  return run_experiment(config);
}

}  // namespace jpmr
