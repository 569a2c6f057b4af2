// jpmsim: command-line front end for the virtual JPM readout experiments.
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "jpmr/calibration.hpp"
#include "jpmr/device.hpp"
#include "jpmr/io.hpp"
#include "jpmr/run_config.hpp"
#include "jpmr/runner.hpp"
#include "jpmr/units.hpp"

namespace {

struct CommonFlags {
  std::string config_file;
  std::string device;
  std::string out;
  std::string axes;
  std::string timestamp;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  int shots = -1;
  bool seed_given = false;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config_file, "JSON run configuration");
  app->add_option("--device", f.device, "device parameter file (JSON)");
  app->add_option("--seed", f.seed, "64-bit seed");
  app->add_option("--shots", f.shots, "shots per prepared state");
  app->add_option("--out", f.out, "output directory (default $JPMSIM_OUT or ./out)");
  app->add_option("--axes", f.axes, "scan axes: freq,time or amp,time");
  app->add_option("--timestamp", f.timestamp, "fixed artifact timestamp");
  app->add_option("--set", f.sets, "dotted.key=value override")->allow_extra_args(false);
}

nlohmann::json build_config(const CommonFlags& f, CLI::App* app) {
  auto cfg = jpmr::default_run_config();
  if (!f.config_file.empty()) jpmr::merge_config(cfg, jpmr::load_run_config_file(f.config_file));
  if (cfg.at("out").get<std::string>().empty()) {
    const char* env = std::getenv("JPMSIM_OUT");
    cfg["out"] = env && *env ? env : "out";
  }
  if (!f.device.empty()) cfg["device"] = f.device;
  if (app->count("--seed")) cfg["seed"] = f.seed;
  if (f.shots >= 0) cfg["shots"] = f.shots;
  if (!f.out.empty()) cfg["out"] = f.out;
  if (!f.axes.empty()) cfg["axes"] = f.axes;
  if (!f.timestamp.empty()) cfg["timestamp"] = f.timestamp;
  for (const auto& s : f.sets) jpmr::apply_override(cfg, s);
  return cfg;
}

void print_row(const char* name, double value, const char* unit) {
  std::printf("  %-22s %14.6g %s\n", name, value, unit);
}

int cmd_validate(const CommonFlags& f) {
  const jpmr::DeviceParams p =
      f.device.empty() ? jpmr::table_iv_device() : jpmr::load_device_file(f.device);
  const auto issues = jpmr::check_device(p);
  if (!issues.empty()) {
    for (const auto& d : issues) std::cerr << "error: " << d << "\n";
    return 2;
  }
  const auto d = jpmr::derive_quantities(p);
  using jpmr::kNs;
  using jpmr::kTwoPi;
  using jpmr::kUs;
  std::printf("device %s\n", p.name.c_str());
  print_row("chi/2pi", d.chi / kTwoPi / 1e6, "MHz");
  print_row("2chi/2pi", d.two_chi / kTwoPi / 1e6, "MHz");
  print_row("chi_eff/2pi", d.chi_effective / kTwoPi / 1e6, "MHz");
  print_row("n_crit", d.n_crit, "photons");
  print_row("purcell_T1", d.purcell_T1 / kUs, "us");
  print_row("beta_L", d.beta_L, "");
  print_row("pi/chi", d.pi_over_chi / kNs, "ns");
  print_row("swap_half_period", d.swap_half_period / kNs, "ns");
  print_row("omega_r0/2pi", d.omega_r0 / kTwoPi / 1e9, "GHz");
  print_row("omega_r1/2pi", d.omega_r1 / kTwoPi / 1e9, "GHz");
  std::printf("  %-22s %14s\n", "double_well", d.double_well ? "yes" : "no");
  if (d.beta_L < 1.0) {
    std::cerr << "warning: beta_L = " << d.beta_L
              << " < 1, the JPM potential is single-well and cannot latch a detection\n";
  }
  return 0;
}

void report(const jpmr::Artifacts& a) {
  for (const auto& c : a.csv_files) std::cout << c << "\n";
  std::cout << a.summary_file << "\n";
}

int cmd_calibrate(const nlohmann::json& cfg, bool optimize) {
  auto s = jpmr::setup_from_config(cfg);
  nlohmann::json rec = jpmr::calibration_to_json(s.calib);
  std::string ts = cfg.at("timestamp").get<std::string>();
  if (ts.empty()) ts = jpmr::utc_timestamp();
  if (optimize) {
    auto c = cfg;
    c["experiment"] = "optimize";
    c["timestamp"] = ts;
    const auto a = jpmr::run_experiment(c);
    rec = a.summary.at("record");
    for (const auto& f : a.csv_files) std::cout << f << "\n";
  }
  const auto path = jpmr::artifact_path(cfg.at("out").get<std::string>(), "calibration", ts,
                                        cfg.at("seed").get<std::uint64_t>(), ".json");
  jpmr::write_json(path, {{"config_hash", jpmr::config_hash(cfg)},
                          {"seed", cfg.at("seed")},
                          {"record", rec}});
  std::cout << path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Virtual JPM qubit readout experiments"};
  app.require_subcommand(1);

  CommonFlags vf, rf, pf, cf;
  auto* validate = app.add_subcommand("validate", "check device parameters, print derived quantities");
  validate->add_option("--device", vf.device, "device parameter file (JSON)");

  std::string experiment;
  auto* run = app.add_subcommand("run", "run one experiment");
  run->add_option("experiment", experiment, "experiment name")->required();
  add_common(run, rf);

  std::string figure;
  auto* repro = app.add_subcommand("reproduce", "run a figure preset");
  repro->add_option("figure", figure, "figure id")->required();
  add_common(repro, pf);

  bool optimize = false;
  auto* calib = app.add_subcommand("calibrate", "write the operating-point record");
  add_common(calib, cf);
  calib->add_flag("--optimize", optimize, "refine drive frequency, amplitude and time");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) return cmd_validate(vf);
    if (*run) {
      auto cfg = build_config(rf, run);
      cfg["experiment"] = experiment;
      report(jpmr::run_experiment(cfg));
      return 0;
    }
    if (*repro) {
      report(jpmr::reproduce_figure(figure, build_config(pf, repro)));
      return 0;
    }
    if (*calib) return cmd_calibrate(build_config(cf, calib), optimize);
  } catch (const jpmr::DeviceError& e) {
    for (const auto& d : e.diagnostics()) std::cerr << "error: " << d << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
