#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "jpmr/io.hpp"
#include "jpmr/run_config.hpp"
#include "jpmr/runner.hpp"

using namespace jpmr;
namespace fs = std::filesystem;

namespace {

const fs::path& scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("jpmr_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

struct Cmd {
  int status = -1;
  std::string output;
};

Cmd jpmsim(const std::string& args, const std::string& env = "") {
  const auto log = scratch() / "cmd.log";
  const std::string line = env + (env.empty() ? "" : " ") + std::string(JPMSIM_EXE) + " " + args +
                           " > " + log.string() + " 2>&1";
  const int rc = std::system(line.c_str());
  Cmd c;
  c.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  c.output = slurp(log);
  return c;
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

}  // namespace

TEST_CASE("csv formatting") {
  CsvTable t{{"a", "b"}, {}};
  t.add({1.0, 0.125});
  t.add({1.0 / 3.0, -2e-12});
  CHECK(format_csv(t) == "a,b\n1,0.125\n0.3333333333,-2e-12\n");
  const auto p = (scratch() / "sub" / "t.csv").string();
  write_csv(p, {"rabi", "0123456789abcdef", 42}, t);
  CHECK(first_line(slurp(p)) == "# experiment=rabi config_hash=0123456789abcdef seed=42");
}

TEST_CASE("fnv-1a reference values") {
  CHECK(fnv1a64_hex("") == "cbf29ce484222325");
  CHECK(fnv1a64_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a64_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("artifact names") {
  CHECK(artifact_path("out", "rabi", "20260101T000000Z", 7, ".csv") ==
        (fs::path("out") / "rabi_20260101T000000Z_7.csv").string());
  const auto ts = utc_timestamp();
  CHECK(ts.size() == 16);
  CHECK(ts[8] == 'T');
  CHECK(ts.back() == 'Z');
}

TEST_CASE("config overrides") {
  auto c = default_run_config();
  apply_override(c, "errors.gate_error=0.002");
  CHECK(c["errors"]["gate_error"] == 0.002);
  apply_override(c, "params.mitigation=full");
  CHECK(c["params"]["mitigation"] == "full");
  apply_override(c, "shots=12");
  CHECK(c["shots"] == 12);
  apply_override(c, "params.scan_amp=1");
  CHECK(c["params"]["scan_amp"] == 1);

  SUBCASE("unknown key named") {
    try {
      apply_override(c, "errors.gate_eror=0.1");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("errors.gate_eror") != std::string::npos);
    }
  }
  SUBCASE("wrong type") { CHECK_THROWS_AS(apply_override(c, "shots=many"), ConfigError); }
  SUBCASE("malformed") { CHECK_THROWS_AS(apply_override(c, "shots"), ConfigError); }
  SUBCASE("merge rejects unknown nested keys") {
    CHECK_THROWS_AS(merge_config(c, {{"params", {{"bogus", 1}}}}), ConfigError);
  }
  SUBCASE("error model validation") {
    auto e = c["errors"];
    e["gate_error"] = 1.5;
    CHECK_THROWS_AS(error_model_from_config(e), ConfigError);
    e["gate_error"] = 0.001;
    e["T1_q"] = 0.0;
    CHECK_THROWS_AS(error_model_from_config(e), ConfigError);
  }
}

TEST_CASE("config hash ignores output location") {
  auto a = default_run_config();
  auto b = a;
  b["out"] = "/elsewhere";
  b["timestamp"] = "20200101T000000Z";
  CHECK(config_hash(a) == config_hash(b));
  b["seed"] = 2;
  CHECK(config_hash(a) != config_hash(b));
  auto d = a;
  d["device"] = std::string(JPMR_SOURCE_DIR) + "/configs/chip1.json";
  CHECK(config_hash(d).size() == 16);
}

TEST_CASE("figure presets") {
  const std::vector<std::string> ids = {"4b", "4c", "4d", "5", "6a", "6b", "7c", "8", "9", "10", "11", "12"};
  CHECK(figure_presets().size() == ids.size());
  for (const auto& id : ids) CHECK(find_preset(id).figure == id);
  CHECK_THROWS_AS(find_preset("99"), ConfigError);
  auto c = default_run_config();
  c["experiment"] = "warp";
  CHECK_THROWS_AS(run_experiment(c), ConfigError);
}

TEST_CASE("validate subcommand") {
  SUBCASE("derived table") {
    const auto r = jpmsim("validate --device " + std::string(JPMR_SOURCE_DIR) + "/configs/chip1.json");
    CHECK(r.status == 0);
    CHECK(r.output.find("n_crit") != std::string::npos);
    CHECK(r.output.find("13.28") != std::string::npos);
    CHECK(r.output.find("pi/chi") != std::string::npos);
  }
  SUBCASE("missing field") {
    auto j = device_to_json(table_iv_device());
    j.erase("C_j");
    const auto path = scratch() / "nocj.json";
    write_json(path.string(), j);
    const auto r = jpmsim("validate --device " + path.string());
    CHECK(r.status != 0);
    CHECK(r.output.find("'C_j'") != std::string::npos);
  }
  SUBCASE("single-well warning") {
    auto j = device_to_json(table_iv_device());
    j["I0_j"] = 0.25e-6;
    const auto path = scratch() / "single.json";
    write_json(path.string(), j);
    const auto r = jpmsim("validate --device " + path.string());
    CHECK(r.output.find("single-well") != std::string::npos);
  }
}

TEST_CASE("run subcommand") {
  const auto out = (scratch() / "run").string();
  SUBCASE("rabi") {
    const auto r = jpmsim("run rabi --shots 5000 --seed 7 --timestamp T1 --out " + out);
    REQUIRE(r.status == 0);
    const auto csv = fs::path(out) / "rabi_T1_7.csv";
    const auto js = fs::path(out) / "rabi_T1_7.json";
    REQUIRE(fs::exists(csv));
    REQUIRE(fs::exists(js));
    CHECK(first_line(slurp(csv)).find("seed=7") != std::string::npos);
    const auto sum = nlohmann::json::parse(slurp(js));
    CHECK(sum["seed"] == 7);
    CHECK(sum["result"]["n_shots"] == 5000);
    CHECK(sum["result"].contains("budget"));
    CHECK(sum["config_hash"].get<std::string>() ==
          first_line(slurp(csv)).substr(first_line(slurp(csv)).find("config_hash=") + 12, 16));
  }
  SUBCASE("frequency scan") {
    const auto r = jpmsim("run scan2d --axes freq,time --shots 200 --seed 3 --timestamp T2 --out " + out);
    REQUIRE(r.status == 0);
    const auto csv = fs::path(out) / "scan2d-freq_T2_3.csv";
    REQUIRE(fs::exists(csv));
    std::istringstream is(slurp(csv));
    std::string line;
    std::getline(is, line);
    std::getline(is, line);
    CHECK(line == "freq_GHz,t_ns,p1_prep0,p1_prep1,diff");
  }
  SUBCASE("invalid key") {
    const auto r = jpmsim("run rabi --set errors.bogus=1 --out " + out);
    CHECK(r.status != 0);
    CHECK(r.output.find("errors.bogus") != std::string::npos);
  }
  SUBCASE("unknown experiment") {
    const auto r = jpmsim("run warp --out " + out);
    CHECK(r.status != 0);
    CHECK(r.output.find("warp") != std::string::npos);
  }
  SUBCASE("output directory from the environment") {
    const auto env_out = (scratch() / "envout").string();
    const auto r = jpmsim("run pointer --seed 2 --timestamp T3", "JPMSIM_OUT=" + env_out);
    REQUIRE(r.status == 0);
    CHECK(fs::exists(fs::path(env_out) / "pointer_T3_2.csv"));
  }
}

TEST_CASE("reproduce subcommand") {
  const auto out = (scratch() / "repro").string();
  SUBCASE("stability histogram") {
    const auto r = jpmsim("reproduce 6b --seed 5 --timestamp T4 --set params.determinations=200 --out " + out);
    REQUIRE(r.status == 0);
    const auto sum = nlohmann::json::parse(slurp(fs::path(out) / "stability_T4_5.json"));
    CHECK(sum["result"].contains("mean"));
    CHECK(sum["result"].contains("std"));
    const auto csv = slurp(fs::path(out) / "stability_T4_5.csv");
    CHECK(csv.find("bin_lo,bin_hi,count") != std::string::npos);
  }
  SUBCASE("S-curves") {
    const auto r = jpmsim("reproduce 4d --seed 5 --timestamp T5 --out " + out);
    REQUIRE(r.status == 0);
    const auto csv = slurp(fs::path(out) / "scurve_T5_5.csv");
    CHECK(csv.find("amplitude_phi0,p_tunnel_g,p_tunnel_e") != std::string::npos);
  }
  SUBCASE("unknown figure") {
    const auto r = jpmsim("reproduce 99 --out " + out);
    CHECK(r.status != 0);
    CHECK(r.output.find("99") != std::string::npos);
  }
  SUBCASE("same seed, same bytes") {
    const auto a = (scratch() / "ra").string(), b = (scratch() / "rb").string();
    REQUIRE(jpmsim("reproduce 9 --seed 11 --shots 2000 --timestamp T6 --out " + a).status == 0);
    REQUIRE(jpmsim("reproduce 9 --seed 11 --shots 2000 --timestamp T6 --out " + b).status == 0);
    int n = 0;
    for (const auto& e : fs::directory_iterator(a)) {
      if (e.path().extension() != ".csv") continue;
      CHECK(slurp(e.path()) == slurp(fs::path(b) / e.path().filename()));
      CHECK(first_line(slurp(e.path())).rfind("# experiment=", 0) == 0);
      ++n;
    }
    CHECK(n == 2);
  }
}

TEST_CASE("calibrate subcommand") {
  const auto out = (scratch() / "cal").string();
  const auto r = jpmsim("calibrate --seed 1 --timestamp T7 --out " + out);
  REQUIRE(r.status == 0);
  const auto j = nlohmann::json::parse(slurp(fs::path(out) / "calibration_T7_1.json"));
  const auto rec = calibration_from_json(j["record"]);
  CHECK(rec.complete());
}
