#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "doctest.h"
#include "jpmr/device.hpp"
#include "jpmr/units.hpp"

using namespace jpmr;

namespace {

constexpr double MHz = kTwoPi * 1e6;
constexpr double GHz = kTwoPi * 1e9;

// Second, separately written transmon dispersive shift.
double chi_oracle(double g_hz, double delta_hz, double eta_hz) {
  const double num = eta_hz * g_hz * g_hz;
  const double den = delta_hz * delta_hz + delta_hz * eta_hz;
  return num / den;
}

DeviceParams at_qubit(double f_q_ghz) {
  auto p = table_iv_device();
  p.omega_q_op = f_q_ghz * GHz;
  return p;
}

bool mentions(const std::vector<std::string>& diag, const std::string& key) {
  for (const auto& d : diag) {
    if (d.find("'" + key + "'") != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("chi matches an independent evaluation for the chip parameters") {
  const double chi = derive_chi(90 * MHz, -656 * MHz, -225 * MHz);
  const double oracle = chi_oracle(90e6, -656e6, -225e6);
  CHECK(chi / kTwoPi == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(std::abs(chi) / MHz == doctest::Approx(3.15).epsilon(0.005));
  CHECK(chi < 0.0);
}

TEST_CASE("chi vanishes without coupling") { CHECK(derive_chi(0.0, -656 * MHz, -225 * MHz) == 0.0); }

TEST_CASE("measured splitting lies within 30 percent of the formula") {
  const auto p = table_iv_device();
  const double formula = 2.0 * std::abs(derive_chi(p));
  CHECK(std::abs(formula - 7.4 * MHz) / (7.4 * MHz) < 0.30);
  CHECK(effective_two_chi(p) / MHz == doctest::Approx(7.4));
  auto q = p;
  q.measured_two_chi.reset();
  CHECK(effective_two_chi(q) == doctest::Approx(formula));
}

TEST_CASE("chi agrees with the oracle over random parameters") {
  std::uint64_t s = 12345;
  auto u = [&] {
    s = s * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>(s >> 11) / 9007199254740992.0;
  };
  for (int i = 0; i < 500; ++i) {
    const double g = 10e6 + 200e6 * u();
    const double eta = -(50e6 + 400e6 * u());
    const double delta = (u() < 0.5 ? -1 : 1) * (g + 50e6 + 2e9 * u());
    if (std::abs(delta + eta) < 2 * g) continue;
    const double got = derive_chi(g * kTwoPi, delta * kTwoPi, eta * kTwoPi) / kTwoPi;
    CHECK(got == doctest::Approx(chi_oracle(g, delta, eta)).epsilon(1e-12));
  }
}

TEST_CASE("straddling regime is rejected") {
  CHECK_THROWS_AS(derive_chi(90 * MHz, 225 * MHz, -225 * MHz), DispersiveError);
  CHECK_THROWS_AS(derive_chi(90 * MHz, 0.0, -225 * MHz), DispersiveError);
}

TEST_CASE("purcell limit") {
  SUBCASE("5.1 GHz operating point near 66 us") {
    CHECK(purcell_limit(at_qubit(5.1)) / kUs == doctest::Approx(66.0).epsilon(0.05));
  }
  SUBCASE("5.037 GHz near 81 us") {
    const double oracle = std::pow(656.0 / 90.0, 2) * 1.53;  // Delta^2/(g^2 kappa) in us
    CHECK(purcell_limit(at_qubit(5.037)) / kUs == doctest::Approx(oracle).epsilon(1e-9));
    CHECK(oracle == doctest::Approx(81.0).epsilon(0.01));
  }
  SUBCASE("no coupling is unbounded") {
    auto p = table_iv_device();
    p.g_qr = 0.0;
    CHECK(std::isinf(purcell_limit(p)));
  }
  SUBCASE("scales with Delta squared") {
    auto p = table_iv_device();
    const double t0 = purcell_limit(p);
    p.omega_q_op = p.omega_r_bare + 3.0 * (p.omega_q_op - p.omega_r_bare);
    CHECK(purcell_limit(p) == doctest::Approx(9.0 * t0).epsilon(1e-12));
  }
}

TEST_CASE("critical photon number") {
  CHECK(n_crit(table_iv_device()) == doctest::Approx(656.0 * 656.0 / (4 * 90.0 * 90.0)));
  CHECK(n_crit(table_iv_device()) == doctest::Approx(13.3).epsilon(0.01));
  CHECK(n_crit(at_qubit(5.1)) == doctest::Approx(10.85).epsilon(0.005));
  auto p = table_iv_device();
  p.omega_q_op = p.omega_r_bare - 2.0 * p.g_qr;
  CHECK(n_crit(p) == doctest::Approx(1.0).epsilon(1e-12));

  SUBCASE("invariant under a common scale of g and Delta") {
    auto q = table_iv_device();
    const double n0 = n_crit(q);
    q.g_qr *= 1.7;
    q.omega_q_op = q.omega_r_bare + 1.7 * (q.omega_q_op - q.omega_r_bare);
    CHECK(n_crit(q) == doctest::Approx(n0).epsilon(1e-12));
  }
}

TEST_CASE("screening parameter") {
  const auto p = table_iv_device();
  const double oracle = 2 * 3.14159265358979 * 1.3e-9 * 1.4e-6 / 2.067833848e-15;
  CHECK(beta_L(p).value == doctest::Approx(oracle).epsilon(1e-9));
  CHECK(beta_L(p).value == doctest::Approx(5.5).epsilon(0.01));
  CHECK(beta_L(p).double_well);

  auto q = p;
  q.I0_j = 0.25e-6;
  CHECK(beta_L(q).value == doctest::Approx(0.99).epsilon(0.005));
  CHECK_FALSE(beta_L(q).double_well);
  q.I0_j = 0.0;
  CHECK(beta_L(q).value == 0.0);
  CHECK_FALSE(beta_L(q).double_well);
}

TEST_CASE("derived quantity table") {
  const auto d = derive_quantities(table_iv_device());
  CHECK(d.two_chi == doctest::Approx(2.0 * std::abs(d.chi)));
  CHECK(d.pi_over_chi == doctest::Approx(kPi / d.chi_effective));
  CHECK(d.pi_over_chi / kNs == doctest::Approx(135.1).epsilon(0.001));
  CHECK(d.swap_half_period / kNs == doctest::Approx(1e9 / (4 * 62e6)).epsilon(1e-12));
  CHECK(d.swap_half_period / kNs == doctest::Approx(4.03).epsilon(0.02));
  CHECK(d.n_crit == doctest::Approx(std::pow(d.delta_qr / (90 * MHz), 2) / 4).epsilon(1e-14));
  CHECK(d.omega_r0 - d.omega_r1 == doctest::Approx(7.4 * MHz));
}

TEST_CASE("invariant violations name the field") {
  auto p = table_iv_device();
  p.eta = 225 * MHz;
  p.kappa_r = -1.0;
  const auto diag = check_device(p);
  CHECK(mentions(diag, "eta"));
  CHECK(mentions(diag, "kappa_r"));
  CHECK_THROWS_AS(validate_device(p), DeviceError);

  auto r = table_iv_device();
  r.omega_q_op = r.omega_r_bare + 0.5 * r.g_qr;
  CHECK(mentions(check_device(r), "omega_q_op"));
}

TEST_CASE("device file") {
  const std::string path = std::string(JPMR_SOURCE_DIR) + "/configs/chip1.json";
  const auto p = load_device_file(path);
  const auto t = table_iv_device();
  CHECK(p.omega_r_bare == doctest::Approx(t.omega_r_bare));
  CHECK(p.kappa_r == doctest::Approx(t.kappa_r));
  CHECK(p.I0_j == doctest::Approx(t.I0_j));
  CHECK(*p.measured_two_chi == doctest::Approx(*t.measured_two_chi));
  CHECK(p.kerr == doctest::Approx(t.kerr));

  SUBCASE("json round trip") {
    const auto q = device_from_json(device_to_json(t));
    CHECK(q.g_jr == doctest::Approx(t.g_jr).epsilon(1e-15));
    CHECK(q.C_xy == doctest::Approx(t.C_xy).epsilon(1e-15));
  }
  SUBCASE("missing field is named") {
    auto j = device_to_json(t);
    j.erase("g_qr");
    try {
      device_from_json(j);
      FAIL("expected DeviceError");
    } catch (const DeviceError& e) {
      CHECK(mentions(e.diagnostics(), "g_qr"));
    }
  }
  SUBCASE("unknown key is named") {
    auto j = device_to_json(t);
    j["g_rq"] = 1.0;
    try {
      device_from_json(j);
      FAIL("expected DeviceError");
    } catch (const DeviceError& e) {
      CHECK(mentions(e.diagnostics(), "g_rq"));
    }
  }
}
