#include <cmath>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "jpmr/experiments.hpp"
#include "jpmr/sequencer.hpp"
#include "jpmr/shot.hpp"
#include "jpmr/units.hpp"

using namespace jpmr;

namespace {

double sampled_p1(const ShotSimulator& sim, double angle, const ErrorModel& em, int n,
                  std::uint64_t seed) {
  Rng rng(seed, 0);
  int ones = 0;
  for (int i = 0; i < n; ++i) ones += sim.run_shot(angle, em, rng).outcome;
  return static_cast<double>(ones) / n;
}

}  // namespace

TEST_CASE("default schedule timing") {
  const auto s = default_setup();
  const auto sch = s.build_schedule();
  REQUIRE(sch.find(SegmentKind::qubit_gate));
  CHECK(sch.find(SegmentKind::qubit_gate)->duration_ns == 15);
  CHECK(sch.find(SegmentKind::pointer_drive)->duration_ns == 105);
  CHECK(sch.find(SegmentKind::photodetect)->duration_ns == 5);
  CHECK(sch.find(SegmentKind::tunnel_bias)->duration_ns == 10);
  CHECK(sch.find(SegmentKind::relax)->duration_ns == 30);
  CHECK(sch.find(SegmentKind::jpm_readout)->duration_ns == 250);
  const auto* rr = sch.find(SegmentKind::resonator_reset);
  const auto* qr = sch.find(SegmentKind::qubit_reset);
  REQUIRE(rr);
  REQUIRE(qr);
  CHECK(rr->duration_ns + qr->duration_ns == 200);
  CHECK(sch.pre_reset_duration_ns() == 15 + 105 + 5 + 10 + 30 + 250);
  CHECK(sch.pre_reset_duration_ns() < 500);
  CHECK(sch.total_duration_ns() <= 700);

  std::int64_t prev_end = 0;
  for (const auto& seg : sch.segments) {
    CHECK(seg.start_ns >= prev_end);
    prev_end = seg.end_ns();
  }
}

TEST_CASE("200 ns drive variant") {
  auto s = default_setup();
  s.calib.t_d = 200e-9;
  CHECK(s.build_schedule().pre_reset_duration_ns() < 600);
}

TEST_CASE("identity preparation keeps the total") {
  auto s = default_setup();
  const auto full = s.build_schedule();
  s.schedule.gate_ns = 0;
  s.schedule.gate_angle = 0.0;
  const auto id = s.build_schedule();
  CHECK_NOTHROW(validate_schedule(id));
  CHECK(id.total_duration_ns() == full.total_duration_ns());
}

TEST_CASE("missing calibration fields are listed") {
  CalibrationRecord r;
  r.omega_d = 1.0;
  try {
    build_default_schedule(table_iv_device(), r);
    FAIL("expected MissingCalibrationError");
  } catch (const MissingCalibrationError& e) {
    const auto& f = e.fields();
    CHECK(std::find(f.begin(), f.end(), "t_d") != f.end());
    CHECK(std::find(f.begin(), f.end(), "tunnel_amplitude") != f.end());
    CHECK(std::find(f.begin(), f.end(), "omega_d") == f.end());
  }
  auto s = default_setup();
  s.calib.t_d = 2e-6;
  CHECK_THROWS_AS(build_default_schedule(s.device, s.calib), MissingCalibrationError);
}

TEST_CASE("overlap and fractional timing are rejected") {
  auto sch = default_setup().build_schedule();
  auto bad = sch;
  bad.find(SegmentKind::relax)->start_ns -= 3;
  CHECK_THROWS_AS(validate_schedule(bad), ScheduleError);
  auto s = default_setup();
  s.calib.t_d = 105.5e-9;
  CHECK_THROWS_AS(s.build_schedule(), ScheduleError);
}

TEST_CASE("schedule text round trip") {
  const auto sch = default_setup().build_schedule();
  const auto text = serialize_schedule(sch);
  const auto back = parse_schedule(text);
  CHECK(back == sch);
  CHECK(serialize_schedule(back) == text);
  CHECK(text.rfind("channel,start_ns,duration_ns,kind,params\n", 0) == 0);
  CHECK_THROWS_AS(parse_schedule("xy,0,15,warp,\n"), ScheduleError);
}

TEST_CASE("gate envelope") {
  SUBCASE("15 ns cosine is symmetric with zero ends") {
    const auto g = gate_envelope("cosine", 15);
    REQUIRE(g.envelope.size() == 15);
    CHECK(g.envelope.front() == 0.0);
    CHECK(g.envelope.back() == 0.0);
    CHECK(g.envelope[7] == doctest::Approx(1.0));
    for (std::size_t k = 0; k < 15; ++k) {
      CHECK(g.envelope[k] == doctest::Approx(g.envelope[14 - k]).epsilon(1e-12));
      CHECK(g.derivative[k] == doctest::Approx(-g.derivative[14 - k]).epsilon(1e-12));
    }
    for (std::size_t k = 1; k + 1 < 15; ++k) {
      const double central = 0.5 * (g.envelope[k + 1] - g.envelope[k - 1]);
      CHECK(g.derivative[k] == doctest::Approx(central).epsilon(0.05));
    }
  }
  SUBCASE("2 ns gives two zero samples") {
    const auto g = gate_envelope("cosine", 2);
    REQUIRE(g.envelope.size() == 2);
    CHECK(g.envelope[0] == 0.0);
    CHECK(g.envelope[1] == 0.0);
  }
  SUBCASE("area grows linearly with the span") {
    auto area = [](std::int64_t n) {
      const auto g = gate_envelope("cosine", n);
      return std::accumulate(g.envelope.begin(), g.envelope.end(), 0.0);
    };
    CHECK(area(31) == doctest::Approx(2.0 * area(16)).epsilon(1e-12));
    CHECK(area(61) == doctest::Approx(4.0 * area(16)).epsilon(1e-12));
  }
  SUBCASE("bad arguments") {
    CHECK_THROWS(gate_envelope("cosine", 0));
    CHECK_THROWS(gate_envelope("gauss", 10));
  }
}

TEST_CASE("waveform export has one row per ns") {
  const auto sch = default_setup().build_schedule();
  std::ostringstream os;
  write_waveforms_csv(os, sch);
  const auto text = os.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == sch.total_duration_ns() + 1);
}

TEST_CASE("single shots without qubit errors") {
  const auto s = default_setup();
  const auto sim = s.simulator();
  const auto em = ErrorModel::detector_only();
  const double p11 = sim.expected_p1(kPi, em);
  const double p10 = sim.expected_p1(0.0, em);
  CHECK(p11 >= 0.999);
  CHECK(1.0 - p10 >= 0.994);
  const int n = 100000;
  CHECK(std::abs(sampled_p1(sim, kPi, em, n, 1) - p11) < 4 * std::sqrt(p11 * (1 - p11) / n) + 1e-5);
  CHECK(std::abs(sampled_p1(sim, 0.0, em, n, 2) - p10) < 4 * std::sqrt(p10 * (1 - p10) / n));
}

TEST_CASE("no drive leaves only dark counts") {
  auto s = default_setup();
  s.calib.epsilon = 0.0;
  const auto sim = s.simulator();
  const auto em = ErrorModel::detector_only();
  CHECK(sim.n_bar(QubitState::g) == 0.0);
  CHECK(sim.n_bar(QubitState::e) == 0.0);
  const double d = sim.dark_count();
  const double r = sim.retrap(), e = sim.iq_error();
  const double oracle = d * (1 - r) * (1 - e) + (1 - d * (1 - r)) * e;
  CHECK(sim.expected_p1(kPi, em) == doctest::Approx(oracle).epsilon(1e-9));
  CHECK(std::abs(sim.expected_p1(0.0, em) - d) < 1e-4);
  const int n = 200000;
  CHECK(std::abs(sampled_p1(sim, kPi, em, n, 3) - oracle) < 4 * std::sqrt(oracle / n));
}

TEST_CASE("noiseless chain is perfect") {
  const auto sim = default_setup().simulator();
  const auto em = ErrorModel::noiseless();
  CHECK(sampled_p1(sim, kPi, em, 50000, 4) == 1.0);
  CHECK(sampled_p1(sim, 0.0, em, 50000, 5) == 0.0);
  CHECK(sim.expected_p1(kPi, em) - sim.expected_p1(0.0, em) == 1.0);
}

TEST_CASE("shots are reproducible from the stream") {
  const auto sim = default_setup().simulator();
  const ErrorModel em;
  Rng a(77, stream_id(3, 9)), b(77, stream_id(3, 9));
  for (int i = 0; i < 2000; ++i) {
    const auto x = sim.run_shot(kPi, em, a);
    const auto y = sim.run_shot(kPi, em, b);
    CHECK(x.outcome == y.outcome);
    CHECK(x.quanta == y.quanta);
    CHECK(x.decayed == y.decayed);
    CHECK(x.decay_fraction == y.decay_fraction);
  }
}

TEST_CASE("sampled chain converges to the exact expectation") {
  const auto sim = default_setup().simulator();
  const ErrorModel em;
  for (double a : {0.0, 0.7, kPi / 2, 2.2, kPi}) {
    const double p = sim.expected_p1(a, em);
    const int n = 60000;
    CHECK(std::abs(sampled_p1(sim, a, em, n, 10) - p) < 4.5 * std::sqrt(p * (1 - p) / n) + 1e-5);
  }
}

TEST_CASE("swapped mapping keeps the noiseless fidelity") {
  auto s = default_setup();
  s.shot.swap_mapping = true;
  const auto sim = s.simulator();
  const auto em = ErrorModel::noiseless();
  CHECK(sim.expected_p1(kPi, em) - sim.expected_p1(0.0, em) == 1.0);
  CHECK(sampled_p1(sim, kPi, em, 20000, 6) == 1.0);
  CHECK(sampled_p1(sim, 0.0, em, 20000, 7) == 0.0);
}
