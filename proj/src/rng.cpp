#include "jpmr/rng.hpp"

#include <cmath>

#include "jpmr/units.hpp"

namespace jpmr {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kOffset = 0xD1B54A32D192ED03ULL;

int poisson_inversion(Rng& r, double mu) {
  const double u = r.uniform();
  double p = std::exp(-mu);
  double F = p;
  int k = 0;
  while (u >= F && k < 10000) {
    ++k;
    p *= mu / k;
    F += p;
    if (p == 0.0 && static_cast<double>(k) > mu) break;
  }
  return k;
}
}  // namespace

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t stream_id(std::uint64_t block, std::uint64_t index) {
  return mix64(block * kGolden + kOffset) ^ index;
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : state_(mix64(seed ^ mix64(stream * kGolden + kOffset))) {}

std::uint64_t Rng::next_u64() {
  state_ += kGolden;
  return mix64(state_);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform_pos() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

bool Rng::bernoulli(double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return uniform() < p;
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = uniform_pos();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(kTwoPi * u2);
  have_spare_ = true;
  return r * std::cos(kTwoPi * u2);
}

double Rng::exponential(double mean) { return -mean * std::log(uniform_pos()); }

int Rng::poisson(double mu) {
  if (!(mu > 0.0)) return 0;
  int k = 0;
  while (mu > 30.0) {
    k += poisson_inversion(*this, 30.0);
    mu -= 30.0;
  }
  return k + poisson_inversion(*this, mu);
}

}  // namespace jpmr
