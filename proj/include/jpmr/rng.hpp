#pragma once

#include <cstdint>

namespace jpmr {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z);

/// Counter-based random stream. A (seed, stream) pair fully determines the
/// sequence, so shot i of a run can be replayed without touching shots
/// 0..i-1 and shot-level parallelism cannot change results.
///
/// Algorithm: state0 = mix64(seed XOR mix64(stream * G + C)) with G the
/// 64-bit golden-ratio constant; each draw advances state by G and returns
/// mix64(state). Distributions are implemented here rather than taken from
/// <random> so the byte stream is identical across standard libraries.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1].
  double uniform_pos();
  bool bernoulli(double p);
  double normal();
  double exponential(double mean);
  int poisson(double mu);

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Stream id for a (block, index) pair, used to separate e.g. different
/// scan cells or experiment arms that share one seed.
std::uint64_t stream_id(std::uint64_t block, std::uint64_t index);

}  // namespace jpmr
