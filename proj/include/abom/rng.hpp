#pragma once

#include <cstdint>
#include <vector>

#include "abom/matrix.hpp"

namespace abom {

// Counter-based SplitMix64 stream. Cheap to construct, cheap to split, and
// two streams with different (seed, stream) pairs are decorrelated, which is
// what the per-run / per-generation / per-operator reproducibility scheme
// relies on. Not cryptographic.
class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();

  // Uniform in [0, 1) with 53 random bits.
  double next_double();

  // Uniform in [lo, hi); throws std::invalid_argument unless lo < hi and
  // both are finite.
  double uniform(double lo, double hi);

  // Uniform integer in [0, n); throws std::invalid_argument when n == 0.
  std::size_t next_index(std::size_t n);

  // Derives an independent stream keyed off the current state and `key`.
  // Does not advance this stream.
  RngStream split(std::uint64_t key) const;

  std::uint64_t state() const { return state_; }

 private:
  explicit RngStream(std::uint64_t raw_state) : state_(raw_state) {}
  std::uint64_t state_;
};

// Bernoulli keep-mask: entry is 1 with probability 1 - rate, 0 otherwise.
// rate must lie in [0, 1]. One uniform draw is consumed per entry.
std::vector<std::uint8_t> dropout_mask(std::size_t dim, double rate, RngStream& rng);

// Magnitude carried by each surviving unit under training-mode dropout:
// 1 / (1 - rate), so the masked layer keeps its expected value. Returns 0
// for rate >= 1, where every unit is dropped and the ratio is singular.
double dropout_scale(double rate);

// Latin hypercube sample: n points in the box [lower, upper]^d, one point per
// stratum in every dimension. Requires n >= 1 and lower[j] < upper[j].
Matrix latin_hypercube(std::size_t n, const Vector& lower, const Vector& upper, RngStream& rng);

}  // namespace abom
