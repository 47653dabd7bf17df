#include "abom/rng.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace abom {

namespace {

constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

// SplitMix64 output mixer (Steele, Lea, Flood 2014).
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : state_(mix64(seed + mix64(stream + kGamma))) {}

std::uint64_t RngStream::next_u64() {
  state_ += kGamma;
  return mix64(state_);
}

double RngStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw std::invalid_argument("uniform: invalid interval");
  }
  return lo + (hi - lo) * next_double();
}

std::size_t RngStream::next_index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("next_index: n must be positive");
  // Multiply-shift bound; bias is < 2^-64 * n, negligible for the n used here.
  const unsigned __int128 wide =
      static_cast<unsigned __int128>(next_u64()) * static_cast<unsigned __int128>(n);
  return static_cast<std::size_t>(wide >> 64);
}

RngStream RngStream::split(std::uint64_t key) const {
  return RngStream(mix64(state_ + mix64(key + kGamma)));
}

std::vector<std::uint8_t> dropout_mask(std::size_t dim, double rate, RngStream& rng) {
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw std::invalid_argument("dropout_mask: rate must be in [0, 1]");
  }
  std::vector<std::uint8_t> mask(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    mask[i] = rng.next_double() >= rate ? 1 : 0;
  }
  return mask;
}

double dropout_scale(double rate) {
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw std::invalid_argument("dropout_scale: rate must be in [0, 1]");
  }
  return rate < 1.0 ? 1.0 / (1.0 - rate) : 0.0;
}

Matrix latin_hypercube(std::size_t n, const Vector& lower, const Vector& upper, RngStream& rng) {
  if (n == 0) throw std::invalid_argument("latin_hypercube: need at least one sample");
  if (lower.size() != upper.size()) {
    throw std::invalid_argument("latin_hypercube: bound sizes differ");
  }
  for (std::size_t j = 0; j < lower.size(); ++j) {
    if (!(lower[j] < upper[j]) || !std::isfinite(lower[j]) || !std::isfinite(upper[j])) {
      throw std::invalid_argument("latin_hypercube: invalid bounds");
    }
  }
  const std::size_t d = lower.size();
  Matrix points(n, d);
  std::vector<std::size_t> perm(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < d; ++j) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t k = n - 1; k > 0; --k) {
      std::swap(perm[k], perm[rng.next_index(k + 1)]);
    }
    const double width = upper[j] - lower[j];
    for (std::size_t i = 0; i < n; ++i) {
      const double u = rng.next_double();
      points(i, j) = lower[j] + width * (static_cast<double>(perm[i]) + u) * inv_n;
    }
  }
  return points;
}

}  // namespace abom
