#include "fsd/rng.hpp"

#include <cmath>

namespace fsd {
namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t CounterRng::derive_key(std::uint64_t master_seed,
                                     std::uint64_t trial_id,
                                     std::uint64_t stream) {
  std::uint64_t k = mix64(master_seed + kGamma);
  k = mix64(k + trial_id * 0xD1B54A32D192ED03ULL);
  k = mix64(k + stream * 0x8CB92BA72F3D8DD7ULL);
  return k;
}

std::uint64_t CounterRng::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGamma);
}

double CounterRng::next_uniform() {
  // 53 mantissa bits, shifted into (0,1): never returns an endpoint.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::next_gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

double CounterRng::next_rademacher() {
  return (next_u64() >> 63) ? 1.0 : -1.0;
}

}  // namespace fsd
