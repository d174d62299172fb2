#pragma once

#include <cstdint>

namespace fsd {

/// Counter-based pseudorandom generator (SplitMix64 output function over a
/// keyed counter). Each (key, counter) pair maps to one 64-bit word, so
/// independent streams never share state and replay is exact for any
/// execution order.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  /// Key for stream `stream` of trial `trial_id` under `master_seed`.
  /// stream 0 = design, stream 1 = noise.
  static std::uint64_t derive_key(std::uint64_t master_seed,
                                  std::uint64_t trial_id, std::uint64_t stream);

  std::uint64_t next_u64();

  /// Uniform on the open interval (0, 1).
  double next_uniform();

  /// Standard normal via Box-Muller (uses two uniforms, caches the spare).
  double next_gaussian();

  /// +1 or -1 with equal probability.
  double next_rademacher();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fsd
