#pragma once

#include <cstdint>

namespace socialcloud {

/// SplitMix64 (Steele, Lea, Flood 2014). Chosen over std::mt19937_64 because
/// the whole generator is ~10 lines, trivially portable, and reproducible
/// from the written-down constants alone; results must not depend on a
/// standard library's distribution internals.
///
/// Stream protocol for one simulation cell, in consumption order:
///   1. outsourcer selection: one next_double() per node with degree >= 1,
///      nodes in ascending id order; the node outsources iff draw < p.
///   2. task sizes: one next_below(span) per selected outsourcer, ascending
///      outsourcer id (constant-size models consume nothing).
///   3. node failures, when enabled: per node with degree >= 1 in ascending
///      id order, one next_double() for the Bernoulli draw, and one
///      next_below(span_micro + 1) for the failure time iff the node fails.
/// Anything else (nothing today) draws after these.
class split_mix64 {
public:
  explicit split_mix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1): top 53 bits scaled, the usual double construction.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). Plain modulo; the bias for our n (task size
  /// spans around 1e9 against 2^64) is below 1e-10 and irrelevant next to
  /// the sampling noise we average over, so rejection sampling would add
  /// state-consumption variability for nothing.
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

private:
  std::uint64_t state_;
};

/// One mixing step of SplitMix64 as a pure function; used to spread seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  std::uint64_t z = x + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed for experiment cell `index` under `master`. Decorrelates cells while
/// keeping the whole experiment reproducible from one number.
inline std::uint64_t derive_cell_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(master ^ mix64(index + 1));
}

} // namespace socialcloud
