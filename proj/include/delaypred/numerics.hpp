#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string>

namespace delaypred {

inline constexpr std::uint64_t kDefaultSeed = 0xC0FFEE;

std::uint64_t splitmix64(std::uint64_t x);

/// Independent per-trajectory seed: base XOR hash(index).
inline std::uint64_t seed_for(std::uint64_t base, std::uint64_t index) {
  return base ^ splitmix64(index);
}

/// Seeded generator whose double conversion does not depend on the standard
/// library's distribution implementations, so streams replay bit-identically.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal (Box-Muller, no cached second draw).
  double normal();

 private:
  std::mt19937_64 engine_;
};

struct ScalarOptimum {
  double argmax;
  double value;
};

/// Golden-section maximisation of a unimodal f on [lo, hi].
ScalarOptimum golden_section_maximize(const std::function<double(double)>& f,
                                      double lo, double hi, double tol);

/// Worker count from DELAYPRED_THREADS (0 or unset = hardware concurrency).
unsigned worker_count();

/// Number of chunks parallel_chunks will use for `count` items.
std::size_t chunk_count(std::size_t count);

/// Splits [0, count) into contiguous chunks and runs body(begin, end, chunk)
/// on chunk_count(count) threads. Reductions over chunks must be
/// order-independent (max with lowest-index tie-break).
std::size_t parallel_chunks(
    std::size_t count,
    const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

/// Locale-independent shortest-form rendering with `digits` significant digits.
std::string format_double(double v, int digits = 17);
/// Locale-independent fixed-point rendering.
std::string format_fixed(double v, int decimals);

}  // namespace delaypred
