#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace deepgate {

/// Every random stream in the toolkit is an mt19937_64 seeded through
/// std::seed_seq with (seed, stream) words. Both are fully specified by the
/// standard, so streams are reproducible across platforms. The helpers below
/// avoid std::*_distribution, whose algorithms are implementation-defined.
using Rng = std::mt19937_64;

inline constexpr std::string_view kRngAlgorithm = "mt19937_64+seed_seq(seed,stream)";

Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

/// Uniform integer in [0, n), n > 0, by rejection sampling.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

/// Uniform double in [0, 1) with 53 random bits.
double uniform01(Rng& rng);

/// Uniform integer in [lo, hi].
std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi);

/// Standard normal via Box-Muller (no cached second variate).
double standard_normal(Rng& rng);

template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_index(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

} // namespace deepgate
