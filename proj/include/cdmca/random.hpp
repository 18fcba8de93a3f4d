#pragma once

#include <cstdint>
#include <optional>
#include <random>

namespace cdmca {

std::uint64_t splitmix64(std::uint64_t x);

/// Seed for sub-stream `counter` of `master`: splitmix64(master + (counter + 1) * 0x9E3779B97F4A7C15).
/// Cross-validation repeat r uses counter r; data generation uses counter 0 of its own seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter);

/// mt19937_64 with hand-written variate transforms. The standard library's
/// distributions are implementation-defined, so they are avoided to keep draws
/// identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace cdmca
