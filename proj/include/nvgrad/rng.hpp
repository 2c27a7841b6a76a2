#pragma once

#include <cstdint>
#include <random>

namespace nvgrad {

/// Independent stream seed for consumer `stream` of a master seed (splitmix64 mix).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

using Rng = std::mt19937_64;

/// Poisson draw; normal approximation above 1e7 where it is indistinguishable.
inline double poisson_sample(double mean, Rng& rng) {
  if (mean <= 0.0) return 0.0;
  if (mean > 1e7) {
    std::normal_distribution<double> n(mean, std::sqrt(mean));
    const double v = std::round(n(rng));
    return v < 0.0 ? 0.0 : v;
  }
  std::poisson_distribution<long long> p(mean);
  return static_cast<double>(p(rng));
}

}  // namespace nvgrad
