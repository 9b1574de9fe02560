#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace polaron {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based child seed: folds each index into the master seed in order.
/// Scan cells use derive_seed(master, {i_delta, i_alpha, i_T}).
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> counters) {
  std::uint64_t h = mix64(master);
  for (auto c : counters) h = mix64(h ^ mix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

class NormalSource {
 public:
  explicit NormalSource(Rng& rng) : rng_(rng) {}
  double operator()() { return dist_(rng_); }

 private:
  Rng& rng_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace polaron
