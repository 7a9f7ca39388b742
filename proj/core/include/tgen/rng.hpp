#pragma once

#include <cstdint>
#include <random>

namespace tgen {

// splitmix64, used to derive independent per-worker seeds from a base seed.
inline std::uint64_t split_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() { return uni_(gen_); }
  double normal() { return norm_(gen_); }
  // uniform integer in [0, n)
  std::uint64_t index(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(gen_);
  }
  std::mt19937_64& engine() { return gen_; }

  Rng derive(std::uint64_t index_) const {
    return Rng(split_seed(state_seed_hint_, index_));
  }

  static Rng seeded(std::uint64_t seed) {
    Rng r(seed);
    r.state_seed_hint_ = seed;
    return r;
  }

 private:
  std::mt19937_64 gen_;
  std::uint64_t state_seed_hint_ = 0;
  std::uniform_real_distribution<double> uni_{0.0, 1.0};
  std::normal_distribution<double> norm_{0.0, 1.0};
};

}  // namespace tgen
