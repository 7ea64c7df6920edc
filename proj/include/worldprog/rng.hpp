#ifndef WORLDPROG_RNG_HPP_
#define WORLDPROG_RNG_HPP_

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "worldprog/hash.hpp"

namespace wp {

/// Seeded generator with platform-independent draws. std::mt19937_64 output
/// is fixed by the standard; the distributions below are implemented here
/// because the std ones are not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  /// Index drawn proportionally to nonnegative `weights`; -1 if all zero.
  template <typename Weights>
  int weighted(const Weights& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (total <= 0.0) return -1;
    double x = uniform() * total;
    int last = -1;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      last = static_cast<int>(i);
      if (x < weights[i]) return last;
      x -= weights[i];
    }
    return last;
  }

 private:
  std::mt19937_64 engine_;
};

/// Independent stream seed for a (seed, stream...) tuple.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return hash_combine(hash_combine(seed, a), b);
}

}  // namespace wp

#endif  // WORLDPROG_RNG_HPP_
