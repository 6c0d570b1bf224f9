#pragma once

// Deterministic random generation. mt19937_64 has a standard-specified
// sequence; all reductions below are our own, so identical seeds give
// identical output on every platform.

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace derivforge {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  std::size_t below(std::size_t n) {
    if (n == 0) throw std::logic_error("Rng::below(0)");
    return static_cast<std::size_t>(next() % n);
  }

  double real() { return (next() >> 11) * 0x1.0p-53; }

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * real(); }

  template <class T>
  const T& pick(const std::vector<T>& items) {
    return items[below(items.size())];
  }

  std::size_t weighted(const std::vector<double>& weights) {
    double total = 0;
    for (double w : weights) total += w;
    if (total <= 0) throw std::logic_error("Rng::weighted: non-positive total");
    double r = real() * total;
    double acc = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (r < acc) return i;
    }
    return weights.size() - 1;
  }

  template <class T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i)
      std::swap(items[i - 1], items[below(i)]);
  }

 private:
  std::mt19937_64 gen_;
};

// splitmix64 finalizer; used to derive independent per-record streams.
inline std::uint64_t mix_seed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return mix_seed(base ^ mix_seed(index + 0x632be59bd9b4e019ULL));
}

}  // namespace derivforge
