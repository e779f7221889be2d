#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace fanet {

// Deterministic pseudo-random stream built on splitmix64. We avoid the
// standard <random> distributions on purpose: their output is
// implementation-defined, and reproducibility across toolchains matters more
// here than statistical sophistication.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Derives an independent stream for a named subsystem. Forking with the
  // same label from the same parent always yields the same child, so a single
  // top-level seed fans out to wave phases, weight init, shuffling, dropout
  // and noise without the streams stepping on each other.
  Rng fork(std::string_view label) const {
    std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a over the label bytes
    for (char c : label) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ull;
    }
    Rng child(state_ ^ h);
    child.next_u64();  // burn one output so parent and child diverge
    return child;
  }

  std::uint64_t stream_seed(std::string_view label) const {
    Rng child = fork(label);
    return child.next_u64();
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; caches the second variate.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  // Uniform integer in [0, n). Uses the widening-multiply trick; the residual
  // bias is ~n / 2^64, irrelevant at the scales used here.
  std::size_t below(std::size_t n) {
    using u128 = unsigned __int128;
    return static_cast<std::size_t>(
        (static_cast<u128>(next_u64()) * static_cast<u128>(n)) >> 64);
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
      std::size_t j = below(i + 1);
      std::swap(v[i], v[j]);
    }
  }

 private:
  std::uint64_t state_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace fanet
