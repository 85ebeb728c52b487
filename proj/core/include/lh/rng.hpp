// Counter-based PRNG for reproducible Monte Carlo runs.
//
// SplitMix64: the output at counter k is a fixed hash of (seed + k*GAMMA),
// so a (seed, counter) pair fully determines every draw and parallel trials
// can use independent sub-streams derived from one master seed.
#pragma once

#include <cstdint>
#include <cmath>

namespace lh {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed = 0x9e3779b97f4a7c15ull) : state_(seed), seed_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  bool bernoulli(double p) { return uniform() < p; }

  // +1 with probability p, else -1.
  double pm1(double p) { return bernoulli(p) ? 1.0 : -1.0; }

  // Index in [0, n) sampled from a cumulative scan of weights w (sum ~ 1).
  template <typename Container>
  int categorical(const Container& w) {
    double u = uniform();
    double acc = 0.0;
    int last = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      acc += w[i];
      last = static_cast<int>(i);
      if (u < acc) return last;
    }
    return last;
  }

  std::uint64_t seed() const { return seed_; }

  // Independent sub-stream for trial `index` of a master seed.
  static SplitMix64 substream(std::uint64_t master_seed, std::uint64_t index) {
    SplitMix64 mixer(master_seed ^ (0x51a2b3c4d5e6f708ull + index * 0x2545f4914f6cdd1dull));
    return SplitMix64(mixer.next_u64());
  }

 private:
  std::uint64_t state_;
  std::uint64_t seed_;
};

// Compensated accumulator for long payoff sums.
class KahanSum {
 public:
  void add(double v) {
    double y = v - c_;
    double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }
  void reset() { s_ = 0.0; c_ = 0.0; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

}  // namespace lh
