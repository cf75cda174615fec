#pragma once

#include <cstdint>
#include <random>

namespace maac {

// Deterministic RNG with portable uniform draws. All stochastic decisions in
// the framework (macro sampling, env noise, init) go through this so that a
// fixed seed reproduces a run bit-exactly.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1), 53-bit mantissa, independent of stdlib distributions
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n)
  int uniform_int(int n) {
    return static_cast<int>(static_cast<double>(n) * uniform());
  }

  // sample an index from a discrete distribution given as probabilities
  template <class Vec>
  int sample(const Vec& probs) {
    double u = uniform();
    double acc = 0.0;
    int last = 0;
    for (int i = 0; i < static_cast<int>(probs.size()); ++i) {
      acc += static_cast<double>(probs[i]);
      last = i;
      if (u < acc) return i;
    }
    return last;
  }

  // derive an independent stream, e.g. one per trial or per evaluation point
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 over the pair
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace maac
