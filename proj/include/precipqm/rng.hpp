#ifndef PRECIPQM_RNG_HPP
#define PRECIPQM_RNG_HPP

#include <cstdint>

namespace pqm {

// splitmix64 finalizer; full-period mixer used to derive independent
// counter-based streams from (seed, key...) tuples.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

// Uniform in (0,1), keyed so that evaluation order never matters.
inline double keyed_uniform(std::uint64_t seed, std::uint64_t k1,
                            std::uint64_t k2 = 0, std::uint64_t k3 = 0) {
  std::uint64_t h = mix64(seed);
  h = hash_combine(h, k1);
  h = hash_combine(h, k2);
  h = hash_combine(h, k3);
  // 53-bit mantissa, shifted into (0,1) so 0 is never produced
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

// Small deterministic stream for sequential draws (sampling, restarts).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() { return mix64(state_++); }
  double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

}  // namespace pqm

#endif
