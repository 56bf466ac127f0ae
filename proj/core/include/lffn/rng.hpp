#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace lffn {

// splitmix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);
std::uint64_t derive_seed(std::uint64_t seed, const std::string& tag);

// Seeded random source. All distributions are hand-rolled on top of
// mt19937_64 so that sequences are identical across standard libraries;
// std::uniform_real_distribution and friends are implementation defined
// and would break byte-reproducibility guarantees.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [0, n), unbiased
  std::int64_t uniform_int(std::int64_t n);

  // standard normal via Box-Muller; draws two uniforms per call and keeps
  // no spare so the full state lives in the engine
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  std::string save_state() const;
  void restore_state(const std::string& state);

 private:
  std::mt19937_64 engine_;
};

}  // namespace lffn
