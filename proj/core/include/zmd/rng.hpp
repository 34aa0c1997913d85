#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace zmd {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Deterministic RNG stream. Streams for different (seed, index) pairs are
/// independent, so parallel and serial runs over indexed work agree.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(splitmix64(seed)) {}
  Rng(uint64_t seed, uint64_t stream_index)
      : engine_(splitmix64(splitmix64(seed) ^ splitmix64(stream_index + 1))) {}

  double uniform() { return uni_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() { return normal_(engine_); }
  uint64_t next_u64() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }

  /// Bit-exact state capture for checkpoint resume.
  std::string serialize() const {
    std::ostringstream os;
    os << engine_ << '\n' << normal_;
    return os.str();
  }
  void deserialize(const std::string& s) {
    std::istringstream is(s);
    is >> engine_ >> normal_;
  }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> uni_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace zmd
