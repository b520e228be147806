#ifndef BRIDGEMC_RNG_HPP_
#define BRIDGEMC_RNG_HPP_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace bridgemc {

// SplitMix64 finalizer. Used to turn (seed, key) tuples into well-spread
// engine seeds.
std::uint64_t mix64(std::uint64_t x);

// A named random stream. Streams are seed-derived: a child stream is a pure
// function of the parent's seed and the derivation keys, so replicate farms
// can hand out streams in any order and stay reproducible.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  RngStream derive(std::uint64_t key) const;
  RngStream derive(std::initializer_list<std::uint64_t> keys) const;

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double normal() { return normal_(engine_); }
  double normal(double mean, double sd) { return mean + sd * normal_(engine_); }
  double gamma(double shape, double scale);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

// Hashes a string label into a derivation key.
std::uint64_t label_key(const char* label);

}  // namespace bridgemc

#endif  // BRIDGEMC_RNG_HPP_
