#include "bridgemc/rng.hpp"

namespace bridgemc {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

RngStream RngStream::derive(std::uint64_t key) const {
  return RngStream(mix64(seed_ ^ mix64(key)));
}

RngStream RngStream::derive(std::initializer_list<std::uint64_t> keys) const {
  std::uint64_t s = seed_;
  for (std::uint64_t k : keys) s = mix64(s ^ mix64(k));
  return RngStream(s);
}

double RngStream::gamma(double shape, double scale) {
  std::gamma_distribution<double> dist(shape, scale);
  return dist(engine_);
}

std::uint64_t label_key(const char* label) {
  // FNV-1a
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char* p = label; *p != '\0'; ++p) {
    h ^= static_cast<unsigned char>(*p);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace bridgemc
