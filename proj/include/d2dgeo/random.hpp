#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "d2dgeo/errors.hpp"

namespace d2dgeo {

using rng_stream = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream for drop `index` of a run seeded with `seed`; depends only on the pair.
inline rng_stream substream(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL);
  std::uint32_t words[8];
  for (auto& w : words) {
    s = splitmix64(s);
    w = static_cast<std::uint32_t>(s >> 32);
  }
  std::seed_seq seq(std::begin(words), std::end(words));
  return rng_stream(seq);
}

// Uniform on the open interval (0, 1).
inline double uniform_open(rng_stream& rng) {
  for (;;) {
    const double u = std::generate_canonical<double, 53>(rng);
    if (u > 0.0) return u;
  }
}

// One-sided stable variate with E[exp(-s S)] = exp(-s^delta), 0 < delta < 1 (Kanter / CMS form).
inline double positive_stable(double delta, rng_stream& rng) {
  if (!(delta > 0.0 && delta < 1.0)) throw domain_error("positive_stable: index must lie in (0,1)");
  const double u = std::numbers::pi * uniform_open(rng);
  const double e = -std::log(uniform_open(rng));
  const double a = std::sin(delta * u) / std::pow(std::sin(u), 1.0 / delta);
  const double b = std::pow(std::sin((1.0 - delta) * u) / e, (1.0 - delta) / delta);
  return a * b;
}

}  // namespace d2dgeo
