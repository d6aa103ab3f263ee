// Copyright 2026 The Modbot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MODBOT_RNG_HPP_
#define MODBOT_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace modbot {

// Seeded random stream with explicit, implementation-pinned transforms.
// std::mt19937_64 is specified by the standard bit-for-bit; the uniform and
// normal transforms below are ours, so a (seed, call sequence) pair yields
// the same values on any platform with IEEE doubles and the same libm.
//
// fork() derives an independent child stream from the parent's seed and a
// tag without consuming parent state, so the stream tree is stable no
// matter how much each branch draws.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), gen_(mix(seed)) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; the partner value is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  Rng fork(uint64_t tag) const { return Rng(mix(seed_ ^ mix(tag + 0x9e3779b97f4a7c15ull))); }

  Rng fork(std::string_view name, uint64_t index = 0) const {
    return fork(fnv1a(name) + 0x100000001b3ull * index);
  }

  uint64_t seed() const { return seed_; }

  // FNV-1a 64-bit, also used for input-file fingerprints.
  static uint64_t fnv1a(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
    return h;
  }

 private:
  // splitmix64 finalizer; decorrelates consecutive seeds.
  static uint64_t mix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  uint64_t seed_;
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace modbot

#endif  // MODBOT_RNG_HPP_
