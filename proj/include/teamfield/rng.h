// Copyright 2026 The Teamfield Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TEAMFIELD_RNG_H_
#define TEAMFIELD_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace teamfield {

// SplitMix64 generator. Small enough that one stream can be created per
// (episode, team, DM, stage) so Monte Carlo results never depend on how
// episodes are scheduled across workers.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) from the top 53 bits.
  double Uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// Hashes a base seed with a list of counters into an independent stream seed.
inline std::uint64_t DeriveSeed(std::uint64_t seed,
                                std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = seed;
  for (std::uint64_t part : path) {
    Rng mix(h ^ (part * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
    h = mix();
  }
  return h;
}

}  // namespace teamfield

#endif  // TEAMFIELD_RNG_H_
