// Copyright 2026 The evsr Authors
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

#ifndef EVSR_RNG_HPP
#define EVSR_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace evsr
{
/// splitmix64 finalizer, used to derive well-separated engine seeds.
constexpr std::uint64_t mix64(std::uint64_t z)
{
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Identifies one independent substream: one pixel, one polarity, one window.
struct StreamKey
{
  std::uint32_t x = 0;
  std::uint32_t y = 0;
  std::int32_t polarity = 0;
  std::uint32_t window = 0;
};

/// Deterministic random stream keyed by (seed, StreamKey).
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. Real-valued draws are built from raw engine output instead of
/// std::*_distribution so results do not depend on the standard library.
class RngStream
{
public:
  explicit RngStream(std::uint64_t seed, StreamKey key = {})
  : seed_(seed), key_(key), engine_(derive(seed, key))
  {
  }

  std::uint64_t seed() const { return seed_; }
  const StreamKey & key() const { return key_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_open_closed() { return 1.0 - uniform(); }

  /// Exponential with the given rate.
  double exponential(double rate) { return -std::log(uniform_open_closed()) / rate; }

  /// Uniform integer in [0, n), n > 0 (Lemire's multiply-shift with rejection).
  std::uint64_t below(std::uint64_t n)
  {
    unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(engine_()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

private:
  static std::uint64_t derive(std::uint64_t seed, StreamKey key)
  {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ key.x);
    h = mix64(h ^ key.y);
    h = mix64(h ^ static_cast<std::uint32_t>(key.polarity));
    h = mix64(h ^ key.window);
    return h;
  }

  std::uint64_t seed_;
  StreamKey key_;
  std::mt19937_64 engine_;
};

}  // namespace evsr

#endif  // EVSR_RNG_HPP
