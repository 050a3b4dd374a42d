// Copyright 2026 The AHSC Authors
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

#ifndef AHSC_RANDOM_H_
#define AHSC_RANDOM_H_

#include <cstdint>
#include <random>

namespace ahsc {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent child streams.
constexpr std::uint64_t MixSeed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stream tags keep e.g. the shuffle stream and the init stream of one config
// from ever coinciding.
enum class StreamTag : std::uint64_t {
  kInit = 1,
  kShuffle = 2,
  kSplit = 3,
  kDirections = 4,
  kSharpness = 5,
  kBlobs = 6,
  kSampling = 7,
};

constexpr std::uint64_t DeriveSeed(std::uint64_t seed, StreamTag tag,
                                   std::uint64_t index = 0) {
  return MixSeed(MixSeed(seed, static_cast<std::uint64_t>(tag)), index);
}

}  // namespace ahsc

#endif  // AHSC_RANDOM_H_
