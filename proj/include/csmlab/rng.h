// Copyright 2026 The csmlab Authors
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

#ifndef CSMLAB_RNG_H
#define CSMLAB_RNG_H

#include <cstdint>
#include <limits>
#include <random>

namespace csmlab {

/// Seedable, splittable random stream.
///
/// Each stream is an mt19937_64 engine keyed by (seed, stream id). Child streams derived with
/// `split` are keyed by the parent key and the child index, so sweeps that give every trial its
/// own child stream produce the same numbers regardless of execution order. The number of raw
/// 64-bit draws taken so far is tracked as the stream position.
class Rng {
   public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    static constexpr result_type min() {
        return std::numeric_limits<result_type>::min();
    }
    static constexpr result_type max() {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() {
        ++position_;
        return engine_();
    }

    /// Uniform double in [0, 1) built from the top 53 bits of one draw.
    double uniform();
    /// Standard normal deviate.
    double normal();

    /// Independent child stream. Does not advance this stream.
    Rng split(std::uint64_t child) const;

    std::uint64_t seed() const noexcept {
        return seed_;
    }
    std::uint64_t stream() const noexcept {
        return stream_;
    }
    std::uint64_t position() const noexcept {
        return position_;
    }

   private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t position_ = 0;
    std::mt19937_64 engine_;
};

}  // namespace csmlab

#endif
