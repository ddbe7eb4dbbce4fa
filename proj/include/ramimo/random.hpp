// SPDX-License-Identifier: Apache-2.0
//
// ramimo - multi-user MIMO simulation with pattern-reconfigurable antennas
// Copyright (C) 2026 The ramimo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef RAMIMO_RANDOM_H
#define RAMIMO_RANDOM_H

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace ramimo
{
    using rng_type = std::mt19937_64;

    // Independent sub-stream seeds: splitmix64 finalizer over (seed, stream).
    constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept
    {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Stream tags, so that each consumer of randomness within a trial is independent.
    namespace stream
    {
        inline constexpr std::uint64_t propagation = 1;
        inline constexpr std::uint64_t training = 2;
        inline constexpr std::uint64_t calibration = 3;
        inline constexpr std::uint64_t restarts = 4;
    }

    // Circularly-symmetric complex Gaussian with E|x|^2 = variance.
    inline std::complex<double> complex_gaussian(rng_type &rng, double variance)
    {
        std::normal_distribution<double> n(0.0, std::sqrt(0.5 * variance));
        const double re = n(rng);
        const double im = n(rng);
        return {re, im};
    }
}

#endif
