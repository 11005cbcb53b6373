// Copyright 2026 The photorec Authors
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

#ifndef _PHOTOREC_RNG_H
#define _PHOTOREC_RNG_H

#include <cstdint>
#include <random>

namespace photorec {

/// SplitMix64 finalizer. Used to derive independent sub-seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Sub-seed for stream `stream` of master seed `master`:
/// splitmix64(master ^ splitmix64(stream + 0x9E3779B97F4A7C15)).
/// Streams are efficiency indices in the sampler and replica indices in the
/// harness, so results do not depend on the order in which streams run.
std::uint64_t derive_subseed(std::uint64_t master, std::uint64_t stream);

/// Platform-independent random source.
///
/// std::mt19937_64 is fully specified by the standard, but the standard
/// distributions are not, so uniform and normal variates are derived here
/// from the raw 64-bit output.
class Rng {
   public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {
    }

    std::uint64_t next_u64() {
        return engine_();
    }
    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    /// Standard normal via the Box-Muller transform.
    double normal();
    /// Binomial(trials, p) by counting Bernoulli successes. Exact and
    /// portable; O(trials).
    std::uint64_t binomial(std::uint64_t trials, double p);

   private:
    std::mt19937_64 engine_;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace photorec

#endif
