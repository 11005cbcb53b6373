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

#ifndef _PHOTOREC_SAMPLER_H
#define _PHOTOREC_SAMPLER_H

#include <cstdint>
#include <span>

#include "photorec/detector.h"
#include "photorec/outcome_table.h"

namespace photorec {

/// Draws one multinomial sample of size `runs` per efficiency setting.
///
/// Row nu uses an Rng seeded with derive_subseed(seed, nu) and draws the
/// multinomial by sequential binomial conditioning: outcome m receives
/// Binomial(remaining, q_m / remaining mass). Same inputs and seed give the
/// same counts on every platform.
OutcomeCounts sample_counts(std::span<const BinnedDistribution> q_per_eta, std::uint64_t runs, std::uint64_t seed);

/// f_nu^m = n_{m nu} / n_nu.
OutcomeFrequencies to_frequencies(const OutcomeCounts &counts);

/// The infinite-sample limit f = q.
OutcomeFrequencies exact_frequencies(std::span<const BinnedDistribution> q_per_eta);

}  // namespace photorec

#endif
