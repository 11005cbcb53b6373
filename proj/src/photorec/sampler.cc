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

#include "photorec/sampler.h"

#include <stdexcept>

#include "photorec/rng.h"

using namespace photorec;

namespace {

std::size_t common_outcomes(std::span<const BinnedDistribution> q_per_eta) {
    if (q_per_eta.empty()) {
        throw std::invalid_argument("need one binned distribution per efficiency setting");
    }
    std::size_t outcomes = q_per_eta[0].size();
    for (const auto &q : q_per_eta) {
        if (q.size() != outcomes) {
            throw std::invalid_argument("binned distributions have different counting capabilities");
        }
    }
    return outcomes;
}

}  // namespace

OutcomeCounts photorec::sample_counts(
    std::span<const BinnedDistribution> q_per_eta, std::uint64_t runs, std::uint64_t seed) {
    if (runs < 1) {
        throw std::invalid_argument("number of runs per efficiency must be >= 1");
    }
    std::size_t outcomes = common_outcomes(q_per_eta);
    std::vector<std::uint64_t> counts(q_per_eta.size() * outcomes, 0);
    for (std::size_t nu = 0; nu < q_per_eta.size(); nu++) {
        Rng rng(derive_subseed(seed, nu));
        const auto &q = q_per_eta[nu];
        std::uint64_t remaining = runs;
        double remaining_mass = 1.0;
        for (std::size_t m = 0; m + 1 < outcomes && remaining > 0; m++) {
            double p = remaining_mass > 0.0 ? q[m] / remaining_mass : 0.0;
            std::uint64_t drawn = rng.binomial(remaining, p);
            counts[nu * outcomes + m] = drawn;
            remaining -= drawn;
            remaining_mass -= q[m];
        }
        counts[nu * outcomes + outcomes - 1] += remaining;
    }
    return OutcomeCounts(q_per_eta.size(), outcomes, std::move(counts));
}

OutcomeFrequencies photorec::to_frequencies(const OutcomeCounts &counts) {
    OutcomeTable table(counts.settings(), counts.outcomes());
    for (std::size_t nu = 0; nu < counts.settings(); nu++) {
        double total = static_cast<double>(counts.row_total(nu));
        for (std::size_t m = 0; m < counts.outcomes(); m++) {
            table(nu, m) = static_cast<double>(counts(nu, m)) / total;
        }
    }
    return OutcomeFrequencies(std::move(table));
}

OutcomeFrequencies photorec::exact_frequencies(std::span<const BinnedDistribution> q_per_eta) {
    std::size_t outcomes = common_outcomes(q_per_eta);
    OutcomeTable table(q_per_eta.size(), outcomes);
    for (std::size_t nu = 0; nu < q_per_eta.size(); nu++) {
        for (std::size_t m = 0; m < outcomes; m++) {
            table(nu, m) = q_per_eta[nu][m];
        }
    }
    return OutcomeFrequencies(std::move(table));
}
