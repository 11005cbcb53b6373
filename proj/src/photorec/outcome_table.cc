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

#include "photorec/outcome_table.h"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

using namespace photorec;

OutcomeCounts::OutcomeCounts(std::size_t settings, std::size_t outcomes, std::vector<std::uint64_t> counts)
    : settings_(settings), outcomes_(outcomes), counts_(std::move(counts)) {
    if (settings_ == 0 || outcomes_ < 2) {
        throw std::invalid_argument("outcome counts need at least one setting and two outcomes");
    }
    if (counts_.size() != settings_ * outcomes_) {
        throw std::invalid_argument("outcome counts have the wrong number of entries");
    }
    for (std::size_t nu = 0; nu < settings_; nu++) {
        if (row_total(nu) == 0) {
            throw std::invalid_argument("efficiency setting " + std::to_string(nu + 1) + " has no recorded events");
        }
    }
}

std::uint64_t OutcomeCounts::row_total(std::size_t nu) const {
    auto r = row(nu);
    return std::accumulate(r.begin(), r.end(), std::uint64_t{0});
}

bool OutcomeCounts::has_equal_rows() const {
    for (std::size_t nu = 1; nu < settings_; nu++) {
        if (row_total(nu) != row_total(0)) {
            return false;
        }
    }
    return true;
}

std::uint64_t OutcomeCounts::runs_per_eta() const {
    if (!has_equal_rows()) {
        throw std::invalid_argument("efficiency settings have different numbers of runs");
    }
    return row_total(0);
}

OutcomeFrequencies::OutcomeFrequencies(OutcomeTable table) : table_(std::move(table)) {
    if (table_.settings() == 0 || table_.outcomes() < 2) {
        throw std::invalid_argument("frequencies need at least one setting and two outcomes");
    }
    for (std::size_t nu = 0; nu < table_.settings(); nu++) {
        double total = 0.0;
        for (double f : table_.row(nu)) {
            if (!(f >= 0.0) || !std::isfinite(f)) {
                throw std::invalid_argument("frequency in setting " + std::to_string(nu + 1) + " is negative or not finite");
            }
            total += f;
        }
        if (std::abs(total - 1.0) > kRowSumTolerance) {
            throw std::invalid_argument(
                "frequencies of setting " + std::to_string(nu + 1) + " sum to " + std::to_string(total) +
                ", expected 1");
        }
    }
}
