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

#include "photorec/states.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

using namespace photorec;

namespace {

void require_truncation(int truncation) {
    if (truncation < 1) {
        throw std::invalid_argument("truncation N must be >= 1, got " + std::to_string(truncation));
    }
}

void require_mean(double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) {
        throw std::invalid_argument("mean photon number must be finite and >= 0, got " + std::to_string(mean));
    }
}

// Sums the pmf over 0..N and normalizes in place, returning the discarded tail.
double normalize_truncated(std::vector<double> &probs) {
    double kept = std::accumulate(probs.begin(), probs.end(), 0.0);
    for (auto &p : probs) {
        p /= kept;
    }
    return std::max(0.0, 1.0 - kept);
}

}  // namespace

PhotonDistribution PhotonDistribution::from_probabilities(std::vector<double> probs, double tail_mass) {
    if (probs.size() < 2) {
        throw std::invalid_argument("a photon distribution needs at least two entries (N >= 1)");
    }
    double total = 0.0;
    for (std::size_t n = 0; n < probs.size(); n++) {
        if (!std::isfinite(probs[n]) || probs[n] < 0.0) {
            throw std::invalid_argument(
                "photon probability at n=" + std::to_string(n) + " must be finite and >= 0, got " +
                std::to_string(probs[n]));
        }
        total += probs[n];
    }
    if (!(total > 0.0)) {
        throw std::invalid_argument("photon distribution has zero total probability");
    }
    for (auto &p : probs) {
        p /= total;
    }
    return PhotonDistribution(std::move(probs), tail_mass);
}

PhotonDistribution PhotonDistribution::uniform(int truncation) {
    require_truncation(truncation);
    return PhotonDistribution(std::vector<double>(truncation + 1, 1.0 / (truncation + 1)), 0.0);
}

double PhotonDistribution::mean() const {
    double m = 0.0;
    for (std::size_t n = 0; n < probs_.size(); n++) {
        m += static_cast<double>(n) * probs_[n];
    }
    return m;
}

PhotonDistribution photorec::coherent_distribution(double mean, int truncation) {
    require_mean(mean);
    require_truncation(truncation);
    std::vector<double> probs(truncation + 1, 0.0);
    if (mean == 0.0) {
        probs[0] = 1.0;
        return PhotonDistribution::from_probabilities(std::move(probs));
    }
    double log_mean = std::log(mean);
    for (int n = 0; n <= truncation; n++) {
        probs[n] = std::exp(n * log_mean - mean - std::lgamma(n + 1.0));
    }
    double tail = normalize_truncated(probs);
    return PhotonDistribution::from_probabilities(std::move(probs), tail);
}

PhotonDistribution photorec::thermal_distribution(double mean, int truncation) {
    require_mean(mean);
    require_truncation(truncation);
    std::vector<double> probs(truncation + 1, 0.0);
    double ratio = mean / (1.0 + mean);
    double p = 1.0 / (1.0 + mean);
    for (int n = 0; n <= truncation; n++) {
        probs[n] = p;
        p *= ratio;
    }
    double tail = normalize_truncated(probs);
    return PhotonDistribution::from_probabilities(std::move(probs), tail);
}

PhotonDistribution photorec::fock_distribution(int n0, int truncation) {
    require_truncation(truncation);
    if (n0 < 0 || n0 > truncation) {
        throw std::invalid_argument(
            "Fock index " + std::to_string(n0) + " outside 0.." + std::to_string(truncation));
    }
    std::vector<double> probs(truncation + 1, 0.0);
    probs[n0] = 1.0;
    return PhotonDistribution::from_probabilities(std::move(probs));
}

PhotonDistribution photorec::fock_superposition_distribution(int n_lo, int n_hi, int truncation) {
    require_truncation(truncation);
    if (n_lo < 0 || n_hi > truncation || n_lo >= n_hi) {
        throw std::invalid_argument(
            "superposition needs 0 <= n_lo < n_hi <= N, got n_lo=" + std::to_string(n_lo) +
            " n_hi=" + std::to_string(n_hi) + " N=" + std::to_string(truncation));
    }
    std::vector<double> probs(truncation + 1, 0.0);
    probs[n_lo] = 0.5;
    probs[n_hi] = 0.5;
    return PhotonDistribution::from_probabilities(std::move(probs));
}
