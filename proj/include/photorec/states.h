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

#ifndef _PHOTOREC_STATES_H
#define _PHOTOREC_STATES_H

#include <cstddef>
#include <span>
#include <vector>

namespace photorec {

/// Photon-number statistics truncated to n = 0..N.
///
/// Always elementwise nonnegative and normalized. Generators evaluate the
/// analytic pmf on 0..N and renormalize; the mass that fell beyond N is kept
/// in `tail_mass()` so callers can warn about a truncation that is too tight.
class PhotonDistribution {
   public:
    /// Validates (finite, nonnegative, positive total) and renormalizes.
    /// `tail_mass` is the probability that was discarded above N, if known.
    static PhotonDistribution from_probabilities(std::vector<double> probs, double tail_mass = 0.0);

    /// Uniform distribution (1 + N)^-1 on 0..N.
    static PhotonDistribution uniform(int truncation);

    int truncation() const {
        return static_cast<int>(probs_.size()) - 1;
    }
    std::size_t size() const {
        return probs_.size();
    }
    double operator[](std::size_t n) const {
        return probs_[n];
    }
    std::span<const double> probs() const {
        return probs_;
    }
    double tail_mass() const {
        return tail_mass_;
    }
    double mean() const;

   private:
    PhotonDistribution(std::vector<double> probs, double tail_mass) : probs_(std::move(probs)), tail_mass_(tail_mass) {
    }

    std::vector<double> probs_;
    double tail_mass_ = 0.0;
};

/// Threshold above which the harness warns about truncation.
inline constexpr double kTailMassWarning = 1e-6;

/// Poissonian statistics of a coherent state.
PhotonDistribution coherent_distribution(double mean, int truncation);

/// Geometric (Bose-Einstein) statistics of a thermal state.
PhotonDistribution thermal_distribution(double mean, int truncation);

/// Kronecker delta at n0.
PhotonDistribution fock_distribution(int n0, int truncation);

/// Diagonal statistics of (|n_lo> + |n_hi>)/sqrt(2): weight 1/2 on each index.
PhotonDistribution fock_superposition_distribution(int n_lo, int n_hi, int truncation);

}  // namespace photorec

#endif
