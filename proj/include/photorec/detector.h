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

#ifndef _PHOTOREC_DETECTOR_H
#define _PHOTOREC_DETECTOR_H

#include <cstddef>
#include <span>
#include <vector>

#include "photorec/outcome_table.h"
#include "photorec/states.h"

namespace photorec {

/// Quantum efficiencies eta_1 < ... < eta_K, each in (0, 1].
class EfficiencyGrid {
   public:
    explicit EfficiencyGrid(std::vector<double> etas);

    /// eta_nu = nu * eta_max / K for nu = 1..K.
    static EfficiencyGrid uniform(int settings, double eta_max);

    std::size_t size() const {
        return etas_.size();
    }
    double operator[](std::size_t nu) const {
        return etas_[nu];
    }
    std::span<const double> etas() const {
        return etas_;
    }

   private:
    std::vector<double> etas_;
};

/// Counting capability M (outcomes 0..M, M is the overflow bin) and Fock
/// truncation N.
struct DetectorConfig {
    int max_count = 1;
    int truncation = 30;

    void validate() const;
    std::size_t outcomes() const {
        return static_cast<std::size_t>(max_count) + 1;
    }
};

/// Outcome probabilities q[0..M] of a detector that resolves up to M photons.
class BinnedDistribution {
   public:
    explicit BinnedDistribution(std::vector<double> q);

    int max_count() const {
        return static_cast<int>(q_.size()) - 1;
    }
    std::size_t size() const {
        return q_.size();
    }
    double operator[](std::size_t m) const {
        return q_[m];
    }
    std::span<const double> probs() const {
        return q_;
    }

   private:
    std::vector<double> q_;
};

/// Probability C(n,m) (1-eta)^(n-m) eta^m that m of n photons are detected.
/// Returns 0 when m > n or m < 0. Throws when eta is outside [0, 1].
double binomial_response(double eta, int m, int n);

/// p_eta(m), m = 0..N: photon statistics after Bernoulli loss.
std::vector<double> detection_distribution(const PhotonDistribution &rho, double eta);

/// Folds every m >= M into the overflow outcome M.
BinnedDistribution bin_outcomes(std::span<const double> detected, int max_count);

/// B(nu, m, n): probability of outcome m at efficiency eta_nu given n photons.
///
/// Stored with n contiguous so that each (nu, m) row is a dense span, which
/// is the access pattern of the forward model and of the EM update.
class ResponseTensor {
   public:
    ResponseTensor(const EfficiencyGrid &grid, const DetectorConfig &config);

    std::size_t settings() const {
        return settings_;
    }
    std::size_t outcomes() const {
        return outcomes_;
    }
    std::size_t photon_numbers() const {
        return photon_numbers_;
    }
    int max_count() const {
        return static_cast<int>(outcomes_) - 1;
    }
    int truncation() const {
        return static_cast<int>(photon_numbers_) - 1;
    }
    const EfficiencyGrid &grid() const {
        return grid_;
    }

    double operator()(std::size_t nu, std::size_t m, std::size_t n) const {
        return data_[(nu * outcomes_ + m) * photon_numbers_ + n];
    }
    std::span<const double> row(std::size_t nu, std::size_t m) const {
        return std::span<const double>(data_).subspan((nu * outcomes_ + m) * photon_numbers_, photon_numbers_);
    }

    /// q_nu^m[rho] for every setting and outcome.
    OutcomeTable model_probabilities(std::span<const double> rho) const;

    /// Per-setting binned distributions of rho; the sampler's input.
    std::vector<BinnedDistribution> binned_distributions(const PhotonDistribution &rho) const;

   private:
    EfficiencyGrid grid_;
    std::size_t settings_;
    std::size_t outcomes_;
    std::size_t photon_numbers_;
    std::vector<double> data_;
};

inline ResponseTensor build_response_tensor(const EfficiencyGrid &grid, const DetectorConfig &config) {
    return ResponseTensor(grid, config);
}

inline EfficiencyGrid uniform_efficiency_grid(int settings, double eta_max) {
    return EfficiencyGrid::uniform(settings, eta_max);
}

}  // namespace photorec

#endif
