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

#include "photorec/detector.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

using namespace photorec;

namespace {

void require_efficiency(double eta) {
    if (!(eta >= 0.0 && eta <= 1.0)) {
        throw std::invalid_argument("quantum efficiency must lie in [0, 1], got " + std::to_string(eta));
    }
}

// log(k!) for k = 0..n, accumulated so that each entry is a sum of logs.
std::vector<double> log_factorials(int n) {
    std::vector<double> out(n + 1, 0.0);
    for (int k = 2; k <= n; k++) {
        out[k] = out[k - 1] + std::log(static_cast<double>(k));
    }
    return out;
}

// Binomial kernel for one efficiency: rows m = 0..N, columns n = 0..N.
std::vector<double> binomial_kernel(double eta, int truncation) {
    std::size_t size = truncation + 1;
    std::vector<double> kernel(size * size, 0.0);
    if (eta == 0.0 || eta == 1.0) {
        for (std::size_t n = 0; n < size; n++) {
            kernel[(eta == 0.0 ? 0 : n) * size + n] = 1.0;
        }
        return kernel;
    }
    auto log_fact = log_factorials(truncation);
    double log_eta = std::log(eta);
    double log_loss = std::log1p(-eta);
    for (int n = 0; n <= truncation; n++) {
        for (int m = 0; m <= n; m++) {
            double log_p = log_fact[n] - log_fact[m] - log_fact[n - m] + m * log_eta + (n - m) * log_loss;
            kernel[m * size + n] = std::exp(log_p);
        }
    }
    return kernel;
}

}  // namespace

EfficiencyGrid::EfficiencyGrid(std::vector<double> etas) : etas_(std::move(etas)) {
    if (etas_.empty()) {
        throw std::invalid_argument("efficiency grid needs at least one setting");
    }
    for (std::size_t nu = 0; nu < etas_.size(); nu++) {
        if (!(etas_[nu] > 0.0 && etas_[nu] <= 1.0)) {
            throw std::invalid_argument(
                "efficiency eta_" + std::to_string(nu + 1) + " = " + std::to_string(etas_[nu]) +
                " must lie in (0, 1]");
        }
        if (nu > 0 && !(etas_[nu] > etas_[nu - 1])) {
            throw std::invalid_argument("efficiency grid must be strictly increasing");
        }
    }
}

EfficiencyGrid EfficiencyGrid::uniform(int settings, double eta_max) {
    if (settings < 1) {
        throw std::invalid_argument("number of efficiency settings K must be >= 1");
    }
    if (!(eta_max > 0.0 && eta_max <= 1.0)) {
        throw std::invalid_argument("eta_max must lie in (0, 1], got " + std::to_string(eta_max));
    }
    std::vector<double> etas(settings);
    for (int nu = 1; nu <= settings; nu++) {
        etas[nu - 1] = nu * eta_max / settings;
    }
    return EfficiencyGrid(std::move(etas));
}

void DetectorConfig::validate() const {
    if (max_count < 1) {
        throw std::invalid_argument("counting capability M must be >= 1, got " + std::to_string(max_count));
    }
    if (truncation < max_count) {
        throw std::invalid_argument(
            "truncation N=" + std::to_string(truncation) + " must be >= M=" + std::to_string(max_count));
    }
}

BinnedDistribution::BinnedDistribution(std::vector<double> q) : q_(std::move(q)) {
    if (q_.size() < 2) {
        throw std::invalid_argument("binned distribution needs M >= 1 (at least two outcomes)");
    }
    double total = 0.0;
    for (double v : q_) {
        if (!(v >= 0.0)) {
            throw std::invalid_argument("binned outcome probability must be >= 0");
        }
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw std::invalid_argument("binned outcome probabilities must sum to 1, got " + std::to_string(total));
    }
}

double photorec::binomial_response(double eta, int m, int n) {
    require_efficiency(eta);
    if (m < 0 || m > n) {
        return 0.0;
    }
    if (eta == 0.0) {
        return m == 0 ? 1.0 : 0.0;
    }
    if (eta == 1.0) {
        return m == n ? 1.0 : 0.0;
    }
    double log_choose = std::lgamma(n + 1.0) - std::lgamma(m + 1.0) - std::lgamma(n - m + 1.0);
    return std::exp(log_choose + m * std::log(eta) + (n - m) * std::log1p(-eta));
}

std::vector<double> photorec::detection_distribution(const PhotonDistribution &rho, double eta) {
    require_efficiency(eta);
    int truncation = rho.truncation();
    std::size_t size = rho.size();
    auto kernel = binomial_kernel(eta, truncation);
    std::vector<double> detected(size, 0.0);
    for (std::size_t m = 0; m < size; m++) {
        double acc = 0.0;
        for (std::size_t n = m; n < size; n++) {
            acc += kernel[m * size + n] * rho[n];
        }
        detected[m] = acc;
    }
    return detected;
}

BinnedDistribution photorec::bin_outcomes(std::span<const double> detected, int max_count) {
    if (max_count < 1) {
        throw std::invalid_argument("counting capability M must be >= 1, got " + std::to_string(max_count));
    }
    std::vector<double> q(max_count + 1, 0.0);
    double resolved = 0.0;
    for (int m = 0; m < max_count && m < static_cast<int>(detected.size()); m++) {
        q[m] = detected[m];
        resolved += detected[m];
    }
    // The overflow is summed directly rather than taken as 1 - resolved so
    // that small overflow probabilities keep their relative precision.
    double overflow = 0.0;
    for (std::size_t m = max_count; m < detected.size(); m++) {
        overflow += detected[m];
    }
    if (std::abs(resolved + overflow - 1.0) > 1e-12) {
        throw std::invalid_argument("detection distribution must sum to 1");
    }
    q[max_count] = overflow;
    return BinnedDistribution(std::move(q));
}

ResponseTensor::ResponseTensor(const EfficiencyGrid &grid, const DetectorConfig &config)
    : grid_(grid),
      settings_(grid.size()),
      outcomes_(config.outcomes()),
      photon_numbers_(static_cast<std::size_t>(config.truncation) + 1) {
    config.validate();
    data_.assign(settings_ * outcomes_ * photon_numbers_, 0.0);
    std::size_t overflow = outcomes_ - 1;
    for (std::size_t nu = 0; nu < settings_; nu++) {
        auto kernel = binomial_kernel(grid[nu], config.truncation);
        for (std::size_t n = 0; n < photon_numbers_; n++) {
            for (std::size_t m = 0; m <= n; m++) {
                double p = kernel[m * photon_numbers_ + n];
                data_[(nu * outcomes_ + std::min(m, overflow)) * photon_numbers_ + n] += p;
            }
            // Rounding in the tail sum can push a certain overflow just past 1.
            auto &tail = data_[(nu * outcomes_ + overflow) * photon_numbers_ + n];
            tail = std::min(tail, 1.0);
        }
    }
}

OutcomeTable ResponseTensor::model_probabilities(std::span<const double> rho) const {
    if (rho.size() != photon_numbers_) {
        throw std::invalid_argument(
            "distribution has " + std::to_string(rho.size()) + " entries, response tensor expects " +
            std::to_string(photon_numbers_));
    }
    OutcomeTable q(settings_, outcomes_);
    for (std::size_t nu = 0; nu < settings_; nu++) {
        for (std::size_t m = 0; m < outcomes_; m++) {
            auto r = row(nu, m);
            double acc = 0.0;
            for (std::size_t n = 0; n < photon_numbers_; n++) {
                acc += r[n] * rho[n];
            }
            q(nu, m) = acc;
        }
    }
    return q;
}

std::vector<BinnedDistribution> ResponseTensor::binned_distributions(const PhotonDistribution &rho) const {
    auto q = model_probabilities(rho.probs());
    std::vector<BinnedDistribution> out;
    out.reserve(settings_);
    for (std::size_t nu = 0; nu < settings_; nu++) {
        auto r = q.row(nu);
        out.emplace_back(std::vector<double>(r.begin(), r.end()));
    }
    return out;
}
