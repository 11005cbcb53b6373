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

#include <cmath>
#include <numeric>
#include <random>

#include "gtest/gtest.h"

using namespace photorec;

namespace {

// Binomial coefficient by Pascal's triangle, exact in double up to n ~ 1000.
double choose(int n, int k) {
    std::vector<double> row{1.0};
    for (int i = 1; i <= n; i++) {
        std::vector<double> next(i + 1, 1.0);
        for (int j = 1; j < i; j++) {
            next[j] = row[j - 1] + row[j];
        }
        row = std::move(next);
    }
    return row[k];
}

double binomial_oracle(double eta, int m, int n) {
    if (m > n) {
        return 0.0;
    }
    return choose(n, m) * std::pow(1.0 - eta, n - m) * std::pow(eta, m);
}

std::vector<double> random_distribution(std::mt19937_64 &gen, int size) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(size);
    for (auto &x : v) {
        x = u(gen);
    }
    return v;
}

}  // namespace

TEST(detector, binomial_response_unit_efficiency_is_identity) {
    for (int n = 0; n <= 10; n++) {
        for (int m = 0; m <= n; m++) {
            ASSERT_EQ(binomial_response(1.0, m, n), m == n ? 1.0 : 0.0);
        }
    }
}

TEST(detector, binomial_response_all_lost) {
    for (double eta : {0.0, 0.1, 0.5, 0.9}) {
        for (int n = 0; n <= 20; n++) {
            ASSERT_NEAR(binomial_response(eta, 0, n), std::pow(1.0 - eta, n), 1e-15);
        }
    }
}

TEST(detector, binomial_response_values) {
    ASSERT_NEAR(binomial_response(0.5, 1, 2), 0.5, 1e-15);
    for (double eta : {0.03, 0.2, 0.77}) {
        for (int n = 0; n <= 40; n++) {
            for (int m = 0; m <= n; m++) {
                ASSERT_NEAR(binomial_response(eta, m, n), binomial_oracle(eta, m, n), 1e-13) << eta << " " << m << " " << n;
            }
        }
    }
}

TEST(detector, binomial_response_stable_at_large_n) {
    double total = 0.0;
    for (int m = 0; m <= 150; m++) {
        double b = binomial_response(0.37, m, 150);
        ASSERT_TRUE(std::isfinite(b));
        total += b;
    }
    ASSERT_NEAR(total, 1.0, 1e-12);
    ASSERT_NEAR(binomial_response(0.37, 50, 100), binomial_oracle(0.37, 50, 100), 1e-13);
}

TEST(detector, binomial_response_edge_cases) {
    ASSERT_EQ(binomial_response(0.5, 3, 2), 0.0);
    ASSERT_EQ(binomial_response(0.0, 0, 5), 1.0);
    ASSERT_EQ(binomial_response(0.0, 1, 5), 0.0);
    ASSERT_THROW(binomial_response(-0.1, 0, 1), std::invalid_argument);
    ASSERT_THROW(binomial_response(1.1, 0, 1), std::invalid_argument);
}

TEST(detector, detection_distribution_identity_at_unit_efficiency) {
    auto rho = coherent_distribution(2.0, 15);
    auto p = detection_distribution(rho, 1.0);
    ASSERT_EQ(p.size(), rho.size());
    for (std::size_t n = 0; n < p.size(); n++) {
        ASSERT_NEAR(p[n], rho[n], 1e-15);
    }
}

TEST(detector, detection_distribution_single_photon) {
    auto p = detection_distribution(fock_distribution(1, 5), 0.3);
    ASSERT_NEAR(p[0], 0.7, 1e-15);
    ASSERT_NEAR(p[1], 0.3, 1e-15);
    for (std::size_t m = 2; m < p.size(); m++) {
        ASSERT_EQ(p[m], 0.0);
    }
}

TEST(detector, detection_distribution_poisson_thinning) {
    auto p = detection_distribution(coherent_distribution(3.0, 30), 0.2);
    ASSERT_NEAR(p[0], std::exp(-0.6), 1e-9);
    ASSERT_NEAR(p[0], 0.5488, 1e-4);
    double term = std::exp(-0.6);
    for (int m = 0; m <= 10; m++) {
        ASSERT_NEAR(p[m], term, 1e-9) << m;
        term *= 0.6 / (m + 1);
    }
    ASSERT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
}

TEST(detector, detection_distribution_brute_force) {
    std::mt19937_64 gen(3);
    auto rho = PhotonDistribution::from_probabilities(random_distribution(gen, 12));
    double eta = 0.41;
    auto p = detection_distribution(rho, eta);
    for (int m = 0; m <= 11; m++) {
        double expected = 0.0;
        for (int n = m; n <= 11; n++) {
            expected += binomial_oracle(eta, m, n) * rho[n];
        }
        ASSERT_NEAR(p[m], expected, 1e-14);
    }
}

TEST(detector, detection_distribution_scales_mean) {
    auto rho = thermal_distribution(2.0, 80);
    for (double eta : {0.1, 0.5, 0.9}) {
        auto p = detection_distribution(rho, eta);
        double mean = 0.0;
        for (std::size_t m = 0; m < p.size(); m++) {
            mean += static_cast<double>(m) * p[m];
        }
        ASSERT_NEAR(mean, eta * rho.mean(), 1e-9);
    }
}

TEST(detector, loss_composition) {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; trial++) {
        auto rho = PhotonDistribution::from_probabilities(random_distribution(gen, 31));
        double eta1 = u(gen);
        double eta2 = u(gen);
        auto once = PhotonDistribution::from_probabilities(detection_distribution(rho, eta1));
        auto twice = detection_distribution(once, eta2);
        auto direct = detection_distribution(rho, eta1 * eta2);
        for (std::size_t m = 0; m < direct.size(); m++) {
            ASSERT_NEAR(twice[m], direct[m], 1e-12);
        }
    }
}

TEST(detector, bin_outcomes_single_photon) {
    auto q = bin_outcomes(detection_distribution(fock_distribution(1, 4), 0.25), 1);
    ASSERT_EQ(q.size(), 2u);
    ASSERT_NEAR(q[0], 0.75, 1e-15);
    ASSERT_NEAR(q[1], 0.25, 1e-15);
}

TEST(detector, bin_outcomes_no_overflow) {
    std::vector<double> p{0.2, 0.5, 0.3, 0.0, 0.0};
    auto q = bin_outcomes(p, 3);
    ASSERT_EQ(q[3], 0.0);
    ASSERT_NEAR(q[0], 0.2, 1e-15);
    ASSERT_NEAR(q[2], 0.3, 1e-15);
}

TEST(detector, bin_outcomes_poisson_closed_form) {
    auto q = bin_outcomes(detection_distribution(coherent_distribution(3.0, 30), 0.2), 2);
    double e = std::exp(-0.6);
    ASSERT_NEAR(q[0], e, 1e-9);
    ASSERT_NEAR(q[1], 0.6 * e, 1e-9);
    ASSERT_NEAR(q[2], 1.0 - 1.6 * e, 1e-9);
    ASSERT_NEAR(q[0] + q[1] + q[2], 1.0, 1e-12);
}

TEST(detector, bin_outcomes_errors) {
    std::vector<double> p{0.5, 0.5};
    ASSERT_THROW(bin_outcomes(p, 0), std::invalid_argument);
    std::vector<double> bad{0.5, 0.2};
    ASSERT_THROW(bin_outcomes(bad, 1), std::invalid_argument);
}

TEST(detector, geiger_no_click_probability_decreases_with_efficiency) {
    auto rho = coherent_distribution(1.7, 25);
    double previous = 1.0;
    for (int i = 1; i <= 20; i++) {
        double q0 = bin_outcomes(detection_distribution(rho, i / 20.0), 1)[0];
        ASSERT_LE(q0, previous);
        previous = q0;
    }
}

TEST(detector, binned_distribution_validation) {
    ASSERT_NO_THROW(BinnedDistribution({0.25, 0.75}));
    ASSERT_THROW(BinnedDistribution({1.0}), std::invalid_argument);
    ASSERT_THROW(BinnedDistribution({-0.1, 1.1}), std::invalid_argument);
    ASSERT_THROW(BinnedDistribution({0.5, 0.4}), std::invalid_argument);
}

TEST(detector, uniform_efficiency_grid) {
    auto grid = uniform_efficiency_grid(30, 0.2);
    ASSERT_EQ(grid.size(), 30u);
    ASSERT_NEAR(grid[0], 1.0 / 150.0, 1e-15);
    ASSERT_NEAR(grid[29], 0.2, 1e-15);

    auto single = uniform_efficiency_grid(1, 0.8);
    ASSERT_EQ(single.size(), 1u);
    ASSERT_EQ(single[0], 0.8);

    auto four = uniform_efficiency_grid(4, 0.4);
    for (int nu = 0; nu < 4; nu++) {
        ASSERT_NEAR(four[nu], 0.1 * (nu + 1), 1e-15);
    }
}

TEST(detector, efficiency_grid_validation) {
    ASSERT_THROW(uniform_efficiency_grid(0, 0.5), std::invalid_argument);
    ASSERT_THROW(uniform_efficiency_grid(3, 0.0), std::invalid_argument);
    ASSERT_THROW(uniform_efficiency_grid(3, 1.2), std::invalid_argument);
    ASSERT_THROW(EfficiencyGrid({}), std::invalid_argument);
    ASSERT_THROW(EfficiencyGrid({0.0, 0.5}), std::invalid_argument);
    ASSERT_THROW(EfficiencyGrid({0.5, 0.5}), std::invalid_argument);
    ASSERT_THROW(EfficiencyGrid({0.6, 0.5}), std::invalid_argument);
    ASSERT_NO_THROW(EfficiencyGrid({0.1, 1.0}));
}

TEST(detector, detector_config_validation) {
    ASSERT_NO_THROW((DetectorConfig{1, 1}.validate()));
    ASSERT_THROW((DetectorConfig{0, 5}.validate()), std::invalid_argument);
    ASSERT_THROW((DetectorConfig{6, 5}.validate()), std::invalid_argument);
    ASSERT_EQ((DetectorConfig{3, 5}.outcomes()), 4u);
}

TEST(detector, response_tensor_small_case) {
    ResponseTensor b(EfficiencyGrid({0.5}), DetectorConfig{1, 2});
    ASSERT_EQ(b.settings(), 1u);
    ASSERT_EQ(b.outcomes(), 2u);
    ASSERT_EQ(b.photon_numbers(), 3u);
    ASSERT_NEAR(b(0, 1, 2), 0.75, 1e-15);
    ASSERT_NEAR(b(0, 0, 2), 0.25, 1e-15);
    ASSERT_NEAR(b(0, 0, 0), 1.0, 1e-15);
    ASSERT_EQ(b(0, 1, 0), 0.0);
}

TEST(detector, response_tensor_invariants) {
    auto grid = uniform_efficiency_grid(30, 0.8);
    for (int max_count : {1, 2, 3, 6}) {
        ResponseTensor b(grid, DetectorConfig{max_count, 30});
        for (std::size_t nu = 0; nu < b.settings(); nu++) {
            for (std::size_t n = 0; n < b.photon_numbers(); n++) {
                double column = 0.0;
                for (std::size_t m = 0; m < b.outcomes(); m++) {
                    double v = b(nu, m, n);
                    ASSERT_GE(v, 0.0);
                    ASSERT_LE(v, 1.0);
                    column += v;
                    if (m < static_cast<std::size_t>(max_count)) {
                        ASSERT_NEAR(v, binomial_oracle(grid[nu], m, n), 1e-13);
                    }
                }
                ASSERT_NEAR(column, 1.0, 1e-12);
                if (n < static_cast<std::size_t>(max_count)) {
                    ASSERT_EQ(b(nu, max_count, n), 0.0);
                }
            }
        }
    }
}

TEST(detector, response_tensor_model_matches_binned_distributions) {
    auto grid = uniform_efficiency_grid(5, 0.6);
    ResponseTensor b(grid, DetectorConfig{2, 20});
    auto rho = coherent_distribution(2.5, 20);
    auto model = b.model_probabilities(rho.probs());
    auto binned = b.binned_distributions(rho);
    ASSERT_EQ(binned.size(), 5u);
    for (std::size_t nu = 0; nu < 5; nu++) {
        auto direct = bin_outcomes(detection_distribution(rho, grid[nu]), 2);
        for (std::size_t m = 0; m < 3; m++) {
            ASSERT_NEAR(model(nu, m), direct[m], 1e-13);
            ASSERT_NEAR(binned[nu][m], direct[m], 1e-13);
        }
    }
}

TEST(detector, response_tensor_rejects_invalid_config) {
    auto grid = uniform_efficiency_grid(3, 0.5);
    ASSERT_THROW(ResponseTensor(grid, DetectorConfig{0, 5}), std::invalid_argument);
    ASSERT_THROW(ResponseTensor(grid, DetectorConfig{6, 5}), std::invalid_argument);
    ResponseTensor b(grid, DetectorConfig{1, 5});
    std::vector<double> wrong(4, 0.25);
    ASSERT_THROW(b.model_probabilities(wrong), std::invalid_argument);
}
