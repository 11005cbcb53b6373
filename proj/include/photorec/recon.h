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

#ifndef _PHOTOREC_RECON_H
#define _PHOTOREC_RECON_H

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "photorec/detector.h"
#include "photorec/outcome_table.h"
#include "photorec/states.h"

namespace photorec {

/// Raised when an outcome was observed (f > 0) that the current estimate
/// gives zero probability. Usually means the truncation N is too small.
class ModelInconsistencyError : public std::runtime_error {
   public:
    ModelInconsistencyError(std::size_t setting, std::size_t outcome);

    std::size_t setting;
    std::size_t outcome;
};

/// Raised by the linear-inversion baseline when the system has fewer
/// equations than unknowns.
class RankDeficiencyError : public std::runtime_error {
   public:
    RankDeficiencyError(std::size_t rank, std::size_t unknowns);

    std::size_t rank;
    std::size_t unknowns;
};

/// When to stop iterating.
///
/// The iteration always runs to `max_iterations` (the default cap is the
/// number of runs per efficiency). Convergence of epsilon is judged over a
/// sliding window: converged once
/// (eps[i - window] - eps[i]) / eps[i - window] < epsilon_rate_threshold.
/// If epsilon has not converged by the cap, up to `extension_limit` further
/// iterations are run, stopping as soon as it does. `stop_on_convergence`
/// turns on the naive rule of stopping at the first convergence.
struct StoppingRule {
    std::uint64_t max_iterations = 10000;
    std::uint64_t convergence_window = 100;
    double epsilon_rate_threshold = 1e-6;
    std::uint64_t extension_limit = 0;
    bool stop_on_convergence = false;
    /// Record traces every `trace_stride` iterations; 0 selects
    /// max(1, max_iterations / 1000).
    std::uint64_t trace_stride = 0;

    /// Cap equal to the number of runs per efficiency setting.
    static StoppingRule for_runs(std::uint64_t runs_per_eta);

    void validate() const;
    std::uint64_t effective_stride() const;
};

enum class StopReason {
    cap_reached,
    converged_early,
    converged_after_cap,
    extension_exhausted,
};

std::string to_string(StopReason reason);

struct TracePoint {
    std::uint64_t iteration;
    double epsilon;
    /// Mean log-likelihood per run, sum_nu sum_m f log q.
    double log_likelihood;
    std::optional<double> fidelity;
};

struct ReconstructionResult {
    PhotonDistribution rho_final;
    std::vector<TracePoint> trace;
    std::uint64_t iterations_run = 0;
    StopReason stop_reason = StopReason::cap_reached;
    /// First iteration at which the epsilon window criterion held.
    std::optional<std::uint64_t> converged_at;
    double final_epsilon = 0.0;
    double final_log_likelihood = 0.0;
    std::optional<double> final_fidelity;
};

/// One EM update of rho against the observed frequencies.
PhotonDistribution em_step(const PhotonDistribution &rho, const ResponseTensor &response, const OutcomeFrequencies &f);

/// epsilon = sum over settings and all M+1 outcomes of |f - q|.
double total_absolute_error(const OutcomeTable &f, const OutcomeTable &q);
double total_absolute_error(const OutcomeFrequencies &f, const OutcomeTable &q);

/// Bhattacharyya coefficient sum_n sqrt(a_n b_n) over 0..N.
double fidelity(const PhotonDistribution &a, const PhotonDistribution &b);

/// log L = runs * sum_nu sum_m f log q, with 0 log 0 = 0.
/// Throws ModelInconsistencyError when q = 0 where f > 0.
double log_likelihood(const OutcomeTable &f, double runs, const OutcomeTable &q);
double log_likelihood(const OutcomeFrequencies &f, double runs, const OutcomeTable &q);

/// Iterates em_step from `initial` (uniform on 0..N when not given) under
/// `rule`. When `reference` is given, the fidelity against it is traced.
ReconstructionResult reconstruct(
    const OutcomeFrequencies &f,
    const ResponseTensor &response,
    const StoppingRule &rule,
    const std::optional<PhotonDistribution> &reference = std::nullopt,
    const std::optional<PhotonDistribution> &initial = std::nullopt);

struct LinearInversionResult {
    /// Unconstrained least-squares estimate for n = 0..N; may be negative
    /// and need not sum to one.
    std::vector<double> estimate;
    std::size_t effective_rank = 0;
    std::size_t unknowns = 0;
    double condition_number = 0.0;

    bool full_rank() const {
        return effective_rank == unknowns;
    }
    /// Sum of |x_n| over negative entries.
    double negativity_mass() const;
};

/// Least-squares solution of the flattened K(M+1) x (N+1) system B rho = f
/// via a column-pivoted orthogonal decomposition. Numerically rank-deficient
/// systems return the minimum-norm solution with the effective rank
/// reported; a system with fewer equations than unknowns throws
/// RankDeficiencyError.
LinearInversionResult linear_inversion_baseline(const OutcomeFrequencies &f, const ResponseTensor &response);

/// Sum of |a_n - b_n|.
double l1_distance(std::span<const double> a, std::span<const double> b);

nlohmann::json to_json(const ReconstructionResult &result);

/// iteration,epsilon,log_likelihood,fidelity (fidelity empty when untraced).
void write_trace_csv(std::ostream &out, const ReconstructionResult &result);

/// n,probability[,reference]
void write_distribution_csv(
    std::ostream &out, const PhotonDistribution &rho, const std::optional<PhotonDistribution> &reference = std::nullopt);

}  // namespace photorec

#endif
