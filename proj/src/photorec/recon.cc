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

#include "photorec/recon.h"

#include <Eigen/Dense>
#include <cmath>
#include <deque>
#include <iomanip>
#include <ostream>

using namespace photorec;

ModelInconsistencyError::ModelInconsistencyError(std::size_t setting, std::size_t outcome)
    : std::runtime_error(
          "outcome m=" + std::to_string(outcome) + " at efficiency setting " + std::to_string(setting + 1) +
          " was observed but has zero model probability; the truncation N may be too small"),
      setting(setting),
      outcome(outcome) {
}

RankDeficiencyError::RankDeficiencyError(std::size_t rank, std::size_t unknowns)
    : std::runtime_error(
          "linear system is rank deficient: effective rank " + std::to_string(rank) + " for " +
          std::to_string(unknowns) + " unknowns"),
      rank(rank),
      unknowns(unknowns) {
}

StoppingRule StoppingRule::for_runs(std::uint64_t runs_per_eta) {
    StoppingRule rule;
    rule.max_iterations = runs_per_eta;
    return rule;
}

void StoppingRule::validate() const {
    if (max_iterations < 1) {
        throw std::invalid_argument("stopping rule needs max_iterations >= 1");
    }
    if (convergence_window < 1) {
        throw std::invalid_argument("stopping rule needs convergence_window >= 1");
    }
    if (!(epsilon_rate_threshold > 0.0)) {
        throw std::invalid_argument("stopping rule needs epsilon_rate_threshold > 0");
    }
}

std::uint64_t StoppingRule::effective_stride() const {
    if (trace_stride > 0) {
        return trace_stride;
    }
    return std::max<std::uint64_t>(1, max_iterations / 1000);
}

std::string photorec::to_string(StopReason reason) {
    switch (reason) {
        case StopReason::cap_reached:
            return "cap_reached";
        case StopReason::converged_early:
            return "converged_early";
        case StopReason::converged_after_cap:
            return "converged_after_cap";
        case StopReason::extension_exhausted:
            return "extension_exhausted";
    }
    return "unknown";
}

namespace {

void check_shapes(const OutcomeFrequencies &f, const ResponseTensor &response) {
    if (f.settings() != response.settings() || f.outcomes() != response.outcomes()) {
        throw std::invalid_argument(
            "frequencies are " + std::to_string(f.settings()) + "x" + std::to_string(f.outcomes()) +
            " but the response tensor expects " + std::to_string(response.settings()) + "x" +
            std::to_string(response.outcomes()));
    }
}

// Sum over all settings and outcomes of B(nu, m, n), one entry per n. Equal
// to K when the overflow outcome is included, kept general regardless.
std::vector<double> column_norms(const ResponseTensor &response) {
    std::vector<double> norms(response.photon_numbers(), 0.0);
    for (std::size_t nu = 0; nu < response.settings(); nu++) {
        for (std::size_t m = 0; m < response.outcomes(); m++) {
            auto r = response.row(nu, m);
            for (std::size_t n = 0; n < norms.size(); n++) {
                norms[n] += r[n];
            }
        }
    }
    return norms;
}

void forward(const ResponseTensor &response, std::span<const double> rho, OutcomeTable &q) {
    for (std::size_t nu = 0; nu < response.settings(); nu++) {
        for (std::size_t m = 0; m < response.outcomes(); m++) {
            auto r = response.row(nu, m);
            double acc = 0.0;
            for (std::size_t n = 0; n < rho.size(); n++) {
                acc += r[n] * rho[n];
            }
            q(nu, m) = acc;
        }
    }
}

// rho_next[n] = rho[n] / norm[n] * sum_{nu,m} B(nu,m,n) f/q.
void update(
    const ResponseTensor &response,
    const OutcomeFrequencies &f,
    std::span<const double> norms,
    std::span<const double> rho,
    const OutcomeTable &q,
    std::vector<double> &rho_next) {
    std::fill(rho_next.begin(), rho_next.end(), 0.0);
    for (std::size_t nu = 0; nu < response.settings(); nu++) {
        for (std::size_t m = 0; m < response.outcomes(); m++) {
            double freq = f(nu, m);
            if (freq == 0.0) {
                continue;
            }
            if (!(q(nu, m) > 0.0)) {
                throw ModelInconsistencyError(nu, m);
            }
            double ratio = freq / q(nu, m);
            auto r = response.row(nu, m);
            for (std::size_t n = 0; n < rho_next.size(); n++) {
                rho_next[n] += r[n] * ratio;
            }
        }
    }
    for (std::size_t n = 0; n < rho_next.size(); n++) {
        rho_next[n] = norms[n] > 0.0 ? rho[n] * rho_next[n] / norms[n] : 0.0;
    }
}

double epsilon_of(const OutcomeFrequencies &f, const OutcomeTable &q) {
    double eps = 0.0;
    auto fv = f.table().values();
    auto qv = q.values();
    for (std::size_t i = 0; i < fv.size(); i++) {
        eps += std::abs(fv[i] - qv[i]);
    }
    return eps;
}

double fidelity_of(std::span<const double> a, std::span<const double> b) {
    double g = 0.0;
    for (std::size_t n = 0; n < a.size(); n++) {
        g += std::sqrt(a[n] * b[n]);
    }
    return std::min(g, 1.0);
}

}  // namespace

PhotonDistribution photorec::em_step(
    const PhotonDistribution &rho, const ResponseTensor &response, const OutcomeFrequencies &f) {
    check_shapes(f, response);
    if (rho.size() != response.photon_numbers()) {
        throw std::invalid_argument("distribution truncation does not match the response tensor");
    }
    OutcomeTable q(response.settings(), response.outcomes());
    forward(response, rho.probs(), q);
    std::vector<double> next(rho.size(), 0.0);
    update(response, f, column_norms(response), rho.probs(), q, next);
    return PhotonDistribution::from_probabilities(std::move(next));
}

double photorec::total_absolute_error(const OutcomeTable &f, const OutcomeTable &q) {
    if (!f.same_shape(q)) {
        throw std::invalid_argument("frequency and model tables have different shapes");
    }
    double eps = 0.0;
    for (std::size_t i = 0; i < f.values().size(); i++) {
        eps += std::abs(f.values()[i] - q.values()[i]);
    }
    return eps;
}

double photorec::total_absolute_error(const OutcomeFrequencies &f, const OutcomeTable &q) {
    return total_absolute_error(f.table(), q);
}

double photorec::fidelity(const PhotonDistribution &a, const PhotonDistribution &b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("fidelity needs distributions with the same truncation");
    }
    return fidelity_of(a.probs(), b.probs());
}

double photorec::log_likelihood(const OutcomeTable &f, double runs, const OutcomeTable &q) {
    if (!f.same_shape(q)) {
        throw std::invalid_argument("frequency and model tables have different shapes");
    }
    double total = 0.0;
    for (std::size_t nu = 0; nu < f.settings(); nu++) {
        for (std::size_t m = 0; m < f.outcomes(); m++) {
            if (f(nu, m) == 0.0) {
                continue;
            }
            if (!(q(nu, m) > 0.0)) {
                throw ModelInconsistencyError(nu, m);
            }
            total += f(nu, m) * std::log(q(nu, m));
        }
    }
    return runs * total;
}

double photorec::log_likelihood(const OutcomeFrequencies &f, double runs, const OutcomeTable &q) {
    return log_likelihood(f.table(), runs, q);
}

ReconstructionResult photorec::reconstruct(
    const OutcomeFrequencies &f,
    const ResponseTensor &response,
    const StoppingRule &rule,
    const std::optional<PhotonDistribution> &reference,
    const std::optional<PhotonDistribution> &initial) {
    rule.validate();
    check_shapes(f, response);
    std::size_t size = response.photon_numbers();
    if (reference && reference->size() != size) {
        throw std::invalid_argument("reference distribution truncation does not match the response tensor");
    }
    if (initial && initial->size() != size) {
        throw std::invalid_argument("initial distribution truncation does not match the response tensor");
    }

    std::vector<double> rho;
    if (initial) {
        rho.assign(initial->probs().begin(), initial->probs().end());
    } else {
        rho.assign(size, 1.0 / static_cast<double>(size));
    }
    std::vector<double> next(size, 0.0);
    auto norms = column_norms(response);
    OutcomeTable q(response.settings(), response.outcomes());

    std::uint64_t stride = rule.effective_stride();
    std::uint64_t hard_limit = rule.max_iterations + rule.extension_limit;
    std::deque<double> window;

    ReconstructionResult result{PhotonDistribution::uniform(static_cast<int>(size) - 1), {}, 0, StopReason::cap_reached, {}, 0, 0, {}};
    auto record = [&](std::uint64_t i, double eps) {
        TracePoint point{i, eps, log_likelihood(f.table(), 1.0, q), std::nullopt};
        if (reference) {
            point.fidelity = fidelity_of(rho, reference->probs());
        }
        result.trace.push_back(point);
    };

    for (std::uint64_t i = 0;; i++) {
        forward(response, rho, q);
        double eps = epsilon_of(f, q);

        window.push_back(eps);
        if (window.size() > rule.convergence_window + 1) {
            window.pop_front();
        }
        bool converged = false;
        if (window.size() == rule.convergence_window + 1) {
            double before = window.front();
            converged = before <= 0.0 || (before - eps) / before < rule.epsilon_rate_threshold;
        }
        if (converged && !result.converged_at) {
            result.converged_at = i;
        }

        std::optional<StopReason> stop;
        if (rule.stop_on_convergence && converged) {
            stop = i < rule.max_iterations ? StopReason::converged_early : StopReason::cap_reached;
        } else if (i == rule.max_iterations && (result.converged_at || rule.extension_limit == 0)) {
            stop = StopReason::cap_reached;
        } else if (i > rule.max_iterations && converged) {
            stop = StopReason::converged_after_cap;
        } else if (i >= hard_limit) {
            stop = StopReason::extension_exhausted;
        }

        if (stop || i % stride == 0) {
            record(i, eps);
        }
        if (stop) {
            result.stop_reason = *stop;
            result.iterations_run = i;
            result.final_epsilon = eps;
            result.final_log_likelihood = result.trace.back().log_likelihood;
            result.final_fidelity = result.trace.back().fidelity;
            break;
        }
        update(response, f, norms, rho, q, next);
        rho.swap(next);
    }
    result.rho_final = PhotonDistribution::from_probabilities(std::move(rho));
    return result;
}

double LinearInversionResult::negativity_mass() const {
    double mass = 0.0;
    for (double x : estimate) {
        if (x < 0.0) {
            mass -= x;
        }
    }
    return mass;
}

LinearInversionResult photorec::linear_inversion_baseline(const OutcomeFrequencies &f, const ResponseTensor &response) {
    check_shapes(f, response);
    auto rows = static_cast<Eigen::Index>(response.settings() * response.outcomes());
    auto cols = static_cast<Eigen::Index>(response.photon_numbers());
    Eigen::MatrixXd system(rows, cols);
    Eigen::VectorXd rhs(rows);
    for (std::size_t nu = 0; nu < response.settings(); nu++) {
        for (std::size_t m = 0; m < response.outcomes(); m++) {
            auto r = static_cast<Eigen::Index>(nu * response.outcomes() + m);
            auto row = response.row(nu, m);
            for (Eigen::Index n = 0; n < cols; n++) {
                system(r, n) = row[n];
            }
            rhs(r) = f(nu, m);
        }
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(system, Eigen::ComputeThinU | Eigen::ComputeThinV);
    auto rank = static_cast<std::size_t>(svd.rank());
    if (rows < cols) {
        throw RankDeficiencyError(rank, static_cast<std::size_t>(cols));
    }
    Eigen::VectorXd solution = svd.solve(rhs);

    LinearInversionResult result;
    result.estimate.assign(solution.data(), solution.data() + solution.size());
    result.effective_rank = rank;
    result.unknowns = static_cast<std::size_t>(cols);
    const auto &sv = svd.singularValues();
    result.condition_number = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
    return result;
}

double photorec::l1_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("l1_distance needs vectors of equal length");
    }
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); i++) {
        d += std::abs(a[i] - b[i]);
    }
    return d;
}

nlohmann::json photorec::to_json(const ReconstructionResult &result) {
    nlohmann::json trace = nlohmann::json::array();
    for (const auto &p : result.trace) {
        nlohmann::json point{{"iteration", p.iteration}, {"epsilon", p.epsilon}, {"log_likelihood", p.log_likelihood}};
        if (p.fidelity) {
            point["fidelity"] = *p.fidelity;
        }
        trace.push_back(point);
    }
    nlohmann::json out{
        {"rho_final", std::vector<double>(result.rho_final.probs().begin(), result.rho_final.probs().end())},
        {"truncation", result.rho_final.truncation()},
        {"iterations_run", result.iterations_run},
        {"stop_reason", to_string(result.stop_reason)},
        {"final_epsilon", result.final_epsilon},
        {"final_log_likelihood", result.final_log_likelihood},
        {"trace", trace},
    };
    out["converged_at"] = result.converged_at ? nlohmann::json(*result.converged_at) : nlohmann::json(nullptr);
    out["final_fidelity"] = result.final_fidelity ? nlohmann::json(*result.final_fidelity) : nlohmann::json(nullptr);
    return out;
}

void photorec::write_trace_csv(std::ostream &out, const ReconstructionResult &result) {
    out << "iteration,epsilon,log_likelihood,fidelity\n" << std::setprecision(12);
    for (const auto &p : result.trace) {
        out << p.iteration << ',' << p.epsilon << ',' << p.log_likelihood << ',';
        if (p.fidelity) {
            out << *p.fidelity;
        }
        out << '\n';
    }
}

void photorec::write_distribution_csv(
    std::ostream &out, const PhotonDistribution &rho, const std::optional<PhotonDistribution> &reference) {
    out << "n,probability" << (reference ? ",reference" : "") << '\n' << std::setprecision(12);
    for (std::size_t n = 0; n < rho.size(); n++) {
        out << n << ',' << rho[n];
        if (reference) {
            out << ',' << (*reference)[n];
        }
        out << '\n';
    }
}
