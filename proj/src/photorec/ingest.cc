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

#include "photorec/ingest.h"

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>

#include "photorec/detector.h"
#include "photorec/rng.h"

using namespace photorec;

namespace {

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

std::vector<std::string> split_fields(const std::string &line) {
    std::vector<std::string> out;
    std::string current;
    for (char c : line) {
        if (c == ',' || c == ' ' || c == '\t' || c == '\r') {
            if (!current.empty()) {
                out.push_back(current);
                current.clear();
            }
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) {
        out.push_back(current);
    }
    return out;
}

bool parse_double(const std::string &text, double &value) {
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    return ec == std::errc() && ptr == text.data() + text.size();
}

// Triangular-kernel smoothing with the given half-width in bins.
std::vector<double> smooth(std::span<const std::uint64_t> counts, std::size_t half_width) {
    std::vector<double> out(counts.size(), 0.0);
    auto h = static_cast<long>(half_width);
    for (long j = 0; j < static_cast<long>(counts.size()); j++) {
        double acc = 0.0;
        double weight = 0.0;
        for (long d = -h; d <= h; d++) {
            long k = j + d;
            if (k < 0 || k >= static_cast<long>(counts.size())) {
                continue;
            }
            double w = static_cast<double>(h + 1 - std::abs(d));
            acc += w * static_cast<double>(counts[k]);
            weight += w;
        }
        out[j] = acc / weight;
    }
    return out;
}

// Gaussian sigma implied by the full width at half maximum around `peak`.
double half_max_sigma(const ChargeHistogram &hist, std::span<const double> smoothed, std::size_t peak) {
    double half = 0.5 * smoothed[peak];
    std::size_t left = peak;
    while (left > 0 && smoothed[left - 1] > half) {
        left--;
    }
    std::size_t right = peak;
    while (right + 1 < smoothed.size() && smoothed[right + 1] > half) {
        right++;
    }
    double fwhm = hist.edges()[right + 1] - hist.edges()[left];
    return fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
}

struct Candidate {
    std::size_t bin;
    double height;
};

// Local maxima of `s` whose topographic prominence is at least
// `min_relative` of their height.
std::vector<Candidate> prominent_maxima(const std::vector<double> &s, double min_relative) {
    std::vector<Candidate> out;
    std::size_t size = s.size();
    for (std::size_t j = 0; j < size; j++) {
        double h = s[j];
        if (h <= 0.0) {
            continue;
        }
        bool left_ok = j == 0 || s[j - 1] < h;
        // Plateaus: take the leftmost bin, require the plateau to fall on the right.
        std::size_t r = j;
        while (r + 1 < size && s[r + 1] == h) {
            r++;
        }
        bool right_ok = r + 1 == size || s[r + 1] < h;
        if (!left_ok || !right_ok) {
            continue;
        }
        double left_min = h;
        for (std::size_t k = j; k-- > 0;) {
            if (s[k] > h) {
                break;
            }
            left_min = std::min(left_min, s[k]);
        }
        double right_min = h;
        for (std::size_t k = r + 1; k < size; k++) {
            if (s[k] > h) {
                break;
            }
            right_min = std::min(right_min, s[k]);
        }
        double prominence = h - std::max(left_min, right_min);
        if (prominence >= min_relative * h) {
            out.push_back({j + (r - j) / 2, h});
        }
        j = r;
    }
    return out;
}

struct FitProblem {
    const ChargeHistogram &hist;
    std::size_t peaks;

    // Expected counts per bin and, when requested, the Jacobian.
    void evaluate(const Eigen::VectorXd &params, Eigen::VectorXd &model, Eigen::MatrixXd *jacobian) const {
        auto bins = static_cast<Eigen::Index>(hist.bins());
        model.setZero(bins);
        if (jacobian != nullptr) {
            jacobian->setZero(bins, params.size());
        }
        auto edges = hist.edges();
        for (std::size_t k = 0; k < peaks; k++) {
            double amplitude = params(3 * k);
            double center = params(3 * k + 1);
            double width = params(3 * k + 2);
            double z_prev = (edges[0] - center) / width;
            double cdf_prev = normal_cdf(z_prev);
            double pdf_prev = normal_pdf(z_prev);
            for (Eigen::Index j = 0; j < bins; j++) {
                double z = (edges[j + 1] - center) / width;
                // Bins far outside the peak contribute nothing measurable.
                if (z_prev > 12.0 || z < -12.0) {
                    z_prev = z;
                    cdf_prev = normal_cdf(z);
                    pdf_prev = normal_pdf(z);
                    continue;
                }
                double cdf = normal_cdf(z);
                double pdf = normal_pdf(z);
                double mass = cdf - cdf_prev;
                model(j) += amplitude * mass;
                if (jacobian != nullptr) {
                    (*jacobian)(j, 3 * k) = mass;
                    (*jacobian)(j, 3 * k + 1) = -amplitude * (pdf - pdf_prev) / width;
                    (*jacobian)(j, 3 * k + 2) = -amplitude * (z * pdf - z_prev * pdf_prev) / width;
                }
                z_prev = z;
                cdf_prev = cdf;
                pdf_prev = pdf;
            }
        }
    }
};

double weighted_chi_square(const Eigen::VectorXd &residual, const Eigen::VectorXd &weights) {
    return (residual.array().square() * weights.array()).sum();
}

// Splits `total` integer counts across outcomes in proportion to `mass`,
// preserving the total (largest remainder; ties go to the lower outcome).
std::vector<std::uint64_t> apportion(
    const std::vector<std::uint64_t> &whole, const std::vector<double> &fractional, std::uint64_t total) {
    std::vector<std::uint64_t> out(whole);
    std::vector<double> remainder(fractional.size());
    std::uint64_t assigned = std::accumulate(whole.begin(), whole.end(), std::uint64_t{0});
    for (std::size_t m = 0; m < fractional.size(); m++) {
        double floor_part = std::floor(fractional[m]);
        out[m] += static_cast<std::uint64_t>(floor_part);
        assigned += static_cast<std::uint64_t>(floor_part);
        remainder[m] = fractional[m] - floor_part;
    }
    std::vector<std::size_t> order(fractional.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return remainder[a] > remainder[b];
    });
    for (std::size_t i = 0; assigned < total; i = (i + 1) % order.size()) {
        out[order[i]]++;
        assigned++;
    }
    return out;
}

}  // namespace

ChargeHistogram::ChargeHistogram(std::vector<double> edges, std::vector<std::uint64_t> counts, double eta)
    : edges_(std::move(edges)), counts_(std::move(counts)), eta_(eta) {
    if (edges_.size() < 2 || edges_.size() != counts_.size() + 1) {
        throw std::invalid_argument("charge histogram needs bins + 1 edges and at least one bin");
    }
    for (std::size_t i = 1; i < edges_.size(); i++) {
        if (!(edges_[i] > edges_[i - 1])) {
            throw std::invalid_argument("charge histogram edges must be strictly increasing");
        }
    }
}

ChargeHistogram ChargeHistogram::from_charges(std::span<const double> charges, std::vector<double> edges, double eta) {
    if (edges.size() < 2) {
        throw std::invalid_argument("charge histogram needs at least two edges");
    }
    std::vector<std::uint64_t> counts(edges.size() - 1, 0);
    for (double q : charges) {
        auto it = std::upper_bound(edges.begin(), edges.end(), q);
        auto bin = static_cast<std::ptrdiff_t>(it - edges.begin()) - 1;
        bin = std::clamp<std::ptrdiff_t>(bin, 0, static_cast<std::ptrdiff_t>(counts.size()) - 1);
        counts[bin]++;
    }
    return ChargeHistogram(std::move(edges), std::move(counts), eta);
}

ChargeHistogram ChargeHistogram::from_centers(
    std::span<const double> centers, std::vector<std::uint64_t> counts, double eta) {
    if (centers.size() < 2 || centers.size() != counts.size()) {
        throw std::invalid_argument("need at least two (charge, count) rows");
    }
    std::vector<double> edges(centers.size() + 1);
    for (std::size_t i = 1; i < centers.size(); i++) {
        if (!(centers[i] > centers[i - 1])) {
            throw std::invalid_argument("charge column must be strictly increasing");
        }
        edges[i] = 0.5 * (centers[i - 1] + centers[i]);
    }
    edges.front() = centers.front() - (edges[1] - centers.front());
    edges.back() = centers.back() + (centers.back() - edges[centers.size() - 1]);
    return ChargeHistogram(std::move(edges), std::move(counts), eta);
}

std::uint64_t ChargeHistogram::total() const {
    return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

ChargeHistogram photorec::pool_histograms(std::span<const ChargeHistogram> spectra) {
    if (spectra.empty()) {
        throw std::invalid_argument("no spectra to pool");
    }
    std::vector<std::uint64_t> counts(spectra[0].counts().begin(), spectra[0].counts().end());
    for (std::size_t s = 1; s < spectra.size(); s++) {
        if (!std::ranges::equal(spectra[s].edges(), spectra[0].edges())) {
            throw std::invalid_argument(
                "pooled peak fit needs spectra with identical binning; use per-spectrum fitting instead");
        }
        for (std::size_t j = 0; j < counts.size(); j++) {
            counts[j] += spectra[s].counts()[j];
        }
    }
    auto edges = spectra[0].edges();
    return ChargeHistogram(std::vector<double>(edges.begin(), edges.end()), std::move(counts), 0.0);
}

std::vector<double> photorec::uniform_edges(double lo, double hi, double bin_width) {
    if (!(hi > lo) || !(bin_width > 0.0)) {
        throw std::invalid_argument("uniform_edges needs hi > lo and a positive bin width");
    }
    auto bins = static_cast<std::size_t>(std::ceil((hi - lo) / bin_width - 1e-9));
    bins = std::max<std::size_t>(bins, 1);
    std::vector<double> edges(bins + 1);
    for (std::size_t i = 0; i <= bins; i++) {
        edges[i] = lo + static_cast<double>(i) * bin_width;
    }
    return edges;
}

double PeakModel::expected_counts(double lo, double hi) const {
    double total = 0.0;
    for (const auto &p : peaks) {
        total += p.amplitude * (normal_cdf((hi - p.center) / p.width) - normal_cdf((lo - p.center) / p.width));
    }
    return total;
}

PeakModel photorec::fit_gaussian_peaks(const ChargeHistogram &hist, int num_peaks, const FitOptions &options) {
    if (num_peaks < 1) {
        throw std::invalid_argument("num_peaks must be >= 1");
    }
    auto peaks = static_cast<std::size_t>(num_peaks);
    auto smoothed = smooth(hist.counts(), options.smoothing_half_width);
    auto candidates = prominent_maxima(smoothed, options.min_relative_prominence);
    if (candidates.size() < peaks) {
        throw FitError(
            "found " + std::to_string(candidates.size()) + " candidate peaks in the charge spectrum, need " +
            std::to_string(num_peaks));
    }
    std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate &a, const Candidate &b) {
        return a.height > b.height;
    });
    candidates.resize(peaks);
    std::sort(candidates.begin(), candidates.end(), [](const Candidate &a, const Candidate &b) {
        return a.bin < b.bin;
    });

    // Spread of the whole spectrum; bounds the width of a lone peak.
    double total = static_cast<double>(hist.total());
    double mean = 0.0;
    for (std::size_t j = 0; j < hist.bins(); j++) {
        mean += hist.center(j) * static_cast<double>(hist.counts()[j]) / total;
    }
    double var = 0.0;
    for (std::size_t j = 0; j < hist.bins(); j++) {
        var += std::pow(hist.center(j) - mean, 2) * static_cast<double>(hist.counts()[j]) / total;
    }
    double max_width = std::sqrt(var);
    for (std::size_t k = 1; k < peaks; k++) {
        double spacing = hist.center(candidates[k].bin) - hist.center(candidates[k - 1].bin);
        max_width = k == 1 ? 0.5 * spacing : std::min(max_width, 0.5 * spacing);
    }

    std::vector<double> initial_width(peaks);
    for (std::size_t k = 0; k < peaks; k++) {
        std::size_t bin = candidates[k].bin;
        double floor = hist.width(bin);
        initial_width[k] = std::clamp(half_max_sigma(hist, smoothed, bin), floor, std::max(floor, max_width));
    }

    Eigen::VectorXd params(3 * peaks);
    for (std::size_t k = 0; k < peaks; k++) {
        auto bin = candidates[k].bin;
        params(3 * k) = candidates[k].height * std::sqrt(2.0 * std::numbers::pi) * initial_width[k] / hist.width(bin);
        params(3 * k + 1) = hist.center(bin);
        params(3 * k + 2) = initial_width[k];
    }

    auto bins = static_cast<Eigen::Index>(hist.bins());
    Eigen::VectorXd observed(bins);
    Eigen::VectorXd weights(bins);
    for (Eigen::Index j = 0; j < bins; j++) {
        observed(j) = static_cast<double>(hist.counts()[j]);
        weights(j) = 1.0 / std::max(observed(j), 1.0);
    }

    // Trial steps may not push a peak off the histogram.
    double lo = hist.edges().front();
    double hi = hist.edges().back();
    double range = hi - lo;

    FitProblem problem{hist, peaks};
    Eigen::VectorXd model;
    Eigen::MatrixXd jacobian;
    problem.evaluate(params, model, &jacobian);
    double chi2 = weighted_chi_square(observed - model, weights);
    double lambda = 1e-3;
    bool converged = false;
    std::size_t iteration = 0;
    for (; iteration < options.max_iterations && !converged; iteration++) {
        Eigen::MatrixXd weighted_jacobian = weights.asDiagonal() * jacobian;
        Eigen::MatrixXd normal = jacobian.transpose() * weighted_jacobian;
        Eigen::VectorXd gradient = weighted_jacobian.transpose() * (observed - model);
        bool accepted = false;
        while (!accepted) {
            Eigen::MatrixXd damped = normal;
            damped.diagonal() += lambda * normal.diagonal().cwiseMax(1e-12);
            Eigen::VectorXd step = damped.ldlt().solve(gradient);
            Eigen::VectorXd trial = params + step;
            bool valid = step.allFinite();
            for (std::size_t k = 0; k < peaks && valid; k++) {
                double center = trial(3 * k + 1);
                double width = trial(3 * k + 2);
                valid = trial(3 * k) >= 0.0 && width > 0.0 && width <= range && center >= lo && center <= hi;
            }
            Eigen::VectorXd trial_model;
            double trial_chi2 = INFINITY;
            if (valid) {
                problem.evaluate(trial, trial_model, nullptr);
                trial_chi2 = weighted_chi_square(observed - trial_model, weights);
            }
            if (trial_chi2 <= chi2) {
                double improvement = (chi2 - trial_chi2) / std::max(chi2, 1e-300);
                params = trial;
                chi2 = trial_chi2;
                lambda = std::max(lambda / 10.0, 1e-12);
                accepted = true;
                converged = improvement < options.tolerance;
            } else {
                lambda *= 10.0;
                if (lambda > 1e16) {
                    // No descent direction left: at a minimum to machine precision.
                    accepted = true;
                    converged = true;
                }
            }
        }
        problem.evaluate(params, model, &jacobian);
    }
    if (!converged) {
        throw FitError("Gaussian peak fit did not converge within " + std::to_string(options.max_iterations) + " iterations");
    }

    PeakModel result;
    for (std::size_t k = 0; k < peaks; k++) {
        result.peaks.push_back({params(3 * k), params(3 * k + 1), params(3 * k + 2)});
    }
    std::sort(result.peaks.begin(), result.peaks.end(), [](const GaussianPeak &a, const GaussianPeak &b) {
        return a.center < b.center;
    });
    result.diagnostics.iterations = iteration;
    auto dof = std::max<Eigen::Index>(1, bins - static_cast<Eigen::Index>(3 * peaks));
    result.diagnostics.reduced_chi_square = chi2 / static_cast<double>(dof);
    result.diagnostics.residual_warning = result.diagnostics.reduced_chi_square > options.residual_warning_level;
    for (std::size_t k = 1; k < peaks; k++) {
        const auto &a = result.peaks[k - 1];
        const auto &b = result.peaks[k];
        if (b.center - a.center < std::max(a.width, b.width)) {
            result.diagnostics.residual_warning = true;
        }
    }
    // A peak narrower than the binning is a spike, not a resolved peak.
    double min_bin_width = INFINITY;
    for (std::size_t j = 0; j < hist.bins(); j++) {
        min_bin_width = std::min(min_bin_width, hist.width(j));
    }
    for (const auto &p : result.peaks) {
        if (p.width < min_bin_width) {
            result.diagnostics.residual_warning = true;
        }
    }
    return result;
}

ThresholdSet::ThresholdSet(std::vector<double> thresholds) : thresholds_(std::move(thresholds)) {
    if (thresholds_.empty()) {
        throw std::invalid_argument("threshold set needs at least one threshold");
    }
    for (std::size_t k = 1; k < thresholds_.size(); k++) {
        if (!(thresholds_[k] > thresholds_[k - 1])) {
            throw std::invalid_argument("thresholds must be strictly increasing");
        }
    }
}

ThresholdSet ThresholdSet::leading(std::size_t count) const {
    if (count < 1 || count > thresholds_.size()) {
        throw std::invalid_argument(
            "requested " + std::to_string(count) + " thresholds but only " + std::to_string(thresholds_.size()) +
            " are available (fit more peaks)");
    }
    return ThresholdSet(std::vector<double>(thresholds_.begin(), thresholds_.begin() + count));
}

ThresholdSet photorec::midpoint_thresholds(const PeakModel &model) {
    if (model.peaks.size() < 2) {
        throw std::invalid_argument("midpoint thresholds need at least two peaks");
    }
    std::vector<double> t;
    for (std::size_t k = 1; k < model.peaks.size(); k++) {
        if (!(model.peaks[k].center > model.peaks[k - 1].center)) {
            throw std::invalid_argument("peak centers must be strictly increasing");
        }
        t.push_back(0.5 * (model.peaks[k - 1].center + model.peaks[k].center));
    }
    return ThresholdSet(std::move(t));
}

std::vector<std::uint64_t> photorec::bin_by_thresholds(
    const ChargeHistogram &hist, const ThresholdSet &thresholds, int max_count) {
    if (max_count < 1 || thresholds.size() != static_cast<std::size_t>(max_count)) {
        throw std::invalid_argument(
            "binning into M+1 outcomes needs exactly M thresholds; got " + std::to_string(thresholds.size()) +
            " for M=" + std::to_string(max_count));
    }
    std::size_t outcomes = static_cast<std::size_t>(max_count) + 1;
    std::vector<std::uint64_t> whole(outcomes, 0);
    std::vector<double> fractional(outcomes, 0.0);
    auto t = thresholds.values();
    auto edges = hist.edges();
    for (std::size_t j = 0; j < hist.bins(); j++) {
        std::uint64_t count = hist.counts()[j];
        if (count == 0) {
            continue;
        }
        double lo = edges[j];
        double hi = edges[j + 1];
        // Outcome of the bin's lower and upper edge.
        auto first = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), lo) - t.begin());
        auto last = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), hi) - t.begin());
        if (first == last) {
            whole[first] += count;
            continue;
        }
        for (std::size_t m = first; m <= last; m++) {
            double a = m == first ? lo : t[m - 1];
            double b = m == last ? hi : t[m];
            fractional[m] += static_cast<double>(count) * (b - a) / (hi - lo);
        }
    }
    return apportion(whole, fractional, hist.total());
}

ChargeHistogram photorec::synthesize_spectrum(
    const PhotonDistribution &rho,
    double eta,
    double gain,
    double noise_width,
    std::uint64_t runs,
    std::uint64_t seed,
    const SpectrumOptions &options) {
    if (!(gain > 0.0) || !(noise_width > 0.0)) {
        throw std::invalid_argument("gain and noise width must be positive");
    }
    if (runs < 1) {
        throw std::invalid_argument("number of runs must be >= 1");
    }
    auto detected = detection_distribution(rho, eta);
    std::vector<double> cumulative(detected.size());
    std::partial_sum(detected.begin(), detected.end(), cumulative.begin());

    double bin_width = options.bin_width > 0.0 ? options.bin_width : noise_width / 5.0;
    double lo = -6.0 * noise_width;
    double hi = (rho.truncation() + 1) * gain + 6.0 * noise_width;
    auto edges = uniform_edges(lo, hi, bin_width);

    Rng rng(seed);
    std::vector<double> charges(runs);
    for (auto &q : charges) {
        double u = rng.uniform() * cumulative.back();
        auto m = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
        m = std::min(m, detected.size() - 1);
        q = static_cast<double>(m) * gain + noise_width * rng.normal();
    }
    return ChargeHistogram::from_charges(charges, std::move(edges), eta);
}

SpectrumFile photorec::read_spectrum(std::istream &in) {
    SpectrumFile out;
    std::string line;
    std::size_t line_no = 0;
    std::size_t columns = 0;
    while (std::getline(in, line)) {
        line_no++;
        auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        auto fields = split_fields(line);
        if (fields.empty()) {
            continue;
        }
        if (columns == 0) {
            columns = fields.size();
            if (columns > 2) {
                throw std::invalid_argument("spectrum line " + std::to_string(line_no) + ": expected one or two columns");
            }
            // A non-numeric first row is a header.
            double probe;
            if (!parse_double(fields[0], probe)) {
                continue;
            }
        }
        if (fields.size() != columns) {
            throw std::invalid_argument("spectrum line " + std::to_string(line_no) + ": inconsistent number of columns");
        }
        double charge;
        if (!parse_double(fields[0], charge) || !std::isfinite(charge)) {
            throw std::invalid_argument("spectrum line " + std::to_string(line_no) + ": bad charge value");
        }
        out.charges.push_back(charge);
        if (columns == 2) {
            double count;
            if (!parse_double(fields[1], count) || count < 0.0 || count != std::floor(count)) {
                throw std::invalid_argument(
                    "spectrum line " + std::to_string(line_no) + ": count must be a nonnegative integer");
            }
            out.counts.push_back(static_cast<std::uint64_t>(count));
        }
    }
    out.is_histogram = columns == 2;
    if (out.charges.empty()) {
        throw std::invalid_argument("spectrum file has no data");
    }
    return out;
}

std::vector<ManifestEntry> photorec::read_manifest(std::istream &in, const std::filesystem::path &base_dir) {
    std::vector<ManifestEntry> out;
    std::string line;
    std::size_t line_no = 0;
    bool seen_header = false;
    while (std::getline(in, line)) {
        line_no++;
        auto fields = split_fields(line);
        if (fields.empty() || fields[0][0] == '#') {
            continue;
        }
        if (!seen_header) {
            seen_header = true;
            if (fields.size() != 2 || fields[0] != "file" || fields[1] != "eta") {
                throw std::invalid_argument("manifest must start with the header 'file,eta'");
            }
            continue;
        }
        double eta;
        if (fields.size() != 2 || !parse_double(fields[1], eta)) {
            throw std::invalid_argument("manifest line " + std::to_string(line_no) + ": expected 'file,eta'");
        }
        out.push_back({base_dir / fields[0], eta});
    }
    if (out.empty()) {
        throw std::invalid_argument("manifest lists no spectra");
    }
    return out;
}

IngestResult photorec::ingest_spectra(std::span<const ChargeHistogram> spectra, const IngestOptions &options) {
    if (spectra.empty()) {
        throw std::invalid_argument("no spectra to ingest");
    }
    if (options.max_count < 1) {
        throw std::invalid_argument("counting capability M must be >= 1");
    }
    int num_peaks = options.num_peaks > 0 ? options.num_peaks : options.max_count + 2;
    if (num_peaks < options.max_count + 1) {
        throw std::invalid_argument("need at least M+1 fitted peaks to place M thresholds");
    }
    std::vector<const ChargeHistogram *> sorted;
    for (const auto &s : spectra) {
        sorted.push_back(&s);
    }
    std::stable_sort(sorted.begin(), sorted.end(), [](auto *a, auto *b) {
        return a->eta() < b->eta();
    });
    std::vector<double> etas;
    for (auto *s : sorted) {
        etas.push_back(s->eta());
    }
    EfficiencyGrid grid(std::move(etas));

    IngestResult result{CountsTable{grid, OutcomeCounts(1, 2, {1, 0})}, {}, {}};
    if (options.pooled_fit) {
        auto pooled = pool_histograms(spectra);
        auto model = fit_gaussian_peaks(pooled, num_peaks, options.fit);
        result.models.push_back(model);
        result.thresholds.push_back(midpoint_thresholds(model).leading(options.max_count));
    } else {
        for (auto *s : sorted) {
            auto model = fit_gaussian_peaks(*s, num_peaks, options.fit);
            result.models.push_back(model);
            result.thresholds.push_back(midpoint_thresholds(model).leading(options.max_count));
        }
    }

    std::size_t outcomes = static_cast<std::size_t>(options.max_count) + 1;
    std::vector<std::uint64_t> counts;
    for (std::size_t nu = 0; nu < sorted.size(); nu++) {
        const auto &t = result.thresholds[options.pooled_fit ? 0 : nu];
        auto row = bin_by_thresholds(*sorted[nu], t, options.max_count);
        counts.insert(counts.end(), row.begin(), row.end());
    }
    result.table = CountsTable{grid, OutcomeCounts(sorted.size(), outcomes, std::move(counts))};
    return result;
}

IngestResult photorec::ingest_directory(const std::filesystem::path &manifest, const IngestOptions &options) {
    std::ifstream manifest_in(manifest);
    if (!manifest_in) {
        throw std::invalid_argument("cannot open manifest " + manifest.string());
    }
    auto entries = read_manifest(manifest_in, manifest.parent_path());
    std::vector<SpectrumFile> files;
    for (const auto &e : entries) {
        std::ifstream in(e.file);
        if (!in) {
            throw std::invalid_argument("cannot open spectrum file " + e.file.string());
        }
        try {
            files.push_back(read_spectrum(in));
        } catch (const std::invalid_argument &ex) {
            throw std::invalid_argument(e.file.string() + ": " + ex.what());
        }
    }

    std::vector<ChargeHistogram> spectra;
    bool raw = std::any_of(files.begin(), files.end(), [](const SpectrumFile &f) {
        return !f.is_histogram;
    });
    if (raw) {
        // Raw charge lists share one binning so that they can be pooled.
        double lo = INFINITY;
        double hi = -INFINITY;
        for (const auto &f : files) {
            if (f.is_histogram) {
                throw std::invalid_argument("cannot mix raw charge lists and histograms in one manifest");
            }
            auto [mn, mx] = std::minmax_element(f.charges.begin(), f.charges.end());
            lo = std::min(lo, *mn);
            hi = std::max(hi, *mx);
        }
        if (!(hi > lo)) {
            hi = lo + 1.0;
        }
        double width = options.bin_width > 0.0 ? options.bin_width : (hi - lo) / 1000.0;
        auto edges = uniform_edges(lo, hi + width, width);
        for (std::size_t i = 0; i < files.size(); i++) {
            spectra.push_back(ChargeHistogram::from_charges(files[i].charges, edges, entries[i].eta));
        }
    } else {
        for (std::size_t i = 0; i < files.size(); i++) {
            spectra.push_back(ChargeHistogram::from_centers(files[i].charges, files[i].counts, entries[i].eta));
        }
    }
    return ingest_spectra(spectra, options);
}
