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

#ifndef _PHOTOREC_INGEST_H
#define _PHOTOREC_INGEST_H

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "photorec/counts_io.h"
#include "photorec/states.h"

namespace photorec {

/// Pulse-height (charge) spectrum recorded at one efficiency setting.
class ChargeHistogram {
   public:
    ChargeHistogram(std::vector<double> edges, std::vector<std::uint64_t> counts, double eta);

    /// Histograms raw per-pulse charges into `edges`; charges outside the
    /// edges are clamped into the first or last bin.
    static ChargeHistogram from_charges(std::span<const double> charges, std::vector<double> edges, double eta);

    /// Builds a histogram from (bin center, count) pairs. Centers must be
    /// strictly increasing; edges are placed midway between centers.
    static ChargeHistogram from_centers(std::span<const double> centers, std::vector<std::uint64_t> counts, double eta);

    std::size_t bins() const {
        return counts_.size();
    }
    std::span<const double> edges() const {
        return edges_;
    }
    std::span<const std::uint64_t> counts() const {
        return counts_;
    }
    double eta() const {
        return eta_;
    }
    double center(std::size_t bin) const {
        return 0.5 * (edges_[bin] + edges_[bin + 1]);
    }
    double width(std::size_t bin) const {
        return edges_[bin + 1] - edges_[bin];
    }
    std::uint64_t total() const;

   private:
    std::vector<double> edges_;
    std::vector<std::uint64_t> counts_;
    double eta_;
};

/// Bin-wise sum of histograms that share identical edges.
ChargeHistogram pool_histograms(std::span<const ChargeHistogram> spectra);

/// Evenly spaced edges from lo to hi.
std::vector<double> uniform_edges(double lo, double hi, double bin_width);

/// Photoelectron peak: `amplitude` is the peak area in counts.
struct GaussianPeak {
    double amplitude;
    double center;
    double width;
};

struct FitDiagnostics {
    std::size_t iterations = 0;
    /// Poisson-weighted chi-square per degree of freedom at the optimum.
    double reduced_chi_square = 0.0;
    /// Set when the residuals are poor (reduced chi-square above
    /// `FitOptions::residual_warning_level`) or two fitted peaks are closer
    /// than their widths; the fit converged but should not be trusted blindly.
    bool residual_warning = false;
};

struct PeakModel {
    std::vector<GaussianPeak> peaks;
    FitDiagnostics diagnostics;

    /// Expected counts in [lo, hi).
    double expected_counts(double lo, double hi) const;
};

class FitError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

struct FitOptions {
    /// Half-width, in bins, of the triangular smoothing kernel used to find
    /// initial peak positions.
    std::size_t smoothing_half_width = 2;
    /// A local maximum of the smoothed spectrum is a candidate peak when its
    /// prominence is at least this fraction of its height.
    double min_relative_prominence = 0.3;
    std::size_t max_iterations = 500;
    double tolerance = 1e-10;
    double residual_warning_level = 3.0;
};

/// Fits a sum of `num_peaks` Gaussians to the histogram by damped
/// (Levenberg-Marquardt) least squares with Poisson weights 1/max(count, 1),
/// integrating each Gaussian over each bin. Initial centers are the
/// num_peaks highest prominent maxima of the smoothed histogram; initial
/// widths are half the minimum center spacing.
///
/// Throws FitError when fewer candidate maxima than num_peaks are found or
/// when the iteration cap is reached without convergence.
PeakModel fit_gaussian_peaks(const ChargeHistogram &hist, int num_peaks, const FitOptions &options = {});

/// Charge thresholds t_1 < ... < t_P between consecutive peaks.
class ThresholdSet {
   public:
    explicit ThresholdSet(std::vector<double> thresholds);

    std::size_t size() const {
        return thresholds_.size();
    }
    double operator[](std::size_t k) const {
        return thresholds_[k];
    }
    std::span<const double> values() const {
        return thresholds_;
    }
    /// The first `count` thresholds.
    ThresholdSet leading(std::size_t count) const;

   private:
    std::vector<double> thresholds_;
};

/// t_k = (center_{k-1} + center_k) / 2.
ThresholdSet midpoint_thresholds(const PeakModel &model);

/// Counts per outcome m = 0..M: outcome m collects the histogram mass in
/// (t_m, t_{m+1}] with t_0 = -inf and t_{M+1} = +inf. A bin that straddles a
/// threshold is split in proportion to the width on each side; fractional
/// parts are apportioned by largest remainder so the total is preserved
/// exactly.
std::vector<std::uint64_t> bin_by_thresholds(const ChargeHistogram &hist, const ThresholdSet &thresholds, int max_count);

struct SpectrumOptions {
    /// Bin width in charge units; 0 picks noise_width / 5.
    double bin_width = 0.0;
};

/// Test fixture emulating the detector: draws the detected photon number m
/// from p_eta(m), emits charge m * gain + N(0, noise_width^2), histograms.
/// Edges span [-6 noise_width, (N + 1) gain + 6 noise_width] so that spectra
/// of the same truncation, gain and noise share bins.
ChargeHistogram synthesize_spectrum(
    const PhotonDistribution &rho,
    double eta,
    double gain,
    double noise_width,
    std::uint64_t runs,
    std::uint64_t seed,
    const SpectrumOptions &options = {});

/// Reads a spectrum file: two numeric columns (charge, count) per line, or a
/// single column of raw per-pulse charges. Blank lines and '#' comments are
/// skipped; commas, tabs and spaces all separate columns.
struct SpectrumFile {
    std::vector<double> charges;
    std::vector<std::uint64_t> counts;
    bool is_histogram = false;
};
SpectrumFile read_spectrum(std::istream &in);

struct ManifestEntry {
    std::filesystem::path file;
    double eta;
};

/// CSV manifest with header "file,eta"; file paths relative to `base_dir`.
std::vector<ManifestEntry> read_manifest(std::istream &in, const std::filesystem::path &base_dir);

struct IngestOptions {
    int max_count = 3;
    /// Peaks to fit; 0 selects max_count + 2.
    int num_peaks = 0;
    /// Bin width for raw charge lists; 0 picks a width from the data.
    double bin_width = 0.0;
    /// Fit the peaks once on the pooled spectrum of all settings (same
    /// detector, same gain) instead of per spectrum.
    bool pooled_fit = true;
    FitOptions fit;
};

struct IngestResult {
    CountsTable table;
    std::vector<PeakModel> models;
    std::vector<ThresholdSet> thresholds;
};

/// Converts spectra (one per efficiency setting, any order) into the counts
/// table: sorts by eta, fits peaks, places midpoint thresholds, bins.
IngestResult ingest_spectra(std::span<const ChargeHistogram> spectra, const IngestOptions &options);

/// Loads the manifest's spectrum files and runs ingest_spectra.
IngestResult ingest_directory(const std::filesystem::path &manifest, const IngestOptions &options);

}  // namespace photorec

#endif
