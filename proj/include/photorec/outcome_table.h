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

#ifndef _PHOTOREC_OUTCOME_TABLE_H
#define _PHOTOREC_OUTCOME_TABLE_H

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace photorec {

/// Dense (setting nu) x (outcome m) table of doubles, row-major.
///
/// Holds both observed frequencies f_nu^m and model probabilities q_nu^m.
class OutcomeTable {
   public:
    OutcomeTable() = default;
    OutcomeTable(std::size_t settings, std::size_t outcomes, double fill = 0.0)
        : settings_(settings), outcomes_(outcomes), values_(settings * outcomes, fill) {
    }

    std::size_t settings() const {
        return settings_;
    }
    std::size_t outcomes() const {
        return outcomes_;
    }
    double &operator()(std::size_t nu, std::size_t m) {
        return values_[nu * outcomes_ + m];
    }
    double operator()(std::size_t nu, std::size_t m) const {
        return values_[nu * outcomes_ + m];
    }
    std::span<const double> row(std::size_t nu) const {
        return std::span<const double>(values_).subspan(nu * outcomes_, outcomes_);
    }
    std::span<double> row(std::size_t nu) {
        return std::span<double>(values_).subspan(nu * outcomes_, outcomes_);
    }
    std::span<const double> values() const {
        return values_;
    }

    bool same_shape(const OutcomeTable &other) const {
        return settings_ == other.settings_ && outcomes_ == other.outcomes_;
    }

   private:
    std::size_t settings_ = 0;
    std::size_t outcomes_ = 0;
    std::vector<double> values_;
};

/// Event counts n_{m nu}: one row per efficiency setting, one column per
/// outcome m = 0..M.
class OutcomeCounts {
   public:
    /// Throws if a row is empty (total zero) or the shape is inconsistent.
    OutcomeCounts(std::size_t settings, std::size_t outcomes, std::vector<std::uint64_t> counts);

    std::size_t settings() const {
        return settings_;
    }
    std::size_t outcomes() const {
        return outcomes_;
    }
    std::uint64_t operator()(std::size_t nu, std::size_t m) const {
        return counts_[nu * outcomes_ + m];
    }
    std::span<const std::uint64_t> row(std::size_t nu) const {
        return std::span<const std::uint64_t>(counts_).subspan(nu * outcomes_, outcomes_);
    }
    std::uint64_t row_total(std::size_t nu) const;

    /// The common n_nu. Throws if the rows have different totals.
    std::uint64_t runs_per_eta() const;
    bool has_equal_rows() const;

   private:
    std::size_t settings_;
    std::size_t outcomes_;
    std::vector<std::uint64_t> counts_;
};

/// Frequencies f_nu^m: rows are probability vectors (sum 1 within 1e-12).
class OutcomeFrequencies {
   public:
    /// Validates nonnegativity and unit row sums.
    explicit OutcomeFrequencies(OutcomeTable table);

    std::size_t settings() const {
        return table_.settings();
    }
    std::size_t outcomes() const {
        return table_.outcomes();
    }
    double operator()(std::size_t nu, std::size_t m) const {
        return table_(nu, m);
    }
    std::span<const double> row(std::size_t nu) const {
        return table_.row(nu);
    }
    const OutcomeTable &table() const {
        return table_;
    }

   private:
    OutcomeTable table_;
};

inline constexpr double kRowSumTolerance = 1e-12;

}  // namespace photorec

#endif
