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

#ifndef _PHOTOREC_HARNESS_H
#define _PHOTOREC_HARNESS_H

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "photorec/experiment_spec.h"
#include "photorec/recon.h"

namespace photorec {

/// One point of the experiment grid.
struct Cell {
    StateSpec state;
    int max_count;
    double eta_max;
};

/// Everything produced by simulating and reconstructing one cell once.
struct CellRun {
    PhotonDistribution rho_true;
    EfficiencyGrid grid;
    std::optional<OutcomeCounts> counts;
    ReconstructionResult result;
};

/// Generates the state, builds grid and tensor, samples (or takes exact
/// frequencies) and reconstructs. Deterministic in (spec, cell, seed).
CellRun run_cell(const ExperimentSpec &spec, const Cell &cell, std::uint64_t seed);

/// The single cell of a non-sweep spec.
Cell single_cell(const ExperimentSpec &spec);

/// All cells of a sweep: states x M x eta_max, in that nesting order.
std::vector<Cell> sweep_cells(const ExperimentSpec &spec);

/// Seed used for replica `replica`.
std::uint64_t replica_seed(std::uint64_t master_seed, std::uint64_t replica);

/// Runs `count` independent tasks on `threads` workers.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)> &task);

struct SingleRunOutput {
    CellRun run;
    std::filesystem::path directory;
    std::vector<std::string> warnings;
};

/// Validates the spec, runs its single cell with the master seed and writes
/// <output_dir>/<name>/{summary.json, rho_final.csv, traces.csv, counts.csv}.
SingleRunOutput run_single(const ExperimentSpec &spec);

struct ReplicaRecord {
    std::uint64_t replica;
    std::uint64_t seed;
    std::optional<double> fidelity;
    double epsilon = 0.0;
    std::uint64_t iterations = 0;
    std::string stop_reason;
    std::string error;
};

struct CellResult {
    Cell cell;
    /// Over the successful replicas.
    double mean_fidelity = 0.0;
    /// Sample standard deviation (n - 1 denominator).
    double std_fidelity = 0.0;
    std::size_t succeeded = 0;
    std::vector<ReplicaRecord> replicas;
    /// First replica error, if any replica failed.
    std::string error;
};

struct SweepResult {
    std::vector<CellResult> cells;
};

/// Executes every (cell, replica) task; replica r uses replica_seed(seed, r)
/// for every cell. A failing task is recorded and the sweep continues.
SweepResult compute_sweep(const ExperimentSpec &spec);

struct SweepOutput {
    SweepResult result;
    std::filesystem::path directory;
};

/// compute_sweep plus files: sweep.csv (all cells), sweep_<family>_eta<eta>.csv
/// (one per panel), replicas.csv and summary.json.
SweepOutput run_sweep(const ExperimentSpec &spec);

struct BaselineReport {
    double em_l1 = 0.0;
    double baseline_l1 = 0.0;
    double baseline_negativity_mass = 0.0;
    double baseline_min_entry = 0.0;
    std::size_t effective_rank = 0;
    std::size_t unknowns = 0;
    double condition_number = 0.0;
    std::optional<double> em_fidelity;
    std::vector<double> baseline_estimate;
    std::vector<double> em_estimate;
    std::vector<double> truth;
};

/// Runs the linear-inversion baseline and EM on the same data of the spec's
/// single cell and compares both with the truth.
BaselineReport compare_with_baseline(const ExperimentSpec &spec);

/// compare_with_baseline plus <output_dir>/<name>/{baseline.json, baseline.csv}.
BaselineReport run_baseline_comparison(const ExperimentSpec &spec);

nlohmann::json to_json(const BaselineReport &report);

/// Reconstructs from a counts CSV and writes the usual single-run files.
struct ReconstructFromCountsOptions {
    std::filesystem::path counts_csv;
    int truncation = 30;
    StoppingOverrides stopping;
    std::filesystem::path directory;
};
ReconstructionResult reconstruct_from_counts(const ReconstructFromCountsOptions &options);

}  // namespace photorec

#endif
