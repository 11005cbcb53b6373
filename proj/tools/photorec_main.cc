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

// photorec command line: simulate, sweep, reconstruct, ingest, baseline.
// Exit codes: 0 success, 1 validation error, 2 runtime or fit failure.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "photorec/counts_io.h"
#include "photorec/experiment_spec.h"
#include "photorec/harness.h"
#include "photorec/ingest.h"

using namespace photorec;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<unsigned> threads;
};

void add_common(CLI::App *cmd, CommonFlags &flags, bool config_required) {
    auto *opt = cmd->add_option("--config", flags.config, "Experiment config (JSON)");
    if (config_required) {
        opt->required();
    }
    cmd->add_option("--seed", flags.seed, "Override the master seed");
    cmd->add_option("--out", flags.out, "Output root directory (default: out)");
    cmd->add_option("--threads", flags.threads, "Worker threads")->check(CLI::PositiveNumber);
}

ExperimentSpec load_spec(const CommonFlags &flags) {
    auto spec = load_experiment_spec(flags.config);
    if (flags.seed) spec.seed = *flags.seed;
    if (flags.out) spec.output_dir = *flags.out;
    if (flags.threads) spec.threads = *flags.threads;
    return spec;
}

int cmd_simulate(const CommonFlags &flags) {
    auto output = run_single(load_spec(flags));
    for (const auto &w : output.warnings) {
        std::cerr << "warning: " << w << '\n';
    }
    const auto &r = output.run.result;
    std::cout << "iterations " << r.iterations_run << " (" << to_string(r.stop_reason) << ")\n";
    std::cout << std::setprecision(6) << "epsilon " << r.final_epsilon << '\n';
    if (r.final_fidelity) {
        std::cout << "fidelity " << *r.final_fidelity << '\n';
    }
    std::cout << "wrote " << output.directory.string() << '\n';
    return 0;
}

int cmd_sweep(const CommonFlags &flags) {
    auto output = run_sweep(load_spec(flags));
    int failed = 0;
    std::cout << std::setprecision(4);
    for (const auto &c : output.result.cells) {
        std::cout << c.cell.state.label() << " M=" << c.cell.max_count << " eta_max=" << c.cell.eta_max
                  << "  G=" << c.mean_fidelity << " +- " << c.std_fidelity;
        if (!c.error.empty()) {
            std::cout << "  [" << (c.replicas.size() - c.succeeded) << " failed: " << c.error << "]";
            failed++;
        }
        std::cout << '\n';
    }
    std::cout << "wrote " << output.directory.string() << '\n';
    return failed > 0 ? kExitRuntime : 0;
}

int cmd_baseline(const CommonFlags &flags) {
    auto report = run_baseline_comparison(load_spec(flags));
    std::cout << std::setw(2) << to_json(report) << '\n';
    return 0;
}

struct ReconstructFlags {
    std::string counts;
    std::optional<int> truncation;
    std::optional<std::uint64_t> cap;
    std::string name = "reconstruct";
};

int cmd_reconstruct(const CommonFlags &flags, const ReconstructFlags &rf) {
    ReconstructFromCountsOptions options;
    options.counts_csv = rf.counts;
    std::filesystem::path root = "out";
    std::string name = rf.name;
    if (!flags.config.empty()) {
        auto spec = load_experiment_spec(flags.config);
        options.truncation = spec.truncation;
        options.stopping = spec.stopping;
        root = spec.output_dir;
    }
    if (rf.truncation) options.truncation = *rf.truncation;
    if (rf.cap) options.stopping.max_iterations = *rf.cap;
    if (flags.out) root = *flags.out;
    options.directory = root / name;
    auto result = reconstruct_from_counts(options);
    std::cout << "iterations " << result.iterations_run << " (" << to_string(result.stop_reason) << ")\n";
    std::cout << std::setprecision(6) << "epsilon " << result.final_epsilon << "\nmean photon number "
              << result.rho_final.mean() << "\nwrote " << options.directory.string() << '\n';
    return 0;
}

struct IngestFlags {
    std::string manifest;
    int max_count = 3;
    int num_peaks = 0;
    double bin_width = 0.0;
    bool per_spectrum = false;
    std::string name = "ingest";
};

int cmd_ingest(const CommonFlags &flags, const IngestFlags &inf) {
    IngestOptions options;
    options.max_count = inf.max_count;
    options.num_peaks = inf.num_peaks;
    options.bin_width = inf.bin_width;
    options.pooled_fit = !inf.per_spectrum;
    auto result = ingest_directory(inf.manifest, options);

    std::filesystem::path dir = std::filesystem::path(flags.out.value_or("out")) / inf.name;
    std::filesystem::create_directories(dir);
    std::ofstream counts(dir / "counts.csv");
    write_counts_csv(counts, result.table.grid, result.table.counts);

    nlohmann::json fits = nlohmann::json::array();
    for (std::size_t i = 0; i < result.models.size(); i++) {
        nlohmann::json peaks = nlohmann::json::array();
        for (const auto &p : result.models[i].peaks) {
            peaks.push_back({{"amplitude", p.amplitude}, {"center", p.center}, {"width", p.width}});
        }
        const auto &d = result.models[i].diagnostics;
        auto t = result.thresholds[i].values();
        fits.push_back({
            {"peaks", peaks},
            {"thresholds", std::vector<double>(t.begin(), t.end())},
            {"iterations", d.iterations},
            {"reduced_chi_square", d.reduced_chi_square},
            {"residual_warning", d.residual_warning},
        });
        if (d.residual_warning) {
            std::cerr << "warning: peak fit " << i << " has poor residuals or overlapping peaks (reduced chi2 "
                      << d.reduced_chi_square << ")\n";
        }
    }
    std::ofstream peaks_out(dir / "peaks.json");
    peaks_out << std::setw(2) << nlohmann::json{{"pooled", options.pooled_fit}, {"fits", fits}} << '\n';
    std::cout << "ingested " << result.table.counts.settings() << " spectra into " << (dir / "counts.csv").string()
              << '\n';
    return 0;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Photon-number distribution reconstruction from low-resolution photon counters"};
    app.require_subcommand(1);

    CommonFlags simulate_flags, sweep_flags, baseline_flags, reconstruct_flags, ingest_flags;
    ReconstructFlags rf;
    IngestFlags inf;

    auto *simulate = app.add_subcommand("simulate", "Simulate and reconstruct one configuration");
    add_common(simulate, simulate_flags, true);
    auto *sweep = app.add_subcommand("sweep", "Fidelity sweep with replica statistics");
    add_common(sweep, sweep_flags, true);
    auto *baseline = app.add_subcommand("baseline", "Compare EM with direct linear inversion");
    add_common(baseline, baseline_flags, true);

    auto *reconstruct_cmd = app.add_subcommand("reconstruct", "Reconstruct from a counts CSV (nu,eta,m,count)");
    add_common(reconstruct_cmd, reconstruct_flags, false);
    reconstruct_cmd->add_option("--counts", rf.counts, "Counts CSV")->required()->check(CLI::ExistingFile);
    reconstruct_cmd->add_option("--N", rf.truncation, "Fock-space truncation (default 30 or from --config)");
    reconstruct_cmd->add_option("--cap", rf.cap, "Iteration cap (default: runs per efficiency)");
    reconstruct_cmd->add_option("--name", rf.name, "Output subdirectory name");

    auto *ingest = app.add_subcommand("ingest", "Convert per-efficiency charge spectra into a counts CSV");
    add_common(ingest, ingest_flags, false);
    ingest->add_option("--manifest", inf.manifest, "CSV manifest 'file,eta'")->required()->check(CLI::ExistingFile);
    ingest->add_option("--M", inf.max_count, "Counting capability (number of thresholds)")->check(CLI::PositiveNumber);
    ingest->add_option("--num-peaks", inf.num_peaks, "Photoelectron peaks to fit (default M+2)");
    ingest->add_option("--bin-width", inf.bin_width, "Bin width for raw charge lists");
    ingest->add_flag("--per-spectrum", inf.per_spectrum, "Fit peaks per spectrum instead of on the pooled spectrum");
    ingest->add_option("--name", inf.name, "Output subdirectory name");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(simulate_flags);
        if (sweep->parsed()) return cmd_sweep(sweep_flags);
        if (baseline->parsed()) return cmd_baseline(baseline_flags);
        if (reconstruct_cmd->parsed()) return cmd_reconstruct(reconstruct_flags, rf);
        if (ingest->parsed()) return cmd_ingest(ingest_flags, inf);
    } catch (const std::invalid_argument &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
