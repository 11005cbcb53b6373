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

#include "photorec/harness.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <thread>

#include "photorec/counts_io.h"
#include "photorec/rng.h"
#include "photorec/sampler.h"

using namespace photorec;
using nlohmann::json;

namespace {

std::ofstream open_output(const std::filesystem::path &path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return out;
}

std::filesystem::path prepare_directory(const ExperimentSpec &spec) {
    auto dir = spec.output_dir / spec.name;
    std::filesystem::create_directories(dir);
    return dir;
}

json stopping_json(const StoppingRule &rule) {
    return json{
        {"max_iterations", rule.max_iterations},
        {"convergence_window", rule.convergence_window},
        {"epsilon_rate_threshold", rule.epsilon_rate_threshold},
        {"extension_limit", rule.extension_limit},
        {"stop_on_convergence", rule.stop_on_convergence},
        {"trace_stride", rule.effective_stride()},
    };
}

json cell_json(const Cell &cell) {
    return json{{"state", cell.state.label()}, {"family", to_string(cell.state.family)}, {"M", cell.max_count}, {"eta_max", cell.eta_max}};
}

// Nominal mean photon number used to label sweep rows.
std::string nominal_mean(const StateSpec &s) {
    std::ostringstream out;
    switch (s.family) {
        case StateFamily::coherent:
        case StateFamily::thermal:
            out << *s.mean;
            break;
        case StateFamily::fock:
            out << *s.n;
            break;
        case StateFamily::fock_superposition:
            out << (*s.n_lo + *s.n_hi) / 2;
            break;
        case StateFamily::custom:
            break;
    }
    return out.str();
}

std::string format_number(double x) {
    std::ostringstream out;
    out << x;
    return out.str();
}

}  // namespace

std::uint64_t photorec::replica_seed(std::uint64_t master_seed, std::uint64_t replica) {
    return derive_subseed(master_seed, replica);
}

void photorec::parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)> &task) {
    unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; i++) {
            task(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; w++) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                task(i);
            }
        });
    }
}

CellRun photorec::run_cell(const ExperimentSpec &spec, const Cell &cell, std::uint64_t seed) {
    auto rho_true = cell.state.build(spec.truncation);
    auto grid = EfficiencyGrid::uniform(spec.settings, cell.eta_max);
    ResponseTensor response(grid, DetectorConfig{cell.max_count, spec.truncation});
    auto q = response.binned_distributions(rho_true);
    auto rule = spec.stopping.resolve(spec.runs);
    auto initial = spec.initializer.build(spec.truncation, seed);
    if (spec.exact) {
        auto f = exact_frequencies(q);
        return CellRun{rho_true, grid, std::nullopt, reconstruct(f, response, rule, rho_true, initial)};
    }
    auto counts = sample_counts(q, spec.runs, seed);
    auto f = to_frequencies(counts);
    auto result = reconstruct(f, response, rule, rho_true, initial);
    return CellRun{rho_true, grid, std::move(counts), std::move(result)};
}

Cell photorec::single_cell(const ExperimentSpec &spec) {
    return Cell{spec.expanded_states().at(0), spec.max_counts.at(0), spec.eta_max.at(0)};
}

std::vector<Cell> photorec::sweep_cells(const ExperimentSpec &spec) {
    std::vector<Cell> cells;
    for (const auto &state : spec.expanded_states()) {
        for (int m : spec.max_counts) {
            for (double eta : spec.eta_max) {
                cells.push_back(Cell{state, m, eta});
            }
        }
    }
    return cells;
}

SingleRunOutput photorec::run_single(const ExperimentSpec &spec) {
    spec.validate(false);
    auto cell = single_cell(spec);
    SingleRunOutput output{run_cell(spec, cell, spec.seed), prepare_directory(spec), {}};
    const auto &run = output.run;
    if (run.rho_true.tail_mass() > kTailMassWarning) {
        std::ostringstream w;
        w << "truncation N=" << spec.truncation << " discards probability " << run.rho_true.tail_mass()
          << " of the true state";
        output.warnings.push_back(w.str());
    }

    auto rule = spec.stopping.resolve(spec.runs);
    json summary{
        {"name", spec.name},
        {"cell", cell_json(cell)},
        {"N", spec.truncation},
        {"K", spec.settings},
        {"n_runs", spec.runs},
        {"seed", spec.seed},
        {"exact", spec.exact},
        {"stopping", stopping_json(rule)},
        {"initializer", spec.initializer.label()},
        {"etas", std::vector<double>(run.grid.etas().begin(), run.grid.etas().end())},
        {"rho_true", std::vector<double>(run.rho_true.probs().begin(), run.rho_true.probs().end())},
        {"tail_mass", run.rho_true.tail_mass()},
        {"warnings", output.warnings},
        {"result", to_json(run.result)},
    };
    summary["result"].erase("trace");
    auto summary_out = open_output(output.directory / "summary.json");
    summary_out << std::setw(2) << summary << '\n';
    auto rho_out = open_output(output.directory / "rho_final.csv");
    write_distribution_csv(rho_out, run.result.rho_final, run.rho_true);
    auto trace_out = open_output(output.directory / "traces.csv");
    write_trace_csv(trace_out, run.result);
    if (run.counts) {
        auto counts_out = open_output(output.directory / "counts.csv");
        write_counts_csv(counts_out, run.grid, *run.counts);
    }
    return output;
}

SweepResult photorec::compute_sweep(const ExperimentSpec &spec) {
    auto cells = sweep_cells(spec);
    std::size_t replicas = spec.replicas;
    std::vector<ReplicaRecord> records(cells.size() * replicas);
    parallel_for(records.size(), spec.threads, [&](std::size_t task) {
        std::size_t c = task / replicas;
        std::size_t r = task % replicas;
        auto &rec = records[task];
        rec.replica = r;
        rec.seed = replica_seed(spec.seed, r);
        try {
            auto run = run_cell(spec, cells[c], rec.seed);
            rec.fidelity = run.result.final_fidelity;
            rec.epsilon = run.result.final_epsilon;
            rec.iterations = run.result.iterations_run;
            rec.stop_reason = to_string(run.result.stop_reason);
        } catch (const std::exception &e) {
            rec.error = e.what();
        }
    });

    SweepResult result;
    for (std::size_t c = 0; c < cells.size(); c++) {
        CellResult cell{cells[c], 0.0, 0.0, 0, {}, ""};
        double sum = 0.0;
        for (std::size_t r = 0; r < replicas; r++) {
            const auto &rec = records[c * replicas + r];
            cell.replicas.push_back(rec);
            if (rec.fidelity) {
                sum += *rec.fidelity;
                cell.succeeded++;
            } else if (cell.error.empty()) {
                cell.error = rec.error;
            }
        }
        if (cell.succeeded > 0) {
            cell.mean_fidelity = sum / static_cast<double>(cell.succeeded);
            double ss = 0.0;
            for (const auto &rec : cell.replicas) {
                if (rec.fidelity) {
                    ss += std::pow(*rec.fidelity - cell.mean_fidelity, 2);
                }
            }
            cell.std_fidelity = cell.succeeded > 1 ? std::sqrt(ss / static_cast<double>(cell.succeeded - 1)) : 0.0;
        }
        result.cells.push_back(std::move(cell));
    }
    return result;
}

SweepOutput photorec::run_sweep(const ExperimentSpec &spec) {
    spec.validate(true);
    SweepOutput output{compute_sweep(spec), prepare_directory(spec)};

    const std::string header = "state,family,mean,M,eta_max,mean_G,std_G,replicas,succeeded,error\n";
    auto row = [](const CellResult &c) {
        std::ostringstream line;
        line << std::setprecision(12) << '"' << c.cell.state.label() << "\"," << to_string(c.cell.state.family) << ','
             << nominal_mean(c.cell.state) << ',' << c.cell.max_count << ',' << c.cell.eta_max << ','
             << c.mean_fidelity << ',' << c.std_fidelity << ',' << c.replicas.size() << ',' << c.succeeded << ",\"";
        for (char ch : c.error) {
            line << (ch == '"' ? '\'' : ch);
        }
        line << "\"\n";
        return line.str();
    };

    auto all = open_output(output.directory / "sweep.csv");
    all << header;
    std::map<std::string, std::ofstream> panels;
    for (const auto &c : output.result.cells) {
        all << row(c);
        auto panel = "sweep_" + to_string(c.cell.state.family) + "_eta" + format_number(c.cell.eta_max) + ".csv";
        auto it = panels.find(panel);
        if (it == panels.end()) {
            it = panels.emplace(panel, open_output(output.directory / panel)).first;
            it->second << header;
        }
        it->second << row(c);
    }

    auto reps = open_output(output.directory / "replicas.csv");
    reps << "state,M,eta_max,replica,seed,G,epsilon,iterations,stop_reason,error\n" << std::setprecision(12);
    for (const auto &c : output.result.cells) {
        for (const auto &r : c.replicas) {
            reps << '"' << c.cell.state.label() << "\"," << c.cell.max_count << ',' << c.cell.eta_max << ','
                 << r.replica << ',' << r.seed << ',';
            if (r.fidelity) {
                reps << *r.fidelity;
            }
            reps << ',' << r.epsilon << ',' << r.iterations << ',' << r.stop_reason << ",\"" << r.error << "\"\n";
        }
    }

    json cells = json::array();
    for (const auto &c : output.result.cells) {
        auto j = cell_json(c.cell);
        j["mean_G"] = c.mean_fidelity;
        j["std_G"] = c.std_fidelity;
        j["succeeded"] = c.succeeded;
        j["replicas"] = c.replicas.size();
        if (!c.error.empty()) {
            j["error"] = c.error;
        }
        cells.push_back(j);
    }
    json summary{
        {"name", spec.name},
        {"N", spec.truncation},
        {"K", spec.settings},
        {"n_runs", spec.runs},
        {"replicas", spec.replicas},
        {"seed", spec.seed},
        {"exact", spec.exact},
        {"stopping", stopping_json(spec.stopping.resolve(spec.runs))},
        {"initializer", spec.initializer.label()},
        {"cells", cells},
    };
    auto summary_out = open_output(output.directory / "summary.json");
    summary_out << std::setw(2) << summary << '\n';
    return output;
}

BaselineReport photorec::compare_with_baseline(const ExperimentSpec &spec) {
    spec.validate(false);
    auto cell = single_cell(spec);
    auto rho_true = cell.state.build(spec.truncation);
    auto grid = EfficiencyGrid::uniform(spec.settings, cell.eta_max);
    ResponseTensor response(grid, DetectorConfig{cell.max_count, spec.truncation});
    auto q = response.binned_distributions(rho_true);
    auto f = spec.exact ? exact_frequencies(q) : to_frequencies(sample_counts(q, spec.runs, spec.seed));

    auto baseline = linear_inversion_baseline(f, response);
    auto em = reconstruct(f, response, spec.stopping.resolve(spec.runs), rho_true);

    BaselineReport report;
    report.truth.assign(rho_true.probs().begin(), rho_true.probs().end());
    report.em_estimate.assign(em.rho_final.probs().begin(), em.rho_final.probs().end());
    report.baseline_estimate = baseline.estimate;
    report.em_l1 = l1_distance(report.em_estimate, report.truth);
    report.baseline_l1 = l1_distance(report.baseline_estimate, report.truth);
    report.baseline_negativity_mass = baseline.negativity_mass();
    report.baseline_min_entry = *std::min_element(baseline.estimate.begin(), baseline.estimate.end());
    report.effective_rank = baseline.effective_rank;
    report.unknowns = baseline.unknowns;
    report.condition_number = baseline.condition_number;
    report.em_fidelity = em.final_fidelity;
    return report;
}

json photorec::to_json(const BaselineReport &r) {
    json j{
        {"em_l1", r.em_l1},
        {"baseline_l1", r.baseline_l1},
        {"baseline_negativity_mass", r.baseline_negativity_mass},
        {"baseline_min_entry", r.baseline_min_entry},
        {"effective_rank", r.effective_rank},
        {"unknowns", r.unknowns},
        {"rank_deficient", r.effective_rank < r.unknowns},
        {"condition_number", std::isfinite(r.condition_number) ? json(r.condition_number) : json("inf")},
    };
    j["em_fidelity"] = r.em_fidelity ? json(*r.em_fidelity) : json(nullptr);
    return j;
}

BaselineReport photorec::run_baseline_comparison(const ExperimentSpec &spec) {
    auto report = compare_with_baseline(spec);
    auto dir = prepare_directory(spec);
    auto j = to_json(report);
    j["name"] = spec.name;
    j["cell"] = cell_json(single_cell(spec));
    j["exact"] = spec.exact;
    auto out = open_output(dir / "baseline.json");
    out << std::setw(2) << j << '\n';
    auto csv = open_output(dir / "baseline.csv");
    csv << "n,truth,em,linear_inversion\n" << std::setprecision(12);
    for (std::size_t n = 0; n < report.truth.size(); n++) {
        csv << n << ',' << report.truth[n] << ',' << report.em_estimate[n] << ',' << report.baseline_estimate[n] << '\n';
    }
    return report;
}

ReconstructionResult photorec::reconstruct_from_counts(const ReconstructFromCountsOptions &options) {
    std::ifstream in(options.counts_csv);
    if (!in) {
        throw std::invalid_argument("cannot open counts file " + options.counts_csv.string());
    }
    auto table = read_counts_csv(in);
    int max_count = static_cast<int>(table.counts.outcomes()) - 1;
    DetectorConfig config{max_count, options.truncation};
    config.validate();
    // Unequal row totals (possible for real spectra) fall back to the largest.
    std::uint64_t runs = 0;
    for (std::size_t nu = 0; nu < table.counts.settings(); nu++) {
        runs = std::max(runs, table.counts.row_total(nu));
    }
    auto rule = options.stopping.resolve(runs);
    rule.validate();
    ResponseTensor response(table.grid, config);
    auto result = reconstruct(to_frequencies(table.counts), response, rule);

    std::filesystem::create_directories(options.directory);
    json summary{
        {"counts_csv", options.counts_csv.string()},
        {"N", options.truncation},
        {"M", max_count},
        {"K", table.counts.settings()},
        {"n_runs", runs},
        {"equal_runs", table.counts.has_equal_rows()},
        {"stopping", stopping_json(rule)},
        {"result", to_json(result)},
    };
    summary["result"].erase("trace");
    auto summary_out = open_output(options.directory / "summary.json");
    summary_out << std::setw(2) << summary << '\n';
    auto rho_out = open_output(options.directory / "rho_final.csv");
    write_distribution_csv(rho_out, result.rho_final);
    auto trace_out = open_output(options.directory / "traces.csv");
    write_trace_csv(trace_out, result);
    return result;
}
