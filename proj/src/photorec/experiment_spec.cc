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

#include "photorec/experiment_spec.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include "photorec/rng.h"

using namespace photorec;
using nlohmann::json;

std::string photorec::to_string(StateFamily family) {
    switch (family) {
        case StateFamily::coherent:
            return "coherent";
        case StateFamily::thermal:
            return "thermal";
        case StateFamily::fock:
            return "fock";
        case StateFamily::fock_superposition:
            return "fock_superposition";
        case StateFamily::custom:
            return "custom";
    }
    return "unknown";
}

StateFamily photorec::parse_state_family(const std::string &name) {
    for (auto family : {StateFamily::coherent, StateFamily::thermal, StateFamily::fock, StateFamily::fock_superposition,
                        StateFamily::custom}) {
        if (to_string(family) == name) {
            return family;
        }
    }
    throw SpecError(
        "unknown state family '" + name + "' (expected coherent, thermal, fock, fock_superposition or custom)");
}

namespace {

int integral_mean(double value, const char *family) {
    if (value != std::round(value)) {
        throw SpecError(std::string(family) + " states need an integer mean, got " + std::to_string(value));
    }
    return static_cast<int>(value);
}

}  // namespace

StateSpec StateSpec::with_mean(double value) const {
    StateSpec out = *this;
    switch (family) {
        case StateFamily::coherent:
        case StateFamily::thermal:
            out.mean = value;
            break;
        case StateFamily::fock:
            out.n = integral_mean(value, "fock");
            break;
        case StateFamily::fock_superposition: {
            int center = integral_mean(value, "fock_superposition");
            out.n_lo = center - 1;
            out.n_hi = center + 1;
            break;
        }
        case StateFamily::custom:
            throw SpecError("custom states cannot be swept over a mean");
    }
    return out;
}

void StateSpec::validate(int truncation) const {
    auto where = "state '" + to_string(family) + "': ";
    switch (family) {
        case StateFamily::coherent:
        case StateFamily::thermal:
            if (!mean) {
                throw SpecError(where + "missing 'mean'");
            }
            if (!(*mean >= 0.0) || !std::isfinite(*mean)) {
                throw SpecError(where + "'mean' must be >= 0");
            }
            break;
        case StateFamily::fock:
            if (!n) {
                throw SpecError(where + "missing 'n'");
            }
            if (*n < 0 || *n > truncation) {
                throw SpecError(where + "'n' must lie in 0..N=" + std::to_string(truncation));
            }
            break;
        case StateFamily::fock_superposition:
            if (!n_lo || !n_hi) {
                throw SpecError(where + "missing 'n_lo'/'n_hi'");
            }
            if (*n_lo < 0 || *n_hi > truncation || *n_lo >= *n_hi) {
                throw SpecError(where + "needs 0 <= n_lo < n_hi <= N=" + std::to_string(truncation));
            }
            break;
        case StateFamily::custom:
            if (probs.size() != static_cast<std::size_t>(truncation) + 1) {
                throw SpecError(
                    where + "'probs' must have N+1=" + std::to_string(truncation + 1) + " entries, got " +
                    std::to_string(probs.size()));
            }
            try {
                PhotonDistribution::from_probabilities(probs);
            } catch (const std::invalid_argument &e) {
                throw SpecError(where + e.what());
            }
            break;
    }
}

PhotonDistribution StateSpec::build(int truncation) const {
    validate(truncation);
    switch (family) {
        case StateFamily::coherent:
            return coherent_distribution(*mean, truncation);
        case StateFamily::thermal:
            return thermal_distribution(*mean, truncation);
        case StateFamily::fock:
            return fock_distribution(*n, truncation);
        case StateFamily::fock_superposition:
            return fock_superposition_distribution(*n_lo, *n_hi, truncation);
        case StateFamily::custom:
            return PhotonDistribution::from_probabilities(probs);
    }
    throw SpecError("unknown state family");
}

std::string StateSpec::label() const {
    std::ostringstream out;
    out << to_string(family);
    switch (family) {
        case StateFamily::coherent:
        case StateFamily::thermal:
            if (mean) {
                out << "(mean=" << *mean << ")";
            }
            break;
        case StateFamily::fock:
            if (n) {
                out << "(n=" << *n << ")";
            }
            break;
        case StateFamily::fock_superposition:
            if (n_lo && n_hi) {
                out << "(" << *n_lo << "+" << *n_hi << ")";
            }
            break;
        case StateFamily::custom:
            break;
    }
    return out.str();
}

void InitializerSpec::validate(int truncation) const {
    if (kind != Kind::state) {
        return;
    }
    state.validate(truncation);
    auto rho = state.build(truncation);
    for (double p : rho.probs()) {
        if (!(p > 0.0)) {
            throw SpecError("'initializer' " + state.label() + " is not strictly positive on 0..N");
        }
    }
}

std::optional<PhotonDistribution> InitializerSpec::build(int truncation, std::uint64_t seed) const {
    switch (kind) {
        case Kind::uniform:
            return std::nullopt;
        case Kind::state:
            return state.build(truncation);
        case Kind::random: {
            Rng rng(derive_subseed(seed, 0x696E6974));
            std::vector<double> weights(truncation + 1);
            for (auto &w : weights) {
                w = 0.01 + rng.uniform();
            }
            return PhotonDistribution::from_probabilities(std::move(weights));
        }
    }
    return std::nullopt;
}

std::string InitializerSpec::label() const {
    switch (kind) {
        case Kind::uniform:
            return "uniform";
        case Kind::random:
            return "random";
        case Kind::state:
            return state.label();
    }
    return "unknown";
}

StoppingRule StoppingOverrides::resolve(std::uint64_t runs_per_eta) const {
    auto rule = StoppingRule::for_runs(runs_per_eta);
    if (max_iterations) rule.max_iterations = *max_iterations;
    if (convergence_window) rule.convergence_window = *convergence_window;
    if (epsilon_rate_threshold) rule.epsilon_rate_threshold = *epsilon_rate_threshold;
    if (extension_limit) rule.extension_limit = *extension_limit;
    if (stop_on_convergence) rule.stop_on_convergence = *stop_on_convergence;
    if (trace_stride) rule.trace_stride = *trace_stride;
    return rule;
}

void ExperimentSpec::validate(bool for_sweep) const {
    if (name.empty() || name.find('/') != std::string::npos || name == "." || name == "..") {
        throw SpecError("'name' must be a non-empty file name without '/'");
    }
    if (truncation < 1) {
        throw SpecError("'N' must be >= 1");
    }
    if (settings < 1) {
        throw SpecError("'K' must be >= 1");
    }
    if (eta_max.empty()) {
        throw SpecError("'eta_max' must list at least one value");
    }
    for (double e : eta_max) {
        if (!(e > 0.0 && e <= 1.0)) {
            throw SpecError("'eta_max' values must lie in (0, 1], got " + std::to_string(e));
        }
    }
    if (max_counts.empty()) {
        throw SpecError("'M' must list at least one value");
    }
    for (int m : max_counts) {
        if (m < 1) {
            throw SpecError("'M' values must be >= 1, got " + std::to_string(m));
        }
        if (m > truncation) {
            throw SpecError("'M'=" + std::to_string(m) + " exceeds the truncation N=" + std::to_string(truncation));
        }
    }
    if (runs < 1) {
        throw SpecError("'n_runs' must be >= 1");
    }
    if (replicas < 1) {
        throw SpecError("'replicas' must be >= 1");
    }
    if (threads < 1) {
        throw SpecError("'threads' must be >= 1");
    }
    if (states.empty()) {
        throw SpecError("no state given: set 'state' or 'states'");
    }
    initializer.validate(truncation);
    try {
        stopping.resolve(runs).validate();
    } catch (const std::invalid_argument &e) {
        throw SpecError(std::string("'stopping': ") + e.what());
    }
    for (const auto &s : expanded_states()) {
        s.validate(truncation);
    }
    if (for_sweep) {
        if (replicas < 2) {
            throw SpecError("a sweep needs 'replicas' >= 2 to estimate standard deviations");
        }
        for (const auto &s : states) {
            if (s.family == StateFamily::fock_superposition && !stopping.max_iterations) {
                throw SpecError("sweeps over fock_superposition states need an explicit 'stopping.max_iterations'");
            }
        }
    } else {
        if (expanded_states().size() != 1 || max_counts.size() != 1 || eta_max.size() != 1) {
            throw SpecError("a single run needs exactly one state, one 'M' and one 'eta_max'");
        }
    }
}

std::vector<StateSpec> ExperimentSpec::expanded_states() const {
    if (means.empty()) {
        return states;
    }
    std::vector<StateSpec> out;
    for (const auto &s : states) {
        for (double m : means) {
            out.push_back(s.with_mean(m));
        }
    }
    return out;
}

namespace {

template <typename T>
T get_as(const json &value, const std::string &key) {
    if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!value.is_number_integer() || (std::is_unsigned_v<T> && !value.is_number_unsigned())) {
            throw SpecError("'" + key + "' must be " + (std::is_unsigned_v<T> ? "a nonnegative integer" : "an integer"));
        }
    }
    try {
        return value.get<T>();
    } catch (const json::exception &) {
        throw SpecError("'" + key + "' has the wrong type");
    }
}

template <typename T>
std::vector<T> scalar_or_list(const json &value, const char *key) {
    std::vector<T> out;
    if (value.is_array()) {
        for (const auto &v : value) {
            out.push_back(get_as<T>(v, key));
        }
    } else {
        out.push_back(get_as<T>(value, key));
    }
    return out;
}

void reject_unknown(const json &obj, std::initializer_list<const char *> known, const std::string &where) {
    std::set<std::string> allowed(known.begin(), known.end());
    for (const auto &[key, value] : obj.items()) {
        if (!allowed.contains(key)) {
            throw SpecError("unknown key '" + key + "' in " + where);
        }
    }
}

StateSpec parse_state(const json &obj) {
    if (obj.is_string()) {
        return StateSpec{parse_state_family(obj.get<std::string>()), {}, {}, {}, {}, {}};
    }
    if (!obj.is_object()) {
        throw SpecError("a state must be an object or a family name");
    }
    reject_unknown(obj, {"family", "mean", "n", "n_lo", "n_hi", "probs"}, "state");
    if (!obj.contains("family")) {
        throw SpecError("state is missing 'family'");
    }
    StateSpec s;
    s.family = parse_state_family(get_as<std::string>(obj["family"], "family"));
    if (obj.contains("mean")) s.mean = get_as<double>(obj["mean"], "mean");
    if (obj.contains("n")) s.n = get_as<int>(obj["n"], "n");
    if (obj.contains("n_lo")) s.n_lo = get_as<int>(obj["n_lo"], "n_lo");
    if (obj.contains("n_hi")) s.n_hi = get_as<int>(obj["n_hi"], "n_hi");
    if (obj.contains("probs")) s.probs = get_as<std::vector<double>>(obj["probs"], "probs");
    return s;
}

}  // namespace

ExperimentSpec photorec::parse_experiment_spec(const json &doc) {
    if (!doc.is_object()) {
        throw SpecError("experiment config must be a JSON object");
    }
    reject_unknown(
        doc,
        {"name", "state", "states", "means", "N", "K", "eta_max", "M", "n_runs", "replicas", "seed", "exact",
         "stopping", "initializer", "output_dir", "threads"},
        "experiment config");
    ExperimentSpec spec;
    if (doc.contains("name")) spec.name = get_as<std::string>(doc["name"], "name");
    if (doc.contains("state") && doc.contains("states")) {
        throw SpecError("give either 'state' or 'states', not both");
    }
    if (doc.contains("state")) {
        spec.states.push_back(parse_state(doc["state"]));
    }
    if (doc.contains("states")) {
        if (!doc["states"].is_array()) {
            throw SpecError("'states' must be a list");
        }
        for (const auto &s : doc["states"]) {
            spec.states.push_back(parse_state(s));
        }
    }
    if (doc.contains("means")) spec.means = scalar_or_list<double>(doc["means"], "means");
    if (doc.contains("N")) spec.truncation = get_as<int>(doc["N"], "N");
    if (doc.contains("K")) spec.settings = get_as<int>(doc["K"], "K");
    if (doc.contains("eta_max")) spec.eta_max = scalar_or_list<double>(doc["eta_max"], "eta_max");
    if (doc.contains("M")) spec.max_counts = scalar_or_list<int>(doc["M"], "M");
    if (doc.contains("n_runs")) spec.runs = get_as<std::uint64_t>(doc["n_runs"], "n_runs");
    if (doc.contains("replicas")) spec.replicas = get_as<std::uint64_t>(doc["replicas"], "replicas");
    if (doc.contains("seed")) spec.seed = get_as<std::uint64_t>(doc["seed"], "seed");
    if (doc.contains("exact")) spec.exact = get_as<bool>(doc["exact"], "exact");
    if (doc.contains("output_dir")) spec.output_dir = get_as<std::string>(doc["output_dir"], "output_dir");
    if (doc.contains("threads")) spec.threads = get_as<unsigned>(doc["threads"], "threads");
    if (doc.contains("initializer")) {
        const auto &init = doc["initializer"];
        if (init.is_string() && init.get<std::string>() == "uniform") {
            spec.initializer.kind = InitializerSpec::Kind::uniform;
        } else if (init.is_string() && init.get<std::string>() == "random") {
            spec.initializer.kind = InitializerSpec::Kind::random;
        } else if (init.is_object()) {
            spec.initializer.kind = InitializerSpec::Kind::state;
            spec.initializer.state = parse_state(init);
        } else {
            throw SpecError("'initializer' must be \"uniform\", \"random\" or a state object");
        }
    }
    if (doc.contains("stopping")) {
        const auto &s = doc["stopping"];
        if (!s.is_object()) {
            throw SpecError("'stopping' must be an object");
        }
        reject_unknown(
            s,
            {"max_iterations", "convergence_window", "epsilon_rate_threshold", "extension_limit",
             "stop_on_convergence", "trace_stride"},
            "'stopping'");
        auto &o = spec.stopping;
        if (s.contains("max_iterations")) o.max_iterations = get_as<std::uint64_t>(s["max_iterations"], "max_iterations");
        if (s.contains("convergence_window")) o.convergence_window = get_as<std::uint64_t>(s["convergence_window"], "convergence_window");
        if (s.contains("epsilon_rate_threshold")) o.epsilon_rate_threshold = get_as<double>(s["epsilon_rate_threshold"], "epsilon_rate_threshold");
        if (s.contains("extension_limit")) o.extension_limit = get_as<std::uint64_t>(s["extension_limit"], "extension_limit");
        if (s.contains("stop_on_convergence")) o.stop_on_convergence = get_as<bool>(s["stop_on_convergence"], "stop_on_convergence");
        if (s.contains("trace_stride")) o.trace_stride = get_as<std::uint64_t>(s["trace_stride"], "trace_stride");
    }
    return spec;
}

ExperimentSpec photorec::load_experiment_spec(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw SpecError("cannot open config file " + path.string());
    }
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error &e) {
        throw SpecError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_experiment_spec(doc);
}
