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

#include "photorec/counts_io.h"

#include <charconv>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

using namespace photorec;

namespace {

std::string trim(const std::string &s) {
    auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) {
        return "";
    }
    auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::optional<long long> parse_integer(const std::string &field) {
    auto text = trim(field);
    long long value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        return std::nullopt;
    }
    return value;
}

std::optional<double> parse_real(const std::string &field) {
    auto text = trim(field);
    double value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        return std::nullopt;
    }
    return value;
}

struct Entry {
    double eta;
    std::map<long, std::uint64_t> by_outcome;
};

}  // namespace

void photorec::write_counts_csv(std::ostream &out, const EfficiencyGrid &grid, const OutcomeCounts &counts) {
    if (grid.size() != counts.settings()) {
        throw std::invalid_argument("grid and counts disagree on the number of efficiency settings");
    }
    out << "nu,eta,m,count\n";
    for (std::size_t nu = 0; nu < counts.settings(); nu++) {
        std::ostringstream eta;
        eta << std::setprecision(17) << grid[nu];
        for (std::size_t m = 0; m < counts.outcomes(); m++) {
            out << (nu + 1) << ',' << eta.str() << ',' << m << ',' << counts(nu, m) << '\n';
        }
    }
}

CountsTable photorec::read_counts_csv(std::istream &in) {
    std::string line;
    std::size_t line_no = 0;
    bool seen_header = false;
    std::map<long, Entry> rows;
    auto fail = [&](const std::string &what) {
        throw std::invalid_argument("counts CSV line " + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, line)) {
        line_no++;
        line = trim(line);
        if (line.empty() || line[0] == '#') {
            continue;
        }
        if (!seen_header) {
            seen_header = true;
            if (line != "nu,eta,m,count") {
                fail("expected header 'nu,eta,m,count'");
            }
            continue;
        }
        std::istringstream fields(line);
        std::string nu_s, eta_s, m_s, count_s, extra;
        if (!std::getline(fields, nu_s, ',') || !std::getline(fields, eta_s, ',') || !std::getline(fields, m_s, ',') ||
            !std::getline(fields, count_s, ',') || std::getline(fields, extra, ',')) {
            fail("expected four comma-separated fields");
        }
        auto nu = parse_integer(nu_s);
        auto m = parse_integer(m_s);
        auto count = parse_integer(count_s);
        auto eta = parse_real(eta_s);
        if (!nu || !m || !count || !eta) {
            fail("unparseable number");
        }
        if (*nu < 1) {
            fail("nu must be >= 1");
        }
        if (*m < 0 || *count < 0) {
            fail("m and count must be >= 0");
        }
        auto [it, inserted] = rows.try_emplace(*nu, Entry{*eta, {}});
        if (!inserted && it->second.eta != *eta) {
            fail("eta for nu=" + std::to_string(*nu) + " differs from an earlier line");
        }
        if (!it->second.by_outcome.emplace(*m, static_cast<std::uint64_t>(*count)).second) {
            fail("duplicate entry for nu=" + std::to_string(*nu) + ", m=" + std::to_string(*m));
        }
    }
    if (rows.empty()) {
        throw std::invalid_argument("counts CSV has no data rows");
    }
    std::size_t settings = rows.size();
    std::size_t outcomes = rows.begin()->second.by_outcome.size();
    std::vector<double> etas;
    std::vector<std::uint64_t> counts;
    long expected_nu = 1;
    for (const auto &[nu, entry] : rows) {
        if (nu != expected_nu++) {
            throw std::invalid_argument("counts CSV: settings must be numbered 1..K without gaps");
        }
        if (entry.by_outcome.size() != outcomes) {
            throw std::invalid_argument("counts CSV: setting " + std::to_string(nu) + " has a different number of outcomes");
        }
        long expected_m = 0;
        for (const auto &[m, c] : entry.by_outcome) {
            if (m != expected_m++) {
                throw std::invalid_argument("counts CSV: outcomes of setting " + std::to_string(nu) + " must be 0..M");
            }
            counts.push_back(c);
        }
        etas.push_back(entry.eta);
    }
    return CountsTable{EfficiencyGrid(std::move(etas)), OutcomeCounts(settings, outcomes, std::move(counts))};
}
