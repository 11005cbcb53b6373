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

#ifndef _PHOTOREC_COUNTS_IO_H
#define _PHOTOREC_COUNTS_IO_H

#include <iosfwd>

#include "photorec/detector.h"
#include "photorec/outcome_table.h"

namespace photorec {

/// Counts together with the efficiencies they were recorded at.
struct CountsTable {
    EfficiencyGrid grid;
    OutcomeCounts counts;
};

/// Writes the interchange CSV shared by the sampler and the ingester:
///
///     nu,eta,m,count
///     1,0.00666666666666667,0,9934
///
/// nu is 1-based, one line per (nu, m), eta printed with 17 significant
/// digits so that it round-trips exactly.
void write_counts_csv(std::ostream &out, const EfficiencyGrid &grid, const OutcomeCounts &counts);

/// Parses the interchange CSV. Rows may appear in any order but every
/// (nu, m) with nu = 1..K and m = 0..M must be present exactly once, and eta
/// must be consistent within each nu. Throws std::invalid_argument with the
/// offending line number otherwise.
CountsTable read_counts_csv(std::istream &in);

}  // namespace photorec

#endif
