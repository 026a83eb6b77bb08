#pragma once

#include <string>
#include <vector>

#include "config.hpp"

namespace bilap4::cli {

/// Per-source regular parts, pairwise G matrix, axis-slice CSVs of H.
int cmd_green(const RunConfig& cfg, const std::vector<Point4>& xs);

/// phi_m sampled on a lattice of admissible configurations (m = 1: lattice
/// points; m >= 2: point plus barycenter reflections); colliding entries are
/// emitted as -inf per the phi_m convention.
int cmd_phi(const RunConfig& cfg, int lattice_per_axis);

/// Critical-point searches from explicit or seeded random starts.
int cmd_find_critical(const RunConfig& cfg, int random_starts,
                      const std::vector<std::vector<Point4>>& starts);

/// Ansatz diagnostics at the first eps of the schedule; "auto" locates the
/// configuration by find_critical first.
int cmd_ansatz(const RunConfig& cfg, bool auto_critical,
               const std::vector<Point4>& xi);

/// Continuation along the eps schedule with trend tables.
int cmd_solve(const RunConfig& cfg);

/// Acceptance suite; exit 0 (all pass) or 1 (some criterion failed).
int cmd_verify(const RunConfig& cfg, const std::vector<int>& only);

}  // namespace bilap4::cli
