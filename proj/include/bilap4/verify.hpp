#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

namespace bilap4 {

struct VerifyOptions {
  uint64_t seed = 20240809;
  std::set<int> only;    // empty = run all criteria
  std::string out_dir;   // empty = no per-criterion files
  int threads = 0;       // 0 = library default
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;    // measured values
};

/// Runs the acceptance criteria (all, or the `only` subset), printing one
/// PASS/FAIL line per criterion to `log`.
std::vector<CriterionResult> run_verify(const VerifyOptions& opts,
                                        std::ostream& log);

/// Deterministic machine-readable summary (no timing data, byte-stable for
/// identical config + seed).
std::string format_summary(const std::vector<CriterionResult>& results,
                           uint64_t seed);

}  // namespace bilap4
