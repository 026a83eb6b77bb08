#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bilap4/kexpr.hpp"
#include "bilap4/reduced_energy.hpp"

namespace bilap4::cli {

struct ToleranceConfig {
  double linear = 1e-8;
  double newton = 1e-9;
};

struct RunConfig {
  DomainSpec domain = DomainSpec::box({0, 0, 0, 0}, {1, 1, 1, 1});
  std::vector<int> grid_n = {17};   // nodes across axis 0; one or per stage
  std::string k_source = "1";
  int m = 1;
  double delta0 = 0.1;
  std::vector<double> eps_schedule;
  ToleranceConfig tol;
  bool hybrid_quadrature = true;
  uint64_t seed = 20240809;
  int threads = 0;
  Point4 r_center{};            // center for the 'r' variable in k
  bool r_center_set = false;
  std::string out_dir = "out";

  std::string canonical;        // canonical JSON dump used for hashing
  uint64_t hash = 0;

  KExpr k_expr() const { return KExpr::parse(k_source); }
  Point4 k_center() const {
    return r_center_set ? r_center : domain.barycenter();
  }
  WeightFn weight() const;
  int grid_for_stage(size_t stage) const {
    if (grid_n.empty()) return 17;
    return grid_n[stage < grid_n.size() ? stage : grid_n.size() - 1];
  }
};

/// Parses and validates the JSON config; throws InvalidDomainSpec /
/// SyntaxError on schema violations.
RunConfig load_config(const std::string& path);

uint64_t fnv1a(const std::string& bytes);

}  // namespace bilap4::cli
