#pragma once

#include <functional>
#include <map>
#include <memory>
#include <shared_mutex>
#include <span>
#include <vector>

#include "bilap4/biharmonic.hpp"

namespace bilap4 {

using WeightFn = std::function<double(const Point4&)>;

/// An m-tuple of concentration points with their derived bubble scales.
/// Admissibility: dist(xi_j, boundary) >= 2*delta0 and pairwise separation
/// >= 2*delta0.
struct ConfigPoint {
  std::vector<Point4> xi;
  std::vector<double> mu;
  double delta0 = 0.1;
  int m() const { return int(xi.size()); }
};

bool check_admissible(const ConfigPoint& cfg, const DomainSpec& spec);

/// Cache of regular-part evaluations keyed by grid coordinates rounded to
/// h/16. Concurrent reads with single-writer insert.
class GreensCache {
 public:
  GreensCache(const DomainMask& mask, LinearSolveParams params = {})
      : mask_(&mask), params_(params) {}

  const GreensEvaluation& get(const Point4& xi);
  size_t size() const;
  const DomainMask& mask() const { return *mask_; }
  const LinearSolveParams& params() const { return params_; }

 private:
  const DomainMask* mask_;
  LinearSolveParams params_;
  mutable std::shared_mutex mutex_;
  std::map<std::array<int64_t, 4>, std::shared_ptr<const GreensEvaluation>> map_;
};

/// Reduced energy
///   phi_m(xi) = -sum_j {2 log k(xi_j) + H(xi_j, xi_j)} - sum_{i != j} G(xi_i, xi_j),
/// with the double sum over ordered pairs. Pair values are evaluated once per
/// unordered pair and reused, so exchanging two points leaves the value
/// bit-identical.
double phi_m(const ConfigPoint& cfg, GreensCache& greens, const WeightFn& k);

/// Scale rule: log mu_j^4 = log k(xi_j) + H(xi_j,xi_j) + sum_{i!=j} G(xi_i,xi_j).
std::vector<double> mu_from_xi(const ConfigPoint& cfg, GreensCache& greens,
                               const WeightFn& k);

enum class GradMethod { SymmetryField, CentralFD };

/// Gradient of phi_m, 4m entries ordered (xi_1_x1..x4, xi_2_x1.., ...).
/// SymmetryField uses d/dxi H(xi,xi) = 2 grad_x H(x,xi)|_{x=xi} and the
/// source-field gradients of G; CentralFD differences phi_m with step h_fd.
/// The k terms are always differenced (no symbolic k derivatives).
std::vector<double> grad_phi_m(const ConfigPoint& cfg, GreensCache& greens,
                               const WeightFn& k, GradMethod method,
                               double h_fd = 0.0);

enum class SearchMode { Minimize, Maximize };
enum class Termination { Converged, HitBoundaryOfO, MaxIter };

struct CriticalSearchReport {
  ConfigPoint final_cfg;
  double grad_norm = 0.0;
  double phi_value = 0.0;
  int iterations = 0;
  Termination reason = Termination::MaxIter;
  std::vector<double> phi_trace;
};

/// Projected gradient descent/ascent confined to the admissible set:
/// backtracking line search (Armijo constant 1e-4), projection by clipping to
/// the delta0-margin box and pairwise-separation repair along the connecting
/// segment.
CriticalSearchReport find_critical(const ConfigPoint& start, SearchMode mode,
                                   double tol, int max_iter,
                                   GreensCache& greens, const WeightFn& k);

struct ScalingResult {
  double value = 0.0;
  double lambda_derivative = 0.0;  // d/dlambda f(lambda x)|_{lambda=1}
};

/// Psi_k = -8 sum_{i != j} log|x_i - x_j|; the dilation derivative equals
/// -8 k (k-1) identically.
ScalingResult psi_k_scaling(std::span<const Point4> points);

/// Half-space configuration energy (k == 1, reflections across {x4 = 0}):
///   phi = -8 sum_j log|x_j - xbar_j| + 8 sum_{i != j} log(|x_i-x_j|/|x_i-xbar_j|).
/// Only the self terms scale, so the dilation derivative equals -8k.
ScalingResult phi_halfspace_scaling(std::span<const Point4> points);

}  // namespace bilap4
