#include "bilap4/biharmonic.hpp"

#include <cmath>

#include "bilap4/ansatz.hpp"

namespace bilap4 {

NavierSolution solve_navier(const ScalarField4& f, const ScalarField4& g0,
                            const ScalarField4& g1, const DomainMask& mask,
                            const LinearSolveParams& params) {
  NavierSolution out;
  try {
    out.lap = solve_dirichlet(f, g1, mask, params, &out.stage1);
  } catch (const NoConvergence& e) {
    throw NoConvergence(e.iterations, e.residual, "navier stage 1");
  }
  try {
    out.u = solve_dirichlet(out.lap, g0, mask, params, &out.stage2);
  } catch (const NoConvergence& e) {
    throw NoConvergence(e.iterations, e.residual, "navier stage 2");
  }
  return out;
}

GreensEvaluation regular_part(const Point4& xi, const DomainMask& mask,
                              const LinearSolveParams& params) {
  double d = mask.spec.distance_to_boundary(xi);
  if (d < 2.0 * mask.grid.h)
    throw SourceTooCloseToBoundary(
        "source must be at least 2h from the boundary (dist " +
        std::to_string(d) + ", h " + std::to_string(mask.grid.h) + ")");

  ScalarField4 zero(mask.grid), g0(mask.grid), g1(mask.grid);
  for (int32_t ii : mask.boundary) {
    Point4 x = mask.grid.coord(size_t(ii));
    double r2 = dist2(x, xi);
    g0.v[size_t(ii)] = 4.0 * std::log(r2);  // 8 log|x - xi|
    g1.v[size_t(ii)] = 16.0 / r2;
  }
  NavierSolution sol = solve_navier(zero, g0, g1, mask, params);

  GreensEvaluation ge;
  ge.source = xi;
  ge.h_field = std::move(sol.u);
  ge.spec = mask.spec;
  ge.h_diag = interpolate_quartic(ge.h_field, xi);
  return ge;
}

double greens_value(const GreensEvaluation& ge, const Point4& x) {
  double r = dist(x, ge.source);
  const double h = ge.h_field.grid.h;
  if (r < h / 4.0)
    throw CoincidentPoints("evaluation point within h/4 of the source");
  // The quartic stencil needs clearance from the boundary; fall back to the
  // quadrilinear interpolant close to it.
  double hval = ge.spec.distance_to_boundary(x) >= 3.0 * h
                    ? interpolate_quartic(ge.h_field, x)
                    : interpolate(ge.h_field, x);
  return -8.0 * std::log(r) + hval;
}

Point4 greens_gradient(const GreensEvaluation& ge, const Point4& x) {
  double r2 = dist2(x, ge.source);
  if (r2 < ge.h_field.grid.h * ge.h_field.grid.h / 16.0)
    throw CoincidentPoints("evaluation point within h/4 of the source");
  const double h = ge.h_field.grid.h;
  Point4 g = ge.spec.distance_to_boundary(x) >= 3.0 * h
                 ? interpolate_quartic_gradient(ge.h_field, x)
                 : interpolate_gradient(ge.h_field, x);
  for (int d = 0; d < 4; ++d) g[d] += -8.0 * (x[d] - ge.source[d]) / r2;
  return g;
}

NavierSolution boundary_correction(const Point4& xi_j, double mu_j, double eps,
                                   double k_at_xij, const DomainMask& mask,
                                   const LinearSolveParams& params) {
  if (!(mu_j > 0.0)) throw InvalidDomainSpec("mu_j must be positive");
  if (!(eps > 0.0 && eps < 1.0)) throw EpsOutOfRange("eps must be in (0,1)");
  if (!(k_at_xij > 0.0)) throw NonpositiveWeight("k(xi_j) must be positive");

  ScalarField4 zero(mask.grid), g0(mask.grid), g1(mask.grid);
  for (int32_t ii : mask.boundary) {
    Point4 x = mask.grid.coord(size_t(ii));
    double r2 = dist2(x, xi_j);
    g0.v[size_t(ii)] = -bubble(x, xi_j, mu_j, eps, k_at_xij);
    g1.v[size_t(ii)] = -bubble_laplacian(r2, mu_j, eps);
  }
  return solve_navier(zero, g0, g1, mask, params);
}

}  // namespace bilap4
