#pragma once

#include "bilap4/poisson.hpp"

namespace bilap4 {

/// Result of a Navier bilaplacian solve. `lap` is the intermediate cascade
/// field w = laplacian(u), defined on Interior and Boundary nodes.
struct NavierSolution {
  ScalarField4 u;
  ScalarField4 lap;
  CgStats stage1, stage2;
};

/// Solves the discrete Navier problem
///     laplacian(laplacian u) = f  in the domain,
///     u = g0, laplacian(u) = g1   on the boundary,
/// as the two-Poisson cascade: laplacian(w) = f with w = g1, then
/// laplacian(u) = w with u = g0.
NavierSolution solve_navier(const ScalarField4& f, const ScalarField4& g0,
                            const ScalarField4& g1, const DomainMask& mask,
                            const LinearSolveParams& params = {});

/// Regular part H(., xi) of the Green's function for Delta^2 with Navier
/// conditions, normalized so G(x, xi) = -8 log|x - xi| + H(x, xi) and
/// Delta^2 G = 64 pi^2 delta_xi.
struct GreensEvaluation {
  Point4 source{};
  double h_diag = 0.0;       // H(xi, xi), interpolated
  ScalarField4 h_field;      // H(., xi) on the grid
  DomainSpec spec;           // for boundary-distance checks at evaluation
};

/// Computes H(., xi) by a Navier solve with boundary data 8 log|x - xi| and
/// 16/|x - xi|^2. Requires dist(xi, boundary) >= 2h.
GreensEvaluation regular_part(const Point4& xi, const DomainMask& mask,
                              const LinearSolveParams& params = {});

/// G(x, xi): the -8 log term is evaluated analytically, H by interpolation.
double greens_value(const GreensEvaluation& ge, const Point4& x);

/// grad_x G(x, xi); log term analytic, H gradient from the interpolant.
Point4 greens_gradient(const GreensEvaluation& ge, const Point4& x);

/// Laplacian of the bubble profile: with a = mu^2 eps^2 and r2 = |x - xi|^2,
/// Delta u_j = -(16 r2 + 32 a) / (a + r2)^2.
inline double bubble_laplacian(double r2, double mu, double eps) {
  double a = mu * mu * eps * eps;
  double d = a + r2;
  return -(16.0 * r2 + 32.0 * a) / (d * d);
}

/// Biharmonic boundary correction H_j for one bubble: solves
/// Delta^2 H_j = 0, H_j = -u_j and Delta H_j = -Delta u_j on the boundary,
/// with Delta u_j supplied analytically.
NavierSolution boundary_correction(const Point4& xi_j, double mu_j, double eps,
                                   double k_at_xij, const DomainMask& mask,
                                   const LinearSolveParams& params = {});

}  // namespace bilap4
