#pragma once

#include "bilap4/grid.hpp"

namespace bilap4 {

struct LinearSolveParams {
  double tol = 1e-8;  // relative residual, in (0, 1e-2]
  int max_iter = 0;   // 0 = 20 * sqrt(interior node count)
};

struct CgStats {
  int iterations = 0;
  double rel_residual = 0.0;
};

/// Solves the discrete Dirichlet problem
///     laplacian(u) = rhs   on Interior nodes,
///     u = bdata            on Boundary nodes,
/// by conjugate gradients with Jacobi preconditioning and zero initial guess.
/// Boundary data is folded into the right-hand side so the iterated operator
/// stays symmetric. Returned field equals bdata exactly on Boundary nodes and
/// zero on Exterior nodes.
ScalarField4 solve_dirichlet(const ScalarField4& rhs, const ScalarField4& bdata,
                             const DomainMask& mask,
                             const LinearSolveParams& params = {},
                             CgStats* stats = nullptr);

}  // namespace bilap4
