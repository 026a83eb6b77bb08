#pragma once

#include "bilap4/ansatz.hpp"

namespace bilap4 {

struct NewtonParams {
  double tol = 1e-9;        // on max|Delta_h^2 u - rho^4 k e^u| / (1 + rho^4 max k e^u)
  int max_iter = 40;
  int max_halvings = 10;
  double max_step = 2.0;    // sup-norm cap on the Newton update (0 = off);
                            // guards against near-kernel blowup of the
                            // linearization far from the solution
  double jac_tol = 1e-8;    // relative l2 residual of each Jacobian solve
  int jac_max_iter = 400;
};

struct SolveReport {
  bool converged = false;
  int iterations = 0;
  std::vector<double> residual_norms;  // max-norm per Newton iterate
  double mass = 0.0;                   // rho^4 int k e^u, grid quadrature
  double mass_hybrid = 0.0;            // defect-corrected when bubble data known
  double energy = 0.0;
  double correction_sup = 0.0;         // max |u - U| when started from an ansatz
  bool branch_jump = false;            // correction_sup > max|U|/10
  double eps = 0.0, rho = 0.0;
  ConfigPoint cfg;
};

struct NewtonResult {
  SolveReport report;
  ScalarField4 u;
};

/// Newton iteration for the coupled Navier system
///   Delta u = v, Delta v = rho^4 k e^u, u = v = 0 on the boundary,
/// damped by residual-monitored step halving. Jacobian solves use BiCGStab on
/// Delta_h^2 - W preconditioned by the exact DST inverse of Delta_h^2 on the
/// outer box.
NewtonResult newton_solve(const ScalarField4& initial, const EpsRho& er,
                          const WeightFn& k, const DomainMask& mask,
                          const NewtonParams& params = {});

/// rho^4 int k e^u over the domain, plain grid quadrature.
double mass(const ScalarField4& u, double rho, const WeightFn& k,
            const DomainMask& mask);

/// Hybrid quadrature: per bubble, the grid rendering of the exact profile
/// rho^4 k(xi_j) e^{u_j} inside |x-xi_j| <= delta0 is swapped for its
/// analytic radial integral.
double mass_hybrid(const ScalarField4& u, const ConfigPoint& cfg,
                   const EpsRho& er, double delta0, const WeightFn& k,
                   const DomainMask& mask);

struct ConcentrationDiagnostics {
  std::vector<double> bubble_sup;  // sup of u over B_delta(xi_j)
  double exterior_sup = 0.0;       // sup outside all balls
};

ConcentrationDiagnostics concentration_diagnostics(const ScalarField4& u,
                                                   const ConfigPoint& cfg,
                                                   double delta,
                                                   const DomainMask& mask);

struct ContinuationParams {
  NewtonParams newton;
  LinearSolveParams linear;
  double resolution_eta = 4.5;  // grid rule h <= mu_min * eps / eta
  int n_min = 17;
  int n_max = 81;
  bool round_to_odd = true;
};

struct ContinuationStage {
  SolveReport report;
  double phi_value = 0.0;
  double energy_reference = 0.0;   // expansion value at this stage
  double ansatz_energy = 0.0;      // hybrid J_rho[U]
  double ansatz_star_norm = 0.0;
  int nodes_across = 0;
};

struct ContinuationResult {
  std::vector<ContinuationStage> stages;
  bool failed = false;
  int failed_index = -1;
  std::string failure;
};

/// Solves along a strictly decreasing eps schedule, one grid per stage sized
/// by the core-resolution rule, warm-starting each stage from the previous
/// solution plus the rebuilt ansatz difference.
ContinuationResult continuation(const DomainSpec& spec,
                                const std::vector<Point4>& xi, double delta0,
                                const std::vector<double>& eps_schedule,
                                const WeightFn& k,
                                const ContinuationParams& params = {});

/// Grid sizing from the resolution rule; nodes across axis 0 of the box.
int nodes_across_for(const DomainSpec& spec, double mu_min, double eps,
                     const ContinuationParams& params);

}  // namespace bilap4
