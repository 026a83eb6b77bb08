#pragma once

#include "bilap4/reduced_energy.hpp"

namespace bilap4 {

/// Coupling rho^4 = 384 eps^4 / (1 + eps^2)^4.
struct EpsRho {
  double eps = 0.0;
  double rho = 0.0;

  static EpsRho from_eps(double eps);
  double rho4() const { return rho * rho * rho * rho; }
};

/// Bubble profile
///   u_j(x) = 4 log[ mu_j (1+eps^2) / (mu_j^2 eps^2 + |x-xi_j|^2) ] - log k(xi_j),
/// the radial entire solution of Delta^2 u = rho^4 k(xi_j) e^u.
double bubble(const Point4& x, const Point4& xi_j, double mu_j, double eps,
              double k_at_xij);

/// Multi-bubble approximate solution U = sum_j (u_j + H_j) with its
/// per-bubble pieces. U and its declared boundary Laplacian vanish on the
/// boundary by construction.
struct AnsatzBundle {
  ConfigPoint cfg;
  EpsRho er;
  std::vector<double> k_at_xi;
  ScalarField4 U;              // on Interior and Boundary nodes
  ScalarField4 lap_U;          // analytic Delta u_j + cascade H_j laplacians
  std::vector<ScalarField4> H_j;
  double aa8_sup = 0.0;        // sup |U_j - G(.,xi_j)| over dist >= delta0
};

struct BuildOptions {
  /// Hard gate mu_j * eps >= 4h. Disable only for quantities that never
  /// sample the bubble core on the grid (hybrid far-field integrals).
  bool enforce_core_resolution = true;
};

AnsatzBundle build_ansatz(const ConfigPoint& cfg, double eps,
                          GreensCache& greens, const WeightFn& k,
                          const DomainMask& mask,
                          const LinearSolveParams& params = {},
                          const BuildOptions& opts = {});

/// Weight of the bubble-adapted sup norm at x (expanded variable y = x/eps):
///   sum_j (1 + |x - xi_j|^2/eps^2)^{-7/2} + eps^4.
double star_weight_at(const Point4& x, const ConfigPoint& cfg, double eps);

/// Weighted sup norm of a field given in the expanded normalization,
/// excluding the `excluded_layers` outermost interior layers.
double star_norm(const ScalarField4& f_y, const ConfigPoint& cfg, double eps,
                 const DomainMask& mask, int excluded_layers = 2);

struct ResidualReport {
  ScalarField4 R_y;        // eps^4 (Delta_h^2 U - rho^4 k e^U), interior nodes
  double star_norm = 0.0;  // over interior minus two layers
  double band_sup = 0.0;   // weighted sup over the excluded band
};

/// Ansatz residual in the expanded normalization with its *-norm.
ResidualReport residual(const AnsatzBundle& bundle, const DomainMask& mask,
                        const WeightFn& k);

/// Linearization weight W(y) = k(eps y) e^V = eps^4 rho^4 k(x) e^U(x).
ScalarField4 linear_weight(const AnsatzBundle& bundle, const DomainMask& mask,
                           const WeightFn& k);

/// Off-grid evaluation of W using analytic bubbles and interpolated H_j.
double linear_weight_at(const AnsatzBundle& bundle, const WeightFn& k,
                        const Point4& x);

/// Bounded kernel functions of the limit operator
/// L_j = Delta^2 - 384 mu^4/(mu^2+|z|^2)^4:
///   Y_0(z) = 4 (|z|^2 - mu^2)/(|z|^2 + mu^2),  Y_i(z) = 8 z_i/(mu^2 + |z|^2).
double kernel_y(int i, double mu, const Point4& z);

/// L_eps(psi) = eps^4 Delta_h^2 psi - W psi, for psi with psi = Delta psi = 0
/// on the boundary. Valid on the doubly-interior region.
ScalarField4 apply_linearized(const AnsatzBundle& bundle, const DomainMask& mask,
                              const WeightFn& k, const ScalarField4& psi);

/// N(psi) = W [e^psi - psi - 1].
ScalarField4 nonlinearity(const AnsatzBundle& bundle, const DomainMask& mask,
                          const WeightFn& k, const ScalarField4& psi);

/// J_rho[u] = 1/2 int (Delta_h u)^2 - rho^4 int k e^u, plain grid quadrature.
double energy(const ScalarField4& u, double rho, const WeightFn& k,
              const DomainMask& mask);

/// Same functional with the bubble-singular parts of both integrals replaced
/// inside |x-xi_j| <= delta0 by analytic radial integrals of the profile
/// (grid rendering of the profile subtracted, exact value added back).
double energy_hybrid(const AnsatzBundle& bundle, const WeightFn& k,
                     const DomainMask& mask);

/// Leading terms of the energy expansion:
///   -128 pi^2 m + 256 pi^2 m |log eps| + 32 pi^2 phi_m.
double energy_expansion_reference(int m, double eps, double phi_m_value);

/// Free-space second-order stencil operators applied pointwise to a callable;
/// used for local operator checks on refined spacings without a grid.
double laplacian_pointwise(const std::function<double(const Point4&)>& f,
                           const Point4& x, double h);
double bilaplacian_pointwise(const std::function<double(const Point4&)>& f,
                             const Point4& x, double h);

}  // namespace bilap4
