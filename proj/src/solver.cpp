#include "bilap4/solver.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <cstdlib>
#include <numbers>

#include "bilap4/par.hpp"

namespace bilap4 {

namespace {

// y = Delta_h(Delta_h x) on interior nodes with x and the intermediate field
// zero on the boundary (the coupled Navier discretization).
void apply_bilap(const DomainMask& mask, const std::vector<double>& x,
                 std::vector<double>& work, std::vector<double>& y) {
  const auto st = mask.grid.strides();
  const double inv_h2 = 1.0 / (mask.grid.h * mask.grid.h);
  const auto& idxs = mask.interior;
  parallel_for(idxs.size(), [&](size_t lo, size_t hi) {
    for (size_t kk = lo; kk < hi; ++kk) {
      size_t i = size_t(idxs[kk]);
      double s = -8.0 * x[i];
      for (int d = 0; d < 4; ++d) s += x[i + st[d]] + x[i - st[d]];
      work[i] = s * inv_h2;
    }
  });
  parallel_for(idxs.size(), [&](size_t lo, size_t hi) {
    for (size_t kk = lo; kk < hi; ++kk) {
      size_t i = size_t(idxs[kk]);
      double s = -8.0 * work[i];
      for (int d = 0; d < 4; ++d) s += work[i + st[d]] + work[i - st[d]];
      y[i] = s * inv_h2;
    }
  });
}

double dot_interior(const DomainMask& mask, const std::vector<double>& a,
                    const std::vector<double>& b) {
  return parallel_reduce_sum(mask.interior.size(), [&](size_t lo, size_t hi) {
    double s = 0.0;
    for (size_t kk = lo; kk < hi; ++kk) {
      size_t i = size_t(mask.interior[kk]);
      s += a[i] * b[i];
    }
    return s;
  });
}

// Exact inverse of the discrete Navier bilaplacian on the outer box via the
// 4D sine transform (DST-I diagonalizes the zero-Dirichlet Laplacian). On a
// holed domain this inverts the bounding-box operator, which is only a
// preconditioner; the rhs is zero-extended into the hole.
class BoxBilapInverse {
 public:
  explicit BoxBilapInverse(const DomainMask& mask) : mask_(&mask) {
    const Grid4& g = mask.grid;
    for (int d = 0; d < 4; ++d) {
      int lo = int(std::lround((mask.spec.lo[d] - g.origin[d]) / g.h));
      dims_[d] = 0;
      lo_[d] = lo + 1;  // first interior index along axis d
      int hi = int(std::lround((mask.spec.hi[d] - g.origin[d]) / g.h));
      dims_[d] = hi - lo - 1;
    }
    size_t n = size_t(dims_[0]) * dims_[1] * dims_[2] * dims_[3];
    buf_.assign(n, 0.0);
    fftw_r2r_kind kinds[4] = {FFTW_RODFT00, FFTW_RODFT00, FFTW_RODFT00,
                              FFTW_RODFT00};
    plan_ = fftw_plan_r2r(4, dims_.data(), buf_.data(), buf_.data(), kinds,
                          FFTW_ESTIMATE);
    for (int d = 0; d < 4; ++d) {
      eig_[d].resize(size_t(dims_[d]));
      for (int k = 1; k <= dims_[d]; ++k) {
        double s = std::sin(0.5 * std::numbers::pi * k / (dims_[d] + 1));
        eig_[d][size_t(k - 1)] = 4.0 / (g.h * g.h) * s * s;
      }
      norm_ *= 2.0 * (dims_[d] + 1);
    }
  }
  ~BoxBilapInverse() { fftw_destroy_plan(plan_); }
  BoxBilapInverse(const BoxBilapInverse&) = delete;
  BoxBilapInverse& operator=(const BoxBilapInverse&) = delete;

  void apply(const std::vector<double>& rhs, std::vector<double>& out) {
    const Grid4& g = mask_->grid;
    // gather the box-interior block
    size_t idx = 0;
    for (int i0 = 0; i0 < dims_[0]; ++i0)
      for (int i1 = 0; i1 < dims_[1]; ++i1)
        for (int i2 = 0; i2 < dims_[2]; ++i2) {
          size_t base = g.index(lo_[0] + i0, lo_[1] + i1, lo_[2] + i2, lo_[3]);
          std::memcpy(&buf_[idx], &rhs[base], sizeof(double) * dims_[3]);
          idx += size_t(dims_[3]);
        }
    fftw_execute(plan_);
    idx = 0;
    for (int i0 = 0; i0 < dims_[0]; ++i0)
      for (int i1 = 0; i1 < dims_[1]; ++i1)
        for (int i2 = 0; i2 < dims_[2]; ++i2) {
          double e012 = eig_[0][size_t(i0)] + eig_[1][size_t(i1)] +
                        eig_[2][size_t(i2)];
          for (int i3 = 0; i3 < dims_[3]; ++i3) {
            double lam = e012 + eig_[3][size_t(i3)];
            buf_[idx] /= lam * lam * norm_;
            ++idx;
          }
        }
    fftw_execute(plan_);
    // scatter to interior nodes only (hole stays zero)
    std::fill(out.begin(), out.end(), 0.0);
    idx = 0;
    for (int i0 = 0; i0 < dims_[0]; ++i0)
      for (int i1 = 0; i1 < dims_[1]; ++i1)
        for (int i2 = 0; i2 < dims_[2]; ++i2) {
          size_t base = g.index(lo_[0] + i0, lo_[1] + i1, lo_[2] + i2, lo_[3]);
          for (int i3 = 0; i3 < dims_[3]; ++i3, ++idx) {
            if (mask_->cls[base + size_t(i3)] == NodeClass::Interior)
              out[base + size_t(i3)] = buf_[idx];
          }
        }
  }

 private:
  const DomainMask* mask_;
  std::array<int, 4> dims_{}, lo_{};
  std::vector<double> buf_;
  std::array<std::vector<double>, 4> eig_;
  double norm_ = 1.0;
  fftw_plan plan_{};
};

// Restarted flexible GMRES for (Delta_h^2 - W) x = b, right-preconditioned
// by the box bilaplacian inverse. The operator is symmetric indefinite (W
// exceeds the small bilaplacian eigenvalues inside the bubble cores), which
// rules out CG; GMRES handles the handful of shifted eigenvalues.
int jac_solve(const DomainMask& mask, const std::vector<double>& W,
              const std::vector<double>& b, std::vector<double>& x,
              BoxBilapInverse& minv, double rel_tol, int max_iter) {
  const size_t total = mask.grid.node_count();
  const auto& idxs = mask.interior;
  auto apply_a = [&](const std::vector<double>& in, std::vector<double>& work,
                     std::vector<double>& out) {
    apply_bilap(mask, in, work, out);
    parallel_for(idxs.size(), [&](size_t lo, size_t hi) {
      for (size_t kk = lo; kk < hi; ++kk) {
        size_t i = size_t(idxs[kk]);
        out[i] -= W[i] * in[i];
      }
    });
  };

  const int restart = 20;
  std::fill(x.begin(), x.end(), 0.0);
  double bnorm = std::sqrt(dot_interior(mask, b, b));
  if (bnorm == 0.0) return 0;

  std::vector<std::vector<double>> V, Z;
  std::vector<double> work(total, 0.0), r = b;
  double rnorm = bnorm;
  int used = 0;
  while (used < max_iter) {
    V.assign(1, r);
    double beta = rnorm;
    parallel_for(idxs.size(), [&](size_t lo, size_t hi) {
      for (size_t kk = lo; kk < hi; ++kk) V[0][size_t(idxs[kk])] /= beta;
    });
    Z.clear();
    std::vector<std::array<double, 2>> givens;
    std::vector<std::vector<double>> H;
    std::vector<double> g(1, beta);
    int m = 0;
    for (int j = 0; j < restart && used < max_iter; ++j, ++used) {
      Z.emplace_back(total, 0.0);
      minv.apply(V[size_t(j)], Z.back());
      std::vector<double> w(total, 0.0);
      apply_a(Z.back(), work, w);
      H.emplace_back(size_t(j) + 2, 0.0);
      for (int i = 0; i <= j; ++i) {
        double hij = dot_interior(mask, w, V[size_t(i)]);
        H[size_t(j)][size_t(i)] = hij;
        parallel_for(idxs.size(), [&](size_t lo, size_t hi) {
          for (size_t kk = lo; kk < hi; ++kk) {
            size_t t = size_t(idxs[kk]);
            w[t] -= hij * V[size_t(i)][t];
          }
        });
      }
      double hnext = std::sqrt(dot_interior(mask, w, w));
      H[size_t(j)][size_t(j) + 1] = hnext;
      // apply stored rotations, then a new one
      for (int i = 0; i <= j - 1; ++i) {
        double c = givens[size_t(i)][0], s = givens[size_t(i)][1];
        double a0 = H[size_t(j)][size_t(i)], a1 = H[size_t(j)][size_t(i) + 1];
        H[size_t(j)][size_t(i)] = c * a0 + s * a1;
        H[size_t(j)][size_t(i) + 1] = -s * a0 + c * a1;
      }
      double a0 = H[size_t(j)][size_t(j)], a1 = hnext;
      double denom = std::hypot(a0, a1);
      double c = denom == 0.0 ? 1.0 : a0 / denom;
      double s = denom == 0.0 ? 0.0 : a1 / denom;
      givens.push_back({c, s});
      H[size_t(j)][size_t(j)] = denom;
      H[size_t(j)][size_t(j) + 1] = 0.0;
      g.push_back(-s * g[size_t(j)]);
      g[size_t(j)] *= c;
      m = j + 1;
      rnorm = std::abs(g[size_t(m)]);
      if (rnorm <= rel_tol * bnorm || hnext == 0.0) break;
      V.emplace_back(total, 0.0);
      parallel_for(idxs.size(), [&](size_t lo, size_t hi) {
        for (size_t kk = lo; kk < hi; ++kk) {
          size_t t = size_t(idxs[kk]);
          V[size_t(j) + 1][t] = w[t] / hnext;
        }
      });
    }
    // back-substitute y and accumulate x += Z y
    std::vector<double> y(size_t(m), 0.0);
    for (int i = m - 1; i >= 0; --i) {
      double s = g[size_t(i)];
      for (int l = i + 1; l < m; ++l) s -= H[size_t(l)][size_t(i)] * y[size_t(l)];
      y[size_t(i)] = s / H[size_t(i)][size_t(i)];
    }
    parallel_for(idxs.size(), [&](size_t lo, size_t hi) {
      for (size_t kk = lo; kk < hi; ++kk) {
        size_t t = size_t(idxs[kk]);
        double acc = x[t];
        for (int l = 0; l < m; ++l) acc += y[size_t(l)] * Z[size_t(l)][t];
        x[t] = acc;
      }
    });
    // true residual for the restart / exit test
    std::vector<double> ax(total, 0.0);
    apply_a(x, work, ax);
    parallel_for(idxs.size(), [&](size_t lo, size_t hi) {
      for (size_t kk = lo; kk < hi; ++kk) {
        size_t t = size_t(idxs[kk]);
        r[t] = b[t] - ax[t];
      }
    });
    rnorm = std::sqrt(dot_interior(mask, r, r));
    if (rnorm <= rel_tol * bnorm) return used;
  }
  throw JacobianSolveFailure(max_iter, rnorm / bnorm);
}

constexpr double kOverflowCap = 500.0;

}  // namespace

NewtonResult newton_solve(const ScalarField4& initial, const EpsRho& er,
                          const WeightFn& k, const DomainMask& mask,
                          const NewtonParams& params) {
  const size_t total = mask.grid.node_count();
  const double rho4 = er.rho4();
  NewtonResult res;
  res.u = initial;
  res.report.eps = er.eps;
  res.report.rho = er.rho;

  std::vector<double> kx(total, 0.0);
  for (int32_t ii : mask.interior)
    kx[size_t(ii)] = k(mask.grid.coord(size_t(ii)));

  std::vector<double> F(total, 0.0), work(total, 0.0), W(total, 0.0),
      delta(total, 0.0), trial(total, 0.0);

  auto eval_residual = [&](const std::vector<double>& u, std::vector<double>& out,
                           double* fmax, double* wmax) {
    for (int32_t ii : mask.interior)
      if (u[size_t(ii)] > kOverflowCap)
        throw OverflowGuard("Newton iterate exceeds the exponential overflow cap");
    apply_bilap(mask, u, work, out);
    double fm = 0.0, wm = 0.0;
    for (int32_t ii : mask.interior) {
      size_t i = size_t(ii);
      double w = rho4 * kx[i] * std::exp(u[i]);
      out[i] -= w;
      fm = std::max(fm, std::abs(out[i]));
      wm = std::max(wm, w);
    }
    if (fmax) *fmax = fm;
    if (wmax) *wmax = wm;
  };

  BoxBilapInverse minv(mask);
  std::vector<double> u(total, 0.0);
  for (int32_t ii : mask.interior) u[size_t(ii)] = initial.v[size_t(ii)];

  double fmax = 0.0, wmax = 0.0;
  eval_residual(u, F, &fmax, &wmax);
  res.report.residual_norms.push_back(fmax);

  for (int it = 0; it < params.max_iter; ++it) {
    double scale = 1.0 + wmax;
    if (fmax <= params.tol * scale) {
      res.report.converged = true;
      break;
    }
    res.report.iterations = it + 1;
    for (int32_t ii : mask.interior) {
      size_t i = size_t(ii);
      W[i] = rho4 * kx[i] * std::exp(u[i]);
    }
    std::vector<double> b(total, 0.0);
    for (int32_t ii : mask.interior) b[size_t(ii)] = -F[size_t(ii)];
    int jit = jac_solve(mask, W, b, delta, minv, params.jac_tol, params.jac_max_iter);
    if (std::getenv("BILAP4_DEBUG_NEWTON")) {
      double dmax = 0;
      for (int32_t ii : mask.interior) dmax = std::max(dmax, std::abs(delta[size_t(ii)]));
      fprintf(stderr, "newton it=%d |F|=%.3e jac_iters=%d |delta|=%.3e\n", it, fmax, jit, dmax);
    }

    double lambda = 1.0;
    if (params.max_step > 0.0) {
      double dmax = 0.0;
      for (int32_t ii : mask.interior)
        dmax = std::max(dmax, std::abs(delta[size_t(ii)]));
      if (dmax > params.max_step) lambda = params.max_step / dmax;
    }
    double new_fmax = 0.0, new_wmax = 0.0;
    bool accepted = false;
    for (int half = 0; half <= params.max_halvings; ++half) {
      for (int32_t ii : mask.interior) {
        size_t i = size_t(ii);
        trial[i] = u[i] + lambda * delta[i];
      }
      try {
        eval_residual(trial, F, &new_fmax, &new_wmax);
      } catch (const OverflowGuard&) {
        lambda *= 0.5;
        continue;
      }
      if (std::getenv("BILAP4_DEBUG_NEWTON"))
        fprintf(stderr, "  lambda=%.4f new|F|=%.3e\n", lambda, new_fmax);
      if (new_fmax < fmax) {
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) {
      eval_residual(u, F, &fmax, &wmax);  // restore residual at u
      break;
    }
    std::swap(u, trial);
    fmax = new_fmax;
    wmax = new_wmax;
    res.report.residual_norms.push_back(fmax);
  }
  if (!res.report.converged && fmax <= params.tol * (1.0 + wmax))
    res.report.converged = true;

  for (int32_t ii : mask.interior) res.u.v[size_t(ii)] = u[size_t(ii)];
  for (int32_t ii : mask.boundary) res.u.v[size_t(ii)] = 0.0;
  return res;
}

double mass(const ScalarField4& u, double rho, const WeightFn& k,
            const DomainMask& mask) {
  const double rho4 = rho * rho * rho * rho;
  ScalarField4 f(mask.grid);
  auto set = [&](int32_t ii) {
    size_t i = size_t(ii);
    double uv = u.v[i];
    if (uv > kOverflowCap)
      throw OverflowGuard("u exceeds the exponential overflow cap");
    f.v[i] = rho4 * k(mask.grid.coord(i)) * std::exp(uv);
  };
  for (int32_t ii : mask.interior) set(ii);
  for (int32_t ii : mask.boundary) set(ii);
  return integrate(f, mask);
}

double mass_hybrid(const ScalarField4& u, const ConfigPoint& cfg,
                   const EpsRho& er, double delta0, const WeightFn& k,
                   const DomainMask& mask) {
  double m = mass(u, er.rho, k, mask);
  const double eps = er.eps;
  const double eps4 = std::pow(eps, 4);
  const double w = std::pow(mask.grid.h, 4);
  for (int j = 0; j < cfg.m(); ++j) {
    double mu = cfg.mu[size_t(j)];
    auto profile = [&](double r) {
      double a = mu * mu * eps * eps;
      double d = a + r * r;
      return 384.0 * eps4 * std::pow(mu, 4) / (d * d * d * d);
    };
    m += radial_integrate(profile, delta0, 1 << 14).value;
    for (int32_t ii : mask.interior) {
      size_t i = size_t(ii);
      double r2 = dist2(mask.grid.coord(i), cfg.xi[size_t(j)]);
      if (r2 <= delta0 * delta0) m -= w * profile(std::sqrt(r2));
    }
  }
  return m;
}

ConcentrationDiagnostics concentration_diagnostics(const ScalarField4& u,
                                                   const ConfigPoint& cfg,
                                                   double delta,
                                                   const DomainMask& mask) {
  ConcentrationDiagnostics d;
  d.bubble_sup.assign(size_t(cfg.m()), -1e300);
  d.exterior_sup = -1e300;
  bool any_ext = false;
  for (int32_t ii : mask.interior) {
    size_t i = size_t(ii);
    Point4 x = mask.grid.coord(i);
    bool in_ball = false;
    for (int j = 0; j < cfg.m(); ++j) {
      if (dist2(x, cfg.xi[size_t(j)]) <= delta * delta) {
        d.bubble_sup[size_t(j)] = std::max(d.bubble_sup[size_t(j)], u.v[i]);
        in_ball = true;
      }
    }
    if (!in_ball) {
      d.exterior_sup = std::max(d.exterior_sup, u.v[i]);
      any_ext = true;
    }
  }
  if (!any_ext) d.exterior_sup = 0.0;
  for (double& s : d.bubble_sup)
    if (s == -1e300) s = 0.0;
  return d;
}

int nodes_across_for(const DomainSpec& spec, double mu_min, double eps,
                     const ContinuationParams& params) {
  double L = spec.hi[0] - spec.lo[0];
  double h_needed = mu_min * eps / params.resolution_eta;
  int n = int(std::ceil(L / h_needed)) + 1;
  if (params.round_to_odd && n % 2 == 0) ++n;
  n = std::max(n, params.n_min);
  if (n > params.n_max)
    throw CoreUnderResolved("resolution rule needs " + std::to_string(n) +
                            " nodes across, above the cap " +
                            std::to_string(params.n_max));
  return n;
}

ContinuationResult continuation(const DomainSpec& spec,
                                const std::vector<Point4>& xi, double delta0,
                                const std::vector<double>& eps_schedule,
                                const WeightFn& k,
                                const ContinuationParams& params) {
  ContinuationResult out;
  for (size_t s = 1; s < eps_schedule.size(); ++s)
    if (!(eps_schedule[s] < eps_schedule[s - 1]))
      throw InvalidDomainSpec("eps schedule must be strictly decreasing");

  // mu estimate for grid sizing, refreshed per stage.
  double mu_min = 0.0;
  {
    DomainMask coarse = build_domain_on(spec, 17);
    GreensCache cache(coarse, params.linear);
    ConfigPoint cfg;
    cfg.xi = xi;
    cfg.delta0 = delta0;
    auto mu = mu_from_xi(cfg, cache, k);
    mu_min = *std::min_element(mu.begin(), mu.end());
  }

  ScalarField4 prev_u, prev_U;
  bool have_prev = false;

  for (size_t s = 0; s < eps_schedule.size(); ++s) {
    double eps = eps_schedule[s];
    try {
      int across = nodes_across_for(spec, mu_min, eps, params);
      DomainMask mask = build_domain_on(spec, across);
      GreensCache cache(mask, params.linear);
      ConfigPoint cfg;
      cfg.xi = xi;
      cfg.delta0 = delta0;
      AnsatzBundle bundle =
          build_ansatz(cfg, eps, cache, k, mask, params.linear);
      mu_min = *std::min_element(bundle.cfg.mu.begin(), bundle.cfg.mu.end());

      ScalarField4 initial = bundle.U;
      if (have_prev) {
        for (int32_t ii : mask.interior) {
          size_t i = size_t(ii);
          Point4 x = mask.grid.coord(i);
          initial.v[i] += interpolate(prev_u, x) - interpolate(prev_U, x);
        }
      }

      NewtonResult nr = newton_solve(initial, bundle.er, k, mask, params.newton);
      ContinuationStage stage;
      stage.nodes_across = across;
      stage.report = std::move(nr.report);
      stage.report.cfg = bundle.cfg;
      stage.report.mass = mass(nr.u, bundle.er.rho, k, mask);
      stage.report.mass_hybrid =
          mass_hybrid(nr.u, bundle.cfg, bundle.er, delta0, k, mask);
      stage.report.energy = energy(nr.u, bundle.er.rho, k, mask);
      double corr = 0.0, usup = 0.0;
      for (int32_t ii : mask.interior) {
        size_t i = size_t(ii);
        corr = std::max(corr, std::abs(nr.u.v[i] - bundle.U.v[i]));
        usup = std::max(usup, std::abs(bundle.U.v[i]));
      }
      stage.report.correction_sup = corr;
      stage.report.branch_jump = corr > usup / 10.0;
      stage.phi_value = phi_m(bundle.cfg, cache, k);
      stage.energy_reference =
          energy_expansion_reference(bundle.cfg.m(), eps, stage.phi_value);
      stage.ansatz_energy = energy_hybrid(bundle, k, mask);
      stage.ansatz_star_norm = residual(bundle, mask, k).star_norm;

      if (!stage.report.converged)
        throw NoConvergence(stage.report.iterations,
                            stage.report.residual_norms.back(), "newton");

      prev_u = nr.u;
      prev_U = bundle.U;
      have_prev = true;
      out.stages.push_back(std::move(stage));
    } catch (const Error& e) {
      out.failed = true;
      out.failed_index = int(s);
      out.failure = e.what();
      break;
    }
  }
  return out;
}

}  // namespace bilap4
