#include "bilap4/poisson.hpp"

#include <cmath>

#include "bilap4/par.hpp"

namespace bilap4 {

namespace {

// y = (-laplacian x) restricted to interior nodes, with x = 0 outside them.
// Stored on the full grid; exterior and boundary entries of x and y are zero.
void apply_neg_laplacian(const DomainMask& mask, const std::vector<double>& x,
                         std::vector<double>& y) {
  const auto st = mask.grid.strides();
  const double inv_h2 = 1.0 / (mask.grid.h * mask.grid.h);
  const auto& idxs = mask.interior;
  parallel_for(idxs.size(), [&](size_t lo, size_t hi) {
    for (size_t k = lo; k < hi; ++k) {
      size_t i = size_t(idxs[k]);
      double s = 8.0 * x[i];
      for (int d = 0; d < 4; ++d) s -= x[i + st[d]] + x[i - st[d]];
      y[i] = s * inv_h2;
    }
  });
}

double dot_interior(const DomainMask& mask, const std::vector<double>& a,
                    const std::vector<double>& b) {
  return parallel_reduce_sum(mask.interior.size(), [&](size_t lo, size_t hi) {
    double s = 0.0;
    for (size_t k = lo; k < hi; ++k) {
      size_t i = size_t(mask.interior[k]);
      s += a[i] * b[i];
    }
    return s;
  });
}

}  // namespace

ScalarField4 solve_dirichlet(const ScalarField4& rhs, const ScalarField4& bdata,
                             const DomainMask& mask,
                             const LinearSolveParams& params, CgStats* stats) {
  if (!(params.tol > 0.0 && params.tol <= 1e-2))
    throw InvalidDomainSpec("linear solve tol must be in (0, 1e-2]");
  const Grid4& g = mask.grid;
  const auto st = g.strides();
  const double inv_h2 = 1.0 / (g.h * g.h);
  const size_t total = g.node_count();
  const size_t n_int = mask.interior.size();
  int max_iter = params.max_iter > 0
                     ? params.max_iter
                     : int(20.0 * std::sqrt(double(n_int))) + 10;

  // b = -rhs + boundary forcing; the boundary term keeps A = -laplacian
  // symmetric on the homogeneous space.
  std::vector<double> b(total, 0.0);
  double bforce2 = 0.0;
  {
    std::vector<double> bf(total, 0.0);
    parallel_for(n_int, [&](size_t lo, size_t hi) {
      for (size_t k = lo; k < hi; ++k) {
        size_t i = size_t(mask.interior[k]);
        double f = 0.0;
        for (int d = 0; d < 4; ++d) {
          size_t ip = i + st[d], im = i - st[d];
          if (mask.cls[ip] == NodeClass::Boundary) f += bdata.v[ip];
          if (mask.cls[im] == NodeClass::Boundary) f += bdata.v[im];
        }
        bf[i] = f * inv_h2;
        b[i] = -rhs.v[i] + bf[i];
      }
    });
    bforce2 = dot_interior(mask, bf, bf);
  }

  double rhs2 = 0.0;
  {
    double s = parallel_reduce_sum(n_int, [&](size_t lo, size_t hi) {
      double acc = 0.0;
      for (size_t k = lo; k < hi; ++k) {
        double r = rhs.v[size_t(mask.interior[k])];
        acc += r * r;
      }
      return acc;
    });
    rhs2 = s;
  }
  const double target = params.tol * (std::sqrt(rhs2) + std::sqrt(bforce2));

  std::vector<double> x(total, 0.0), r = b, z(total, 0.0), p(total, 0.0),
                      ap(total, 0.0);
  const double inv_diag = 1.0 / (8.0 * inv_h2);  // Jacobi: constant diagonal

  auto apply_precond = [&](const std::vector<double>& src,
                           std::vector<double>& dst) {
    parallel_for(n_int, [&](size_t lo, size_t hi) {
      for (size_t k = lo; k < hi; ++k) {
        size_t i = size_t(mask.interior[k]);
        dst[i] = src[i] * inv_diag;
      }
    });
  };

  double res_norm = std::sqrt(dot_interior(mask, r, r));
  int it = 0;
  if (res_norm > target && target >= 0.0 && res_norm > 0.0) {
    apply_precond(r, z);
    p = z;
    double rz = dot_interior(mask, r, z);
    for (it = 1; it <= max_iter; ++it) {
      apply_neg_laplacian(mask, p, ap);
      double pap = dot_interior(mask, p, ap);
      double alpha = rz / pap;
      parallel_for(n_int, [&](size_t lo, size_t hi) {
        for (size_t k = lo; k < hi; ++k) {
          size_t i = size_t(mask.interior[k]);
          x[i] += alpha * p[i];
          r[i] -= alpha * ap[i];
        }
      });
      res_norm = std::sqrt(dot_interior(mask, r, r));
      if (res_norm <= target) break;
      apply_precond(r, z);
      double rz_new = dot_interior(mask, r, z);
      double beta = rz_new / rz;
      rz = rz_new;
      parallel_for(n_int, [&](size_t lo, size_t hi) {
        for (size_t k = lo; k < hi; ++k) {
          size_t i = size_t(mask.interior[k]);
          p[i] = z[i] + beta * p[i];
        }
      });
    }
    if (res_norm > target)
      throw NoConvergence(max_iter, res_norm, "dirichlet");
  }

  if (stats) {
    stats->iterations = it;
    stats->rel_residual =
        (std::sqrt(rhs2) + std::sqrt(bforce2)) > 0.0
            ? res_norm / (std::sqrt(rhs2) + std::sqrt(bforce2))
            : 0.0;
  }

  ScalarField4 u(g);
  parallel_for(n_int, [&](size_t lo, size_t hi) {
    for (size_t k = lo; k < hi; ++k) {
      size_t i = size_t(mask.interior[k]);
      u.v[i] = x[i];
    }
  });
  for (int32_t i : mask.boundary) u.v[size_t(i)] = bdata.v[size_t(i)];
  return u;
}

}  // namespace bilap4
