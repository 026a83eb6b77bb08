#include "bilap4/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bilap4/par.hpp"

namespace bilap4 {

double dist(const Point4& a, const Point4& b) { return std::sqrt(dist2(a, b)); }

Grid4 Grid4::make(std::array<int, 4> n, double h, Point4 origin) {
  for (int d = 0; d < 4; ++d) {
    if (n[d] < 5) throw InvalidDomainSpec("grid needs at least 5 nodes per axis");
  }
  if (!(h > 0.0)) throw InvalidDomainSpec("grid spacing must be positive");
  Grid4 g;
  g.n = n;
  g.h = h;
  g.origin = origin;
  return g;
}

Grid4 Grid4::covering(const Point4& lo, const Point4& hi, int nodes_across,
                      int pad) {
  if (nodes_across < 3) throw InvalidDomainSpec("nodes_across must be >= 3");
  if (pad < 1) throw InvalidDomainSpec("covering grid needs pad >= 1");
  double len0 = hi[0] - lo[0];
  if (!(len0 > 0.0)) throw InvalidDomainSpec("box must have positive extent");
  double h = len0 / (nodes_across - 1);
  std::array<int, 4> n{};
  Point4 origin{};
  for (int d = 0; d < 4; ++d) {
    double len = hi[d] - lo[d];
    if (!(len > 0.0)) throw InvalidDomainSpec("box must have positive extent");
    double spans = len / h;
    int m = int(std::lround(spans));
    if (std::abs(spans - m) > 1e-9 * std::max(1.0, spans))
      throw InvalidDomainSpec("box extents must be integer multiples of h");
    n[d] = m + 1 + 2 * pad;
    origin[d] = lo[d] - pad * h;
  }
  return make(n, h, origin);
}

DomainSpec DomainSpec::box(const Point4& lo, const Point4& hi) {
  for (int d = 0; d < 4; ++d)
    if (!(hi[d] > lo[d])) throw InvalidDomainSpec("box must have hi > lo");
  DomainSpec s;
  s.lo = lo;
  s.hi = hi;
  return s;
}

DomainSpec DomainSpec::box_with_hole(const Point4& lo, const Point4& hi,
                                     const Point4& hole_lo,
                                     const Point4& hole_hi) {
  DomainSpec s = box(lo, hi);
  for (int d = 0; d < 4; ++d) {
    if (!(hole_hi[d] > hole_lo[d]))
      throw InvalidDomainSpec("hole must have hi > lo");
    if (!(hole_lo[d] > lo[d] && hole_hi[d] < hi[d]))
      throw InvalidDomainSpec("hole must be strictly inside the outer box");
  }
  s.has_hole = true;
  s.hole_lo = hole_lo;
  s.hole_hi = hole_hi;
  return s;
}

Point4 DomainSpec::barycenter() const {
  Point4 c;
  for (int d = 0; d < 4; ++d) c[d] = 0.5 * (lo[d] + hi[d]);
  return c;
}

bool DomainSpec::inside(const Point4& x) const {
  for (int d = 0; d < 4; ++d)
    if (!(x[d] > lo[d] && x[d] < hi[d])) return false;
  if (has_hole) {
    bool in_hole = true;
    for (int d = 0; d < 4; ++d)
      if (!(x[d] >= hole_lo[d] && x[d] <= hole_hi[d])) in_hole = false;
    if (in_hole) return false;
  }
  return true;
}

double DomainSpec::distance_to_boundary(const Point4& x) const {
  if (!inside(x)) return -1.0;
  double d_out = 1e300;
  for (int d = 0; d < 4; ++d) {
    d_out = std::min(d_out, x[d] - lo[d]);
    d_out = std::min(d_out, hi[d] - x[d]);
  }
  if (!has_hole) return d_out;
  // Distance from an outside point to an axis-aligned box.
  double s2 = 0.0;
  for (int d = 0; d < 4; ++d) {
    double g = std::max({hole_lo[d] - x[d], x[d] - hole_hi[d], 0.0});
    s2 += g * g;
  }
  return std::min(d_out, std::sqrt(s2));
}

namespace {

constexpr double kAlignTol = 1e-9;

// Node position relative to a closed box: -1 outside, 0 on a face, +1 strictly
// inside. Coordinates within kAlignTol*h of a face count as on it.
int box_side(const Point4& x, const Point4& lo, const Point4& hi, double h) {
  bool on_face = false;
  for (int d = 0; d < 4; ++d) {
    double tol = kAlignTol * std::max(1.0, std::abs(hi[d] - lo[d])) +
                 1e-12 * std::abs(h);
    if (x[d] < lo[d] - tol || x[d] > hi[d] + tol) return -1;
    if (std::abs(x[d] - lo[d]) <= tol || std::abs(x[d] - hi[d]) <= tol)
      on_face = true;
  }
  return on_face ? 0 : 1;
}

void require_aligned(const char* what, double coord, double origin, double h) {
  double steps = (coord - origin) / h;
  if (std::abs(steps - std::lround(steps)) > 1e-6)
    throw InvalidDomainSpec(std::string(what) +
                            " corner does not lie on a grid node");
}

}  // namespace

DomainMask build_domain(const DomainSpec& spec, const Grid4& grid) {
  for (int d = 0; d < 4; ++d) {
    require_aligned("box", spec.lo[d], grid.origin[d], grid.h);
    require_aligned("box", spec.hi[d], grid.origin[d], grid.h);
    if (spec.has_hole) {
      require_aligned("hole", spec.hole_lo[d], grid.origin[d], grid.h);
      require_aligned("hole", spec.hole_hi[d], grid.origin[d], grid.h);
    }
  }
  // The box must sit inside the grid with at least one exterior layer.
  for (int d = 0; d < 4; ++d) {
    double gmin = grid.origin[d];
    double gmax = grid.origin[d] + grid.h * (grid.n[d] - 1);
    if (spec.lo[d] < gmin + 0.5 * grid.h || spec.hi[d] > gmax - 0.5 * grid.h)
      throw SpecOutOfGrid("box does not fit inside the grid with an exterior layer");
  }
  if (spec.has_hole) {
    for (int d = 0; d < 4; ++d) {
      if (spec.hole_lo[d] - spec.lo[d] < 3.0 * grid.h - kAlignTol ||
          spec.hi[d] - spec.hole_hi[d] < 3.0 * grid.h - kAlignTol)
        throw SpecOutOfGrid("hole faces must be at least 3h from the outer faces");
    }
  }

  DomainMask mask;
  mask.grid = grid;
  mask.spec = spec;
  mask.cls.assign(grid.node_count(), NodeClass::Exterior);

  const size_t total = grid.node_count();
  parallel_for(total, [&](size_t lo_i, size_t hi_i) {
    for (size_t idx = lo_i; idx < hi_i; ++idx) {
      Point4 x = grid.coord(idx);
      int outer = box_side(x, spec.lo, spec.hi, grid.h);
      if (outer < 0) continue;
      if (outer == 0) {
        mask.cls[idx] = NodeClass::Boundary;
        continue;
      }
      if (spec.has_hole) {
        int hole = box_side(x, spec.hole_lo, spec.hole_hi, grid.h);
        if (hole > 0) continue;                       // inside the hole
        if (hole == 0) {
          mask.cls[idx] = NodeClass::Boundary;        // hole surface
          continue;
        }
      }
      mask.cls[idx] = NodeClass::Interior;
    }
  });

  for (size_t idx = 0; idx < total; ++idx) {
    if (mask.cls[idx] == NodeClass::Interior)
      mask.interior.push_back(int32_t(idx));
    else if (mask.cls[idx] == NodeClass::Boundary)
      mask.boundary.push_back(int32_t(idx));
  }
  if (mask.interior.empty()) throw DegenerateDomain("domain has no interior nodes");
  return mask;
}

DomainMask build_domain_on(const DomainSpec& spec, int nodes_across) {
  Grid4 g = Grid4::covering(spec.lo, spec.hi, nodes_across);
  return build_domain(spec, g);
}

ScalarField4 laplacian(const ScalarField4& f, const DomainMask& mask) {
  ScalarField4 out(f.grid);
  const auto st = f.grid.strides();
  const double inv_h2 = 1.0 / (f.grid.h * f.grid.h);
  const auto& idxs = mask.interior;
  parallel_for(idxs.size(), [&](size_t lo, size_t hi) {
    for (size_t k = lo; k < hi; ++k) {
      size_t i = size_t(idxs[k]);
      double s = -8.0 * f.v[i];
      for (int d = 0; d < 4; ++d) s += f.v[i + st[d]] + f.v[i - st[d]];
      out.v[i] = s * inv_h2;
    }
  });
  return out;
}

double integrate(const ScalarField4& f, const DomainMask& mask) {
  const double w = std::pow(f.grid.h, 4);
  double si = parallel_reduce_sum(mask.interior.size(), [&](size_t lo, size_t hi) {
    double s = 0.0;
    for (size_t k = lo; k < hi; ++k) s += f.v[size_t(mask.interior[k])];
    return s;
  });
  double sb = parallel_reduce_sum(mask.boundary.size(), [&](size_t lo, size_t hi) {
    double s = 0.0;
    for (size_t k = lo; k < hi; ++k) s += f.v[size_t(mask.boundary[k])];
    return s;
  });
  return w * (si + 0.5 * sb);
}

RadialIntegral radial_integrate(const std::function<double(double)>& g,
                                double r_max, int panels) {
  if (panels < 2 || panels % 2 != 0)
    throw InvalidDomainSpec("radial_integrate needs an even panel count >= 2");
  if (!(r_max > 0.0)) throw InvalidDomainSpec("r_max must be positive");
  const double dr = r_max / panels;
  auto f = [&](double r) {
    double gv = (r == 0.0) ? 0.0 : g(r);  // r^3 kills any finite g at r=0
    if (!std::isfinite(gv)) throw NonfiniteIntegrand(r, gv);
    return r * r * r * gv;
  };
  double sum = f(0.0) + f(r_max);
  for (int i = 1; i < panels; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(i * dr);
  const double two_pi2 = 2.0 * std::numbers::pi * std::numbers::pi;
  RadialIntegral out;
  out.value = two_pi2 * sum * dr / 3.0;
  // Tail for integrands decaying like r^-8 or faster:
  // int_{rmax}^inf r^3 g <= g(rmax) rmax^4 / 4.
  double gtail = g(r_max);
  if (std::isfinite(gtail))
    out.tail_estimate = two_pi2 * std::abs(gtail) * std::pow(r_max, 4) / 4.0;
  return out;
}

namespace {

struct CellLocator {
  std::array<int, 4> base;
  std::array<double, 4> t;
};

CellLocator locate(const Grid4& g, const Point4& x, int margin) {
  CellLocator c;
  for (int d = 0; d < 4; ++d) {
    double s = (x[d] - g.origin[d]) / g.h;
    int i = int(std::floor(s));
    i = std::clamp(i, margin, g.n[d] - 2 - margin);
    c.base[d] = i;
    c.t[d] = s - i;
  }
  return c;
}

}  // namespace

double interpolate(const ScalarField4& f, const Point4& x) {
  CellLocator c = locate(f.grid, x, 0);
  double acc = 0.0;
  for (int m = 0; m < 16; ++m) {
    double w = 1.0;
    std::array<int, 4> i = c.base;
    for (int d = 0; d < 4; ++d) {
      if (m >> d & 1) {
        w *= c.t[d];
        i[d] += 1;
      } else {
        w *= 1.0 - c.t[d];
      }
    }
    acc += w * f.v[f.grid.index(i[0], i[1], i[2], i[3])];
  }
  return acc;
}

namespace {

struct QuarticAxis {
  int base;
  std::array<double, 5> w;    // Lagrange weights
  std::array<double, 5> dw;   // derivative weights (per unit step)
};

QuarticAxis quartic_axis(const Grid4& g, double coord, int axis) {
  double s = (coord - g.origin[axis]) / g.h;
  // Window centered on the nearest node; mirror-symmetric point pairs then
  // get mirror-symmetric stencils.
  int b = int(std::lround(s)) - 2;
  b = std::clamp(b, 1, g.n[axis] - 6);
  double u = s - b;
  QuarticAxis ax;
  ax.base = b;
  for (int i = 0; i < 5; ++i) {
    double w = 1.0, dw = 0.0;
    for (int j = 0; j < 5; ++j) {
      if (j == i) continue;
      double term = 1.0;
      for (int l = 0; l < 5; ++l) {
        if (l == i || l == j) continue;
        term *= (u - l) / double(i - l);
      }
      dw += term / double(i - j);
      w *= (u - j) / double(i - j);
    }
    ax.w[size_t(i)] = w;
    ax.dw[size_t(i)] = dw;
  }
  return ax;
}

}  // namespace

double interpolate_quartic(const ScalarField4& f, const Point4& x) {
  const Grid4& g = f.grid;
  QuarticAxis ax[4];
  for (int d = 0; d < 4; ++d) ax[d] = quartic_axis(g, x[d], d);
  double acc = 0.0;
  for (int i0 = 0; i0 < 5; ++i0)
    for (int i1 = 0; i1 < 5; ++i1)
      for (int i2 = 0; i2 < 5; ++i2) {
        double w012 = ax[0].w[size_t(i0)] * ax[1].w[size_t(i1)] *
                      ax[2].w[size_t(i2)];
        size_t idx = g.index(ax[0].base + i0, ax[1].base + i1,
                             ax[2].base + i2, ax[3].base);
        for (int i3 = 0; i3 < 5; ++i3)
          acc += w012 * ax[3].w[size_t(i3)] * f.v[idx + size_t(i3)];
      }
  return acc;
}

Point4 interpolate_quartic_gradient(const ScalarField4& f, const Point4& x) {
  const Grid4& g = f.grid;
  QuarticAxis ax[4];
  for (int d = 0; d < 4; ++d) ax[d] = quartic_axis(g, x[d], d);
  Point4 grad{};
  for (int i0 = 0; i0 < 5; ++i0)
    for (int i1 = 0; i1 < 5; ++i1)
      for (int i2 = 0; i2 < 5; ++i2) {
        size_t idx = g.index(ax[0].base + i0, ax[1].base + i1,
                             ax[2].base + i2, ax[3].base);
        for (int i3 = 0; i3 < 5; ++i3) {
          double v = f.v[idx + size_t(i3)];
          double w0 = ax[0].w[size_t(i0)], w1 = ax[1].w[size_t(i1)],
                 w2 = ax[2].w[size_t(i2)], w3 = ax[3].w[size_t(i3)];
          grad[0] += ax[0].dw[size_t(i0)] * w1 * w2 * w3 * v;
          grad[1] += w0 * ax[1].dw[size_t(i1)] * w2 * w3 * v;
          grad[2] += w0 * w1 * ax[2].dw[size_t(i2)] * w3 * v;
          grad[3] += w0 * w1 * w2 * ax[3].dw[size_t(i3)] * v;
        }
      }
  for (int d = 0; d < 4; ++d) grad[d] /= g.h;
  return grad;
}

Point4 interpolate_gradient(const ScalarField4& f, const Point4& x) {
  CellLocator c = locate(f.grid, x, 1);
  Point4 grad{};
  const auto st = f.grid.strides();
  const double inv_2h = 0.5 / f.grid.h;
  for (int m = 0; m < 16; ++m) {
    double w = 1.0;
    std::array<int, 4> i = c.base;
    for (int d = 0; d < 4; ++d) {
      if (m >> d & 1) {
        w *= c.t[d];
        i[d] += 1;
      } else {
        w *= 1.0 - c.t[d];
      }
    }
    size_t idx = f.grid.index(i[0], i[1], i[2], i[3]);
    for (int d = 0; d < 4; ++d)
      grad[d] += w * (f.v[idx + st[d]] - f.v[idx - st[d]]) * inv_2h;
  }
  return grad;
}

}  // namespace bilap4
