#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "bilap4/errors.hpp"

namespace bilap4 {

using Point4 = std::array<double, 4>;

inline double dist2(const Point4& a, const Point4& b) {
  double s = 0.0;
  for (int d = 0; d < 4; ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return s;
}
double dist(const Point4& a, const Point4& b);

/// Uniform isotropic 4D tensor grid. Node (i1,i2,i3,i4) sits at
/// origin + h*(i1,i2,i3,i4); the same expression is used everywhere so node
/// coordinates are bit-reproducible.
struct Grid4 {
  std::array<int, 4> n{};   // node count per axis, each >= 5
  double h = 0.0;           // spacing, identical on all axes
  Point4 origin{};          // coordinates of node (0,0,0,0)

  static Grid4 make(std::array<int, 4> n, double h, Point4 origin);

  /// Grid spanning [lo, hi] with `nodes_across` nodes along axis 0 plus
  /// `pad` layers of extra nodes on every side. The box extents must be
  /// integer multiples of the resulting h on every axis.
  static Grid4 covering(const Point4& lo, const Point4& hi, int nodes_across,
                        int pad = 1);

  size_t node_count() const {
    return size_t(n[0]) * size_t(n[1]) * size_t(n[2]) * size_t(n[3]);
  }
  std::array<size_t, 4> strides() const {
    size_t s3 = 1;
    size_t s2 = s3 * size_t(n[3]);
    size_t s1 = s2 * size_t(n[2]);
    size_t s0 = s1 * size_t(n[1]);
    return {s0, s1, s2, s3};
  }
  size_t index(int i1, int i2, int i3, int i4) const {
    return ((size_t(i1) * n[1] + i2) * n[2] + i3) * size_t(n[3]) + i4;
  }
  std::array<int, 4> unpack(size_t idx) const {
    std::array<int, 4> i;
    i[3] = int(idx % size_t(n[3]));
    idx /= size_t(n[3]);
    i[2] = int(idx % size_t(n[2]));
    idx /= size_t(n[2]);
    i[1] = int(idx % size_t(n[1]));
    i[0] = int(idx / size_t(n[1]));
    return i;
  }
  Point4 coord(const std::array<int, 4>& i) const {
    return {origin[0] + h * i[0], origin[1] + h * i[1], origin[2] + h * i[2],
            origin[3] + h * i[3]};
  }
  Point4 coord(size_t idx) const { return coord(unpack(idx)); }
  bool same_layout(const Grid4& o) const {
    return n == o.n && h == o.h && origin == o.origin;
  }
};

/// Real values on every node of a grid. The universal field carrier.
struct ScalarField4 {
  Grid4 grid;
  std::vector<double> v;

  ScalarField4() = default;
  explicit ScalarField4(const Grid4& g) : grid(g), v(g.node_count(), 0.0) {}

  double& operator[](size_t i) { return v[i]; }
  double operator[](size_t i) const { return v[i]; }
  size_t size() const { return v.size(); }
};

enum class NodeClass : uint8_t { Exterior = 0, Boundary = 1, Interior = 2 };

/// Grid-aligned domain: a box, optionally with a rectangular hole strictly
/// inside it (the hole realizes nontrivial topology).
struct DomainSpec {
  Point4 lo{}, hi{};
  bool has_hole = false;
  Point4 hole_lo{}, hole_hi{};

  static DomainSpec box(const Point4& lo, const Point4& hi);
  static DomainSpec box_with_hole(const Point4& lo, const Point4& hi,
                                  const Point4& hole_lo,
                                  const Point4& hole_hi);

  Point4 barycenter() const;
  /// Signed distance is not needed; this is the distance from an inside
  /// point to the nearest boundary face (outer or hole). Returns a negative
  /// number for points outside the domain.
  double distance_to_boundary(const Point4& x) const;
  bool inside(const Point4& x) const;
};

/// Per-node Interior / Boundary / Exterior classification of a domain.
class DomainMask {
 public:
  Grid4 grid;
  DomainSpec spec;
  std::vector<NodeClass> cls;
  std::vector<int32_t> interior;   // flat indices of Interior nodes
  std::vector<int32_t> boundary;   // flat indices of Boundary nodes

  NodeClass at(size_t idx) const { return cls[idx]; }
  bool is_interior(size_t idx) const { return cls[idx] == NodeClass::Interior; }
  size_t interior_count() const { return interior.size(); }
};

DomainMask build_domain(const DomainSpec& spec, const Grid4& grid);

/// Convenience: grid covering the spec's outer box (pad layer included) and
/// its mask, with `nodes_across` nodes spanning axis 0 of the box.
DomainMask build_domain_on(const DomainSpec& spec, int nodes_across);

/// Second-order 9-point discrete Laplacian on Interior nodes; zero elsewhere.
/// f must be defined on Interior and Boundary nodes.
ScalarField4 laplacian(const ScalarField4& f, const DomainMask& mask);

/// Node-weight quadrature over the domain: h^4 per Interior node, h^4/2 per
/// Boundary node.
double integrate(const ScalarField4& f, const DomainMask& mask);

struct RadialIntegral {
  double value = 0.0;
  double tail_estimate = 0.0;
};

/// 2*pi^2 * int_0^rmax r^3 g(r) dr by composite Simpson with `panels` panels
/// (|S^3| = 2*pi^2). The tail estimate assumes g decays like r^-8 or faster
/// past rmax, which covers every bubble-profile integrand used here.
RadialIntegral radial_integrate(const std::function<double(double)>& g,
                                double r_max, int panels);

/// Quadrilinear interpolation of a node field. x must lie inside the grid.
double interpolate(const ScalarField4& f, const Point4& x);

/// Gradient of the interpolated field: central differences of node values,
/// interpolated quadrilinearly at x. Requires one extra node layer around x.
Point4 interpolate_gradient(const ScalarField4& f, const Point4& x);

/// Fourth-order tensor-product Lagrange interpolation (5 nodes per axis).
/// The stencil window is kept one layer inside the grid, so x must be at
/// least 2h from the domain boundary for full accuracy.
double interpolate_quartic(const ScalarField4& f, const Point4& x);
Point4 interpolate_quartic_gradient(const ScalarField4& f, const Point4& x);

}  // namespace bilap4
