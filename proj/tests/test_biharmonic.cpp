#include <cmath>
#include <numbers>
#include <random>

#include "bilap4/ansatz.hpp"
#include "bilap4/biharmonic.hpp"
#include "doctest.h"

using namespace bilap4;

namespace {
const Point4 kZero{0, 0, 0, 0};
const Point4 kOne{1, 1, 1, 1};
const Point4 kCenter{0.5, 0.5, 0.5, 0.5};

DomainMask unit_box(int across) {
  return build_domain_on(DomainSpec::box(kZero, kOne), across);
}
}  // namespace

TEST_CASE("homogeneous Navier problem gives zero") {
  DomainMask mask = unit_box(9);
  ScalarField4 z(mask.grid);
  NavierSolution sol = solve_navier(z, z, z, mask);
  for (double v : sol.u.v) CHECK(v == 0.0);
}

TEST_CASE("manufactured Delta^2 eigenfunction converges at order 2") {
  const double pi = std::numbers::pi;
  auto sine = [&](const Point4& x) {
    double s = 1.0;
    for (int d = 0; d < 4; ++d) s *= std::sin(pi * x[d]);
    return s;
  };
  double errs[2];
  int acrosses[2] = {9, 17};
  for (int t = 0; t < 2; ++t) {
    DomainMask mask = unit_box(acrosses[t]);
    ScalarField4 f(mask.grid), z(mask.grid);
    for (int32_t ii : mask.interior)
      f.v[size_t(ii)] = 16.0 * std::pow(pi, 4) * sine(mask.grid.coord(size_t(ii)));
    NavierSolution sol = solve_navier(f, z, z, mask, {1e-10, 0});
    double err = 0.0;
    for (int32_t ii : mask.interior)
      err = std::max(err, std::abs(sol.u.v[size_t(ii)] -
                                   sine(mask.grid.coord(size_t(ii)))));
    errs[t] = err;
  }
  double ratio = errs[0] / errs[1];
  CHECK(ratio > 3.2);
  CHECK(ratio < 4.8);
}

TEST_CASE("linear boundary data passes through the cascade") {
  DomainMask mask = unit_box(9);
  ScalarField4 z(mask.grid), g0(mask.grid);
  for (int32_t ii : mask.boundary)
    g0.v[size_t(ii)] = mask.grid.coord(size_t(ii))[0];
  NavierSolution sol = solve_navier(z, g0, z, mask, {1e-10, 0});
  for (int32_t ii : mask.interior)
    CHECK(sol.u.v[size_t(ii)] ==
          doctest::Approx(mask.grid.coord(size_t(ii))[0]).epsilon(1e-8));
}

TEST_CASE("regular part: source too close to the boundary is rejected") {
  DomainMask mask = unit_box(9);
  CHECK_THROWS_AS(regular_part({0.1, 0.5, 0.5, 0.5}, mask),
                  SourceTooCloseToBoundary);
}

TEST_CASE("regular part is translation covariant") {
  auto specA = DomainSpec::box(kZero, kOne);
  auto specB = DomainSpec::box({0.1, 0, 0, 0}, {1.1, 1, 1, 1});
  DomainMask maskA = build_domain_on(specA, 13);
  DomainMask maskB = build_domain_on(specB, 13);
  GreensEvaluation a = regular_part(kCenter, maskA, {1e-10, 0});
  GreensEvaluation b = regular_part({0.6, 0.5, 0.5, 0.5}, maskB, {1e-10, 0});
  CHECK(a.h_diag == doctest::Approx(b.h_diag).epsilon(1e-9));
}

TEST_CASE("G vanishes on the boundary and is symmetric") {
  DomainMask mask = unit_box(13);
  GreensEvaluation ge = regular_part(kCenter, mask, {1e-10, 0});
  // reconstructed G on boundary nodes
  double bmax = 0.0;
  for (int32_t ii : mask.boundary) {
    Point4 x = mask.grid.coord(size_t(ii));
    bmax = std::max(bmax, std::abs(-8.0 * std::log(dist(x, kCenter)) +
                                   ge.h_field.v[size_t(ii)]));
  }
  CHECK(bmax < 1e-7);

  Point4 a{0.375, 0.5, 0.5, 0.5}, b{0.625, 0.625, 0.5, 0.5};
  GreensEvaluation ga = regular_part(a, mask, {1e-10, 0});
  GreensEvaluation gb = regular_part(b, mask, {1e-10, 0});
  double gab = greens_value(ga, b), gba = greens_value(gb, a);
  double h2 = mask.grid.h * mask.grid.h;
  CHECK(std::abs(gab - gba) < 5.0 * h2 * std::max(1.0, std::abs(gab)));
}

TEST_CASE("reconstructed G is positive inside the unit box") {
  DomainMask mask = unit_box(13);
  GreensEvaluation ge = regular_part(kCenter, mask, {1e-10, 0});
  for (int32_t ii : mask.interior) {
    Point4 x = mask.grid.coord(size_t(ii));
    double r = dist(x, kCenter);
    if (r < mask.grid.h) continue;
    double g = -8.0 * std::log(r) + ge.h_field.v[size_t(ii)];
    CHECK(g > -1e-6);
  }
}

TEST_CASE("greens_value rejects near-coincident points") {
  DomainMask mask = unit_box(9);
  GreensEvaluation ge = regular_part(kCenter, mask);
  Point4 close = kCenter;
  close[0] += mask.grid.h / 8.0;
  CHECK_THROWS_AS(greens_value(ge, close), CoincidentPoints);
}

TEST_CASE("bubble laplacian formula matches the stencil and its r=0 value") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> Umu(0.5, 2.0), Ueps(0.05, 0.3);
  for (int t = 0; t < 5; ++t) {
    double mu = Umu(rng), eps = Ueps(rng);
    double a = mu * mu * eps * eps;
    CHECK(bubble_laplacian(0.0, mu, eps) == doctest::Approx(-32.0 / a));
    auto u = [&](const Point4& x) { return bubble(x, kZero, mu, eps, 1.0); };
    for (double rr : {0.3, 0.8, 1.7}) {
      Point4 x{rr * 0.6, rr * 0.8, 0.0, 0.0};
      double r2 = dist2(x, kZero);
      double err1 = 0.0, err2 = 0.0;
      for (int lev = 0; lev < 2; ++lev) {
        double h = 0.01 / (1 << lev);
        double e = std::abs(laplacian_pointwise(u, x, h) -
                            bubble_laplacian(r2, mu, eps));
        (lev == 0 ? err1 : err2) = e;
      }
      CHECK(err2 < err1);  // second-order shrink
      CHECK(err1 < 1e-2 * std::max(1.0, std::abs(bubble_laplacian(r2, mu, eps))));
    }
  }
}

TEST_CASE("boundary correction satisfies Aa6 at decreasing eps") {
  // H_j(x) - [H(x,xi) - 4 log mu(1+eps^2) + log k] = O(mu^2 eps^2)
  DomainMask mask = unit_box(13);
  GreensEvaluation ge = regular_part(kCenter, mask, {1e-10, 0});
  double mu = 1.0, kxi = 1.0;
  double sup[2];
  double epss[2] = {0.2, 0.1};
  for (int t = 0; t < 2; ++t) {
    double eps = epss[t];
    NavierSolution hj = boundary_correction(kCenter, mu, eps, kxi, mask, {1e-10, 0});
    double shift = -4.0 * std::log(mu * (1.0 + eps * eps)) + std::log(kxi);
    double s = 0.0;
    for (int32_t ii : mask.interior) {
      size_t i = size_t(ii);
      s = std::max(s, std::abs(hj.u.v[i] - (ge.h_field.v[i] + shift)));
    }
    sup[t] = s;
  }
  double ratio = sup[0] / sup[1];
  CHECK(ratio > 3.2);
  CHECK(ratio < 4.8);
  CHECK(sup[1] < 0.2);
}
