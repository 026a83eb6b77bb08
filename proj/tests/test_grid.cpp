#include <cmath>
#include <numbers>
#include <random>

#include "bilap4/grid.hpp"
#include "doctest.h"

using namespace bilap4;

namespace {
const Point4 kZero{0, 0, 0, 0};
const Point4 kOne{1, 1, 1, 1};

DomainMask unit_box(int across) {
  return build_domain_on(DomainSpec::box(kZero, kOne), across);
}
}  // namespace

TEST_CASE("unit box on 17-across grid has 15^4 interior nodes") {
  DomainMask mask = unit_box(17);
  CHECK(mask.interior.size() == 50625);  // 15^4
  // boundary of a 17^4 closed box grid
  CHECK(mask.boundary.size() == 83521 - 50625);  // 17^4 - 15^4
}

TEST_CASE("box with hole: hole surface is boundary, strict inside exterior") {
  auto spec = DomainSpec::box_with_hole(kZero, kOne, {0.375, 0.375, 0.375, 0.375},
                                        {0.625, 0.625, 0.625, 0.625});
  DomainMask mask = build_domain_on(spec, 17);
  // Interior nodes: strictly inside the outer box and strictly outside the
  // closed hole, enumerated independently.
  size_t expect = 0;
  for (int i1 = 1; i1 <= 15; ++i1)
    for (int i2 = 1; i2 <= 15; ++i2)
      for (int i3 = 1; i3 <= 15; ++i3)
        for (int i4 = 1; i4 <= 15; ++i4) {
          bool in_closed_hole = i1 >= 6 && i1 <= 10 && i2 >= 6 && i2 <= 10 &&
                                i3 >= 6 && i3 <= 10 && i4 >= 6 && i4 <= 10;
          if (!in_closed_hole) ++expect;
        }
  CHECK(mask.interior.size() == expect);
  CHECK(expect == 50625 - 625);  // 15^4 - 5^4

  // every interior node has axis neighbors that are interior or boundary
  auto st = mask.grid.strides();
  for (int32_t ii : mask.interior) {
    for (int d = 0; d < 4; ++d) {
      CHECK(mask.cls[size_t(ii) + st[d]] != NodeClass::Exterior);
      CHECK(mask.cls[size_t(ii) - st[d]] != NodeClass::Exterior);
    }
  }
}

TEST_CASE("hole touching the outer face is rejected") {
  CHECK_THROWS_AS(build_domain_on(
                      DomainSpec::box_with_hole(kZero, kOne, {0.0625, 0.375, 0.375, 0.375},
                                                {0.625, 0.625, 0.625, 0.625}),
                      17),
                  SpecOutOfGrid);
  CHECK_THROWS_AS(DomainSpec::box_with_hole(kZero, kOne, {0.0, 0.375, 0.375, 0.375},
                                            {0.625, 0.625, 0.625, 0.625}),
                  InvalidDomainSpec);
}

TEST_CASE("box exceeding the grid is rejected") {
  Grid4 g = Grid4::covering(kZero, kOne, 9);
  CHECK_THROWS_AS(build_domain(DomainSpec::box({-0.5, 0, 0, 0}, kOne), g),
                  Error);
}

TEST_CASE("laplacian of |x|^2 is 8 on every interior node") {
  DomainMask mask = unit_box(9);
  ScalarField4 f(mask.grid);
  for (size_t i = 0; i < f.size(); ++i) {
    Point4 x = mask.grid.coord(i);
    f.v[i] = dist2(x, kZero);
  }
  ScalarField4 lf = laplacian(f, mask);
  for (int32_t ii : mask.interior)
    CHECK(lf.v[size_t(ii)] == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("laplacian of a constant vanishes") {
  DomainMask mask = unit_box(9);
  ScalarField4 f(mask.grid);
  for (auto& v : f.v) v = 3.7;
  ScalarField4 lf = laplacian(f, mask);
  for (int32_t ii : mask.interior)
    CHECK(std::abs(lf.v[size_t(ii)]) < 1e-10);
}

TEST_CASE("laplacian is linear and second-order accurate") {
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
    ScalarField4 f(mask.grid);
    for (size_t i = 0; i < f.size(); ++i) f.v[i] = sine(mask.grid.coord(i));
    ScalarField4 lf = laplacian(f, mask);
    double err = 0.0;
    for (int32_t ii : mask.interior)
      err = std::max(err, std::abs(lf.v[size_t(ii)] +
                                   4.0 * pi * pi * sine(mask.grid.coord(size_t(ii)))));
    errs[t] = err;
  }
  double ratio = errs[0] / errs[1];
  CHECK(ratio > 3.2);
  CHECK(ratio < 4.8);

  // linearity to machine precision
  DomainMask mask = unit_box(9);
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> U(-1, 1);
  ScalarField4 f(mask.grid), g(mask.grid), sum(mask.grid);
  for (size_t i = 0; i < f.size(); ++i) {
    f.v[i] = U(rng);
    g.v[i] = U(rng);
    sum.v[i] = 2.0 * f.v[i] - 3.0 * g.v[i];
  }
  ScalarField4 lf = laplacian(f, mask), lg = laplacian(g, mask),
               ls = laplacian(sum, mask);
  for (int32_t ii : mask.interior) {
    size_t i = size_t(ii);
    CHECK(ls.v[i] ==
          doctest::Approx(2.0 * lf.v[i] - 3.0 * lg.v[i]).epsilon(1e-12));
  }
}

TEST_CASE("integrate: constants, zero, linear") {
  DomainMask mask = unit_box(17);
  ScalarField4 one(mask.grid), zero(mask.grid), lin(mask.grid);
  for (size_t i = 0; i < one.size(); ++i) {
    one.v[i] = 1.0;
    lin.v[i] = mask.grid.coord(i)[0];
  }
  CHECK(integrate(one, mask) == doctest::Approx(1.0).epsilon(0.07));
  CHECK(integrate(zero, mask) == 0.0);
  CHECK(integrate(lin, mask) == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("integrate is monotone") {
  DomainMask mask = unit_box(9);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0, 1);
  ScalarField4 f(mask.grid), g(mask.grid);
  for (size_t i = 0; i < f.size(); ++i) {
    f.v[i] = U(rng);
    g.v[i] = f.v[i] + U(rng);
  }
  CHECK(integrate(f, mask) <= integrate(g, mask));
}

TEST_CASE("radial_integrate reproduces the two bubble constants") {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  auto g1 = [](double r) { return std::pow(1.0 + r * r, -4.0); };
  auto g2 = [](double r) {
    return std::log(1.0 + r * r) * std::pow(1.0 + r * r, -4.0);
  };
  RadialIntegral i1 = radial_integrate(g1, 1e3, 1 << 16);
  RadialIntegral i2 = radial_integrate(g2, 1e3, 1 << 16);
  CHECK(std::abs(i1.value - pi2 / 6.0) / (pi2 / 6.0) < 1e-6);
  // closed form: 2 pi^2 * (1/2)(1/4 - 1/9) = 5 pi^2 / 36
  CHECK(std::abs(i2.value - 5.0 * pi2 / 36.0) / (5.0 * pi2 / 36.0) < 1e-6);
  CHECK(radial_integrate([](double) { return 0.0; }, 10.0, 64).value == 0.0);
  CHECK_THROWS_AS(
      radial_integrate([](double r) { return 1.0 / (r - 0.5); }, 1.0, 64),
      NonfiniteIntegrand);
}

TEST_CASE("quadrilinear interpolation is exact on multilinear functions") {
  DomainMask mask = unit_box(9);
  ScalarField4 f(mask.grid);
  auto fn = [](const Point4& x) {
    return 1.0 + 2 * x[0] - x[1] + 0.5 * x[2] * x[3] + x[0] * x[1] * x[2] * x[3];
  };
  for (size_t i = 0; i < f.size(); ++i) f.v[i] = fn(mask.grid.coord(i));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.1, 0.9);
  for (int t = 0; t < 20; ++t) {
    Point4 x{U(rng), U(rng), U(rng), U(rng)};
    CHECK(interpolate(f, x) == doctest::Approx(fn(x)).epsilon(1e-12));
  }
}

TEST_CASE("node coordinates reproduce exactly") {
  Grid4 g = Grid4::covering(kZero, kOne, 17);
  for (int t = 0; t < 10; ++t) {
    auto a = g.coord(g.index(3, 5, 7, 11));
    auto b = g.coord(g.index(3, 5, 7, 11));
    CHECK(a == b);
  }
  CHECK(g.coord(g.index(1, 1, 1, 1))[0] == doctest::Approx(0.0).epsilon(1e-15));
}
