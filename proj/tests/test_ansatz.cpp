#include <cmath>
#include <numbers>
#include <random>

#include "bilap4/ansatz.hpp"
#include "doctest.h"

using namespace bilap4;

namespace {
const Point4 kZero{0, 0, 0, 0};
const Point4 kOne{1, 1, 1, 1};
const Point4 kCenter{0.5, 0.5, 0.5, 0.5};
const WeightFn kUnit = [](const Point4&) { return 1.0; };
constexpr double kPi = std::numbers::pi;

// Constant weight lifting mu to ~2.5 so bubble cores stay resolvable on the
// small grids unit tests can afford (mu scales like k^{1/4}).
constexpr double kBig = 16384.0;
const WeightFn kBigFn = [](const Point4&) { return kBig; };

DomainMask unit_box(int across) {
  return build_domain_on(DomainSpec::box(kZero, kOne), across);
}

AnsatzBundle center_bundle(const DomainMask& mask, GreensCache& cache,
                           double eps, BuildOptions opts = {}) {
  ConfigPoint cfg;
  cfg.xi = {kCenter};
  cfg.delta0 = 0.2;
  return build_ansatz(cfg, eps, cache, kBigFn, mask, {1e-10, 0}, opts);
}
}  // namespace

TEST_CASE("eps-rho coupling") {
  EpsRho a = EpsRho::from_eps(1.0 - 1e-9);
  CHECK(a.rho4() == doctest::Approx(384.0 / 16.0).epsilon(1e-6));
  EpsRho b = EpsRho::from_eps(0.1);
  CHECK(b.rho4() == doctest::Approx(384e-4 / std::pow(1.01, 4)).epsilon(1e-12));
  EpsRho c = EpsRho::from_eps(1e-6);
  CHECK(c.rho4() / std::pow(1e-6, 4) == doctest::Approx(384.0).epsilon(1e-9));
  CHECK_THROWS_AS(EpsRho::from_eps(0.0), EpsOutOfRange);
  CHECK_THROWS_AS(EpsRho::from_eps(1.5), EpsOutOfRange);
}

TEST_CASE("bubble center value and far field") {
  double eps = 0.2;
  CHECK(bubble(kZero, kZero, 1.0, eps, 1.0) ==
        doctest::Approx(4.0 * std::log((1.0 + eps * eps) / (eps * eps))));
  // u_j + 8 log r - 4 log mu(1+eps^2) + log k -> 0 like mu^2 eps^2 / r^2
  double mu = 1.3, kx = 2.0;
  for (double r : {5.0, 10.0, 20.0}) {
    Point4 x{r, 0, 0, 0};
    double v = bubble(x, kZero, mu, eps, kx) + 8.0 * std::log(r) -
               4.0 * std::log(mu * (1.0 + eps * eps)) + std::log(kx);
    CHECK(std::abs(v) < 4.5 * mu * mu * eps * eps / (r * r));
  }
}

TEST_CASE("bubble solves its PDE to stencil accuracy") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> Umu(0.5, 2.0), Ueps(0.05, 0.3);
  for (int t = 0; t < 4; ++t) {
    double mu = Umu(rng), eps = Ueps(rng);
    EpsRho er = EpsRho::from_eps(eps);
    double a = mu * mu * eps * eps;
    auto u = [&](const Point4& x) { return bubble(x, kZero, mu, eps, 1.0); };
    for (double rr : {0.0, 0.5, 1.2}) {
      Point4 x{rr, 0.0, 0.0, 0.0};
      double rhs = er.rho4() * std::exp(u(x));
      // Stencil spacing tied to the local curvature length sqrt(a + r^2);
      // the relative truncation error then drops 4x per halving.
      double scale = std::sqrt(a + rr * rr);
      double e0 = std::abs(bilaplacian_pointwise(u, x, 0.10 * scale) - rhs);
      double e1 = std::abs(bilaplacian_pointwise(u, x, 0.05 * scale) - rhs);
      if (rr == 0.0) CHECK(e0 / rhs < 0.05);  // relative accuracy at the peak
      double ratio = e0 / e1;
      CHECK(ratio > 3.0);
      CHECK(ratio < 5.0);
    }
  }
}

TEST_CASE("ansatz reassembles and satisfies the boundary conditions") {
  DomainMask mask = unit_box(17);
  GreensCache cache(mask, {1e-10, 0});
  AnsatzBundle b = center_bundle(mask, cache, 0.12);

  for (int32_t ii : mask.boundary) {
    CHECK(b.U.v[size_t(ii)] == 0.0);      // exact by construction
    CHECK(b.lap_U.v[size_t(ii)] == 0.0);
  }
  // reassembly: U == sum_j (u_j + H_j) bit-for-bit
  for (int32_t ii : mask.interior) {
    size_t i = size_t(ii);
    Point4 x = mask.grid.coord(i);
    double s = 0.0;
    for (int j = 0; j < b.cfg.m(); ++j)
      s += bubble(x, b.cfg.xi[size_t(j)], b.cfg.mu[size_t(j)], b.er.eps,
                  b.k_at_xi[size_t(j)]) +
           b.H_j[size_t(j)].v[i];
    CHECK(b.U.v[i] == s);
  }
  CHECK(b.aa8_sup < 6.0);
}

TEST_CASE("core resolution rule gates the build") {
  DomainMask mask = unit_box(9);
  GreensCache cache(mask);
  ConfigPoint cfg;
  cfg.xi = {kCenter};
  cfg.delta0 = 0.1;
  CHECK_THROWS_AS(build_ansatz(cfg, 0.05, cache, kUnit, mask), CoreUnderResolved);
  BuildOptions relaxed;
  relaxed.enforce_core_resolution = false;
  AnsatzBundle b = build_ansatz(cfg, 0.05, cache, kUnit, mask, {}, relaxed);
  CHECK(b.cfg.mu[0] > 0.0);
  CHECK(b.cfg.mu[0] * 0.05 < 4.0 * mask.grid.h);  // indeed under-resolved
}

TEST_CASE("star norm: weight itself, zero field, norm axioms") {
  DomainMask mask = unit_box(9);
  ConfigPoint cfg;
  cfg.xi = {kCenter};
  double eps = 0.3;
  ScalarField4 w(mask.grid), zero(mask.grid);
  for (int32_t ii : mask.interior) {
    size_t i = size_t(ii);
    w.v[i] = star_weight_at(mask.grid.coord(i), cfg, eps);
  }
  CHECK(star_norm(w, cfg, eps, mask) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(star_norm(zero, cfg, eps, mask) == 0.0);

  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> U(-1, 1);
  ScalarField4 f(mask.grid), g(mask.grid), fg(mask.grid);
  for (int32_t ii : mask.interior) {
    size_t i = size_t(ii);
    f.v[i] = U(rng);
    g.v[i] = U(rng);
    fg.v[i] = f.v[i] + g.v[i];
  }
  double nf = star_norm(f, cfg, eps, mask), ng = star_norm(g, cfg, eps, mask);
  CHECK(star_norm(fg, cfg, eps, mask) <= nf + ng + 1e-12);
  ScalarField4 sf(mask.grid);
  for (int32_t ii : mask.interior) sf.v[size_t(ii)] = -2.5 * f.v[size_t(ii)];
  CHECK(star_norm(sf, cfg, eps, mask) == doctest::Approx(2.5 * nf).epsilon(1e-12));
}

TEST_CASE("residual star norm is finite and eps-scale") {
  DomainMask mask = unit_box(17);
  GreensCache cache(mask, {1e-10, 0});
  AnsatzBundle b = center_bundle(mask, cache, 0.12);
  ResidualReport rep = residual(b, mask, kBigFn);
  CHECK(rep.star_norm > 0.0);
  CHECK(rep.star_norm < 0.3 * 384.0 * std::pow(b.cfg.mu[0], 4));
}

TEST_CASE("kernel functions: values, bounds, annihilation") {
  double mu = 1.2;
  CHECK(kernel_y(0, mu, kZero) == -4.0);
  Point4 far{100.0, 0, 0, 0};
  CHECK(kernel_y(0, mu, far) == doctest::Approx(4.0).epsilon(1e-3));
  CHECK_THROWS_AS(kernel_y(5, mu, kZero), BadIndex);
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> U(-3, 3);
  for (int t = 0; t < 50; ++t) {
    Point4 z{U(rng), U(rng), U(rng), U(rng)};
    CHECK(std::abs(kernel_y(0, mu, z)) <= 4.0 + 1e-12);
    for (int i = 1; i <= 4; ++i)
      CHECK(std::abs(kernel_y(i, mu, z)) <= 4.0 / mu + 1e-12);
  }

  // L_j Y_i = 0: discrete residual shrinks at order 2
  auto W = [&](const Point4& z) {
    double z2 = dist2(z, kZero);
    double d = mu * mu + z2;
    return 384.0 * std::pow(mu, 4) / (d * d * d * d);
  };
  for (int i = 0; i <= 4; ++i) {
    auto y = [&](const Point4& z) { return kernel_y(i, mu, z); };
    Point4 probe{0.7 * mu, -0.3 * mu, 0.2 * mu, 0.5 * mu};
    double errs[2];
    for (int lev = 0; lev < 2; ++lev) {
      double h = 0.05 * mu / (1 << lev);
      errs[lev] =
          std::abs(bilaplacian_pointwise(y, probe, h) - W(probe) * y(probe));
    }
    double ratio = errs[0] / errs[1];
    CHECK(ratio > 3.0);
    CHECK(ratio < 5.0);
  }
}

TEST_CASE("apply_linearized is linear and psi=0 maps to 0") {
  DomainMask mask = unit_box(13);
  GreensCache cache(mask, {1e-10, 0});
  AnsatzBundle b = center_bundle(mask, cache, 0.16);
  ScalarField4 zero(mask.grid);
  ScalarField4 r0 = apply_linearized(b, mask, kBigFn, zero);
  for (double v : r0.v) CHECK(v == 0.0);

  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> U(-1, 1);
  ScalarField4 f(mask.grid), g(mask.grid), comb(mask.grid);
  for (int32_t ii : mask.interior) {
    size_t i = size_t(ii);
    f.v[i] = U(rng);
    g.v[i] = U(rng);
    comb.v[i] = 1.5 * f.v[i] - 0.5 * g.v[i];
  }
  ScalarField4 lf = apply_linearized(b, mask, kBigFn, f);
  ScalarField4 lg = apply_linearized(b, mask, kBigFn, g);
  ScalarField4 lc = apply_linearized(b, mask, kBigFn, comb);
  for (int32_t ii : mask.interior) {
    size_t i = size_t(ii);
    CHECK(lc.v[i] ==
          doctest::Approx(1.5 * lf.v[i] - 0.5 * lg.v[i]).epsilon(1e-9));
  }
}

TEST_CASE("nonlinearity: zero, quadratic scaling, convexity sign") {
  DomainMask mask = unit_box(13);
  GreensCache cache(mask, {1e-10, 0});
  AnsatzBundle b = center_bundle(mask, cache, 0.16);
  ScalarField4 zero(mask.grid);
  for (double v : nonlinearity(b, mask, kBigFn, zero).v) CHECK(v == 0.0);

  ScalarField4 W = linear_weight(b, mask, kBigFn);
  double norms[3];
  int t = 0;
  for (double c : {1e-1, 1e-2, 1e-3}) {
    ScalarField4 psi(mask.grid);
    for (int32_t ii : mask.interior) psi.v[size_t(ii)] = c;
    ScalarField4 n = nonlinearity(b, mask, kBigFn, psi);
    double sup = 0.0, expect = 0.0;
    for (int32_t ii : mask.interior) {
      sup = std::max(sup, std::abs(n.v[size_t(ii)]));
      expect = std::max(expect, std::abs(W.v[size_t(ii)]) * c * c / 2.0);
    }
    CHECK(sup == doctest::Approx(expect).epsilon(0.15));
    norms[t++] = sup;
  }
  CHECK(norms[0] / norms[1] == doctest::Approx(100.0).epsilon(0.15));

  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> U(-2, 2);
  ScalarField4 psi(mask.grid);
  for (int32_t ii : mask.interior) psi.v[size_t(ii)] = -std::abs(U(rng));
  ScalarField4 n = nonlinearity(b, mask, kBigFn, psi);
  for (int32_t ii : mask.interior) CHECK(n.v[size_t(ii)] >= -1e-12);

  ScalarField4 big(mask.grid);
  for (int32_t ii : mask.interior) big.v[size_t(ii)] = 600.0;
  CHECK_THROWS_AS(nonlinearity(b, mask, kBigFn, big), OverflowGuard);
}

TEST_CASE("linear weight near the bubble center") {
  DomainMask mask = unit_box(17);
  GreensCache cache(mask, {1e-10, 0});
  AnsatzBundle b = center_bundle(mask, cache, 0.12);
  double mu = b.cfg.mu[0];
  double w0 = linear_weight_at(b, kBigFn, kCenter);
  // W(xi) = 384/mu^4 * exp(O(mu^2 eps^2)); check the log-scale deviation
  double dev = std::abs(std::log(w0 * std::pow(mu, 4) / 384.0));
  CHECK(dev < 15.0 * mu * mu * b.er.eps * b.er.eps);
}

TEST_CASE("energy: closed forms and monotonicity in rho") {
  DomainMask mask = unit_box(13);
  ScalarField4 zero(mask.grid);
  double rho = 0.7;
  double vol = integrate([&] {
    ScalarField4 one(mask.grid);
    for (auto& v : one.v) v = 1.0;
    return one;
  }(), mask);
  CHECK(energy(zero, rho, kUnit, mask) ==
        doctest::Approx(-std::pow(rho, 4) * vol).epsilon(1e-12));
  CHECK(energy(zero, 0.0, kUnit, mask) == 0.0);
  CHECK(energy(zero, 0.8, kUnit, mask) < energy(zero, 0.7, kUnit, mask));
}

TEST_CASE("energy expansion reference value and m-linearity") {
  double ref = energy_expansion_reference(1, 0.1, 0.0);
  CHECK(ref == doctest::Approx(-512.0 / 3.0 * kPi * kPi +
                               256.0 * kPi * kPi * std::log(10.0))
                   .epsilon(1e-12));
  CHECK(ref == doctest::Approx(4133.3).epsilon(1e-4));
  double r1 = energy_expansion_reference(1, 0.2, 0.0);
  double r3 = energy_expansion_reference(3, 0.2, 0.0);
  CHECK(r3 == doctest::Approx(3.0 * r1).epsilon(1e-12));
}
