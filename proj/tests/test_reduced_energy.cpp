#include <cmath>
#include <random>

#include "bilap4/reduced_energy.hpp"
#include "doctest.h"

using namespace bilap4;

namespace {
const Point4 kZero{0, 0, 0, 0};
const Point4 kOne{1, 1, 1, 1};
const Point4 kCenter{0.5, 0.5, 0.5, 0.5};
const WeightFn kUnit = [](const Point4&) { return 1.0; };

DomainMask unit_box(int across) {
  return build_domain_on(DomainSpec::box(kZero, kOne), across);
}

ConfigPoint single(const Point4& p, double delta0 = 0.1) {
  ConfigPoint c;
  c.xi = {p};
  c.delta0 = delta0;
  return c;
}
}  // namespace

TEST_CASE("admissibility gate") {
  auto spec = DomainSpec::box(kZero, kOne);
  CHECK(check_admissible(single(kCenter), spec));
  CHECK(!check_admissible(single({0.15, 0.5, 0.5, 0.5}), spec));
  ConfigPoint pair;
  pair.xi = {{0.45, 0.5, 0.5, 0.5}, {0.55, 0.5, 0.5, 0.5}};
  pair.delta0 = 0.1;
  CHECK(!check_admissible(pair, spec));  // separation 0.1 < 0.2
  pair.xi = {{0.3, 0.5, 0.5, 0.5}, {0.7, 0.5, 0.5, 0.5}};
  CHECK(check_admissible(pair, spec));
}

TEST_CASE("phi_1 = -H(xi,xi) for k == 1 and mu matches the rule") {
  DomainMask mask = unit_box(13);
  GreensCache cache(mask, {1e-10, 0});
  ConfigPoint cfg = single(kCenter);
  double phi = phi_m(cfg, cache, kUnit);
  const GreensEvaluation& ge = cache.get(kCenter);
  CHECK(phi == doctest::Approx(-ge.h_diag).epsilon(1e-14));
  auto mu = mu_from_xi(cfg, cache, kUnit);
  CHECK(mu.size() == 1);
  CHECK(mu[0] == doctest::Approx(std::exp(ge.h_diag / 4.0)).epsilon(1e-14));
}

TEST_CASE("constant rescaling of k shifts phi and scales mu") {
  DomainMask mask = unit_box(13);
  GreensCache cache(mask, {1e-10, 0});
  ConfigPoint cfg;
  cfg.xi = {{0.35, 0.4, 0.5, 0.5}, {0.65, 0.6, 0.5, 0.5}};
  cfg.delta0 = 0.1;
  const double c = 3.0;
  WeightFn kc = [&](const Point4&) { return c; };
  double p1 = phi_m(cfg, cache, kUnit);
  double pc = phi_m(cfg, cache, kc);
  CHECK(pc == doctest::Approx(p1 - 2.0 * cfg.m() * std::log(c)).epsilon(1e-12));
  auto mu1 = mu_from_xi(cfg, cache, kUnit);
  auto muc = mu_from_xi(cfg, cache, kc);
  for (int j = 0; j < cfg.m(); ++j)
    CHECK(muc[size_t(j)] ==
          doctest::Approx(mu1[size_t(j)] * std::pow(c, 0.25)).epsilon(1e-12));
  // gradient unchanged under the rescaling
  auto g1 = grad_phi_m(cfg, cache, kUnit, GradMethod::SymmetryField);
  auto gc = grad_phi_m(cfg, cache, kc, GradMethod::SymmetryField);
  for (size_t i = 0; i < g1.size(); ++i)
    CHECK(gc[i] == doctest::Approx(g1[i]).epsilon(1e-10));
}

TEST_CASE("exchange symmetry is exact") {
  DomainMask mask = unit_box(13);
  GreensCache cache(mask, {1e-10, 0});
  ConfigPoint a, b;
  a.xi = {{0.3, 0.45, 0.5, 0.55}, {0.7, 0.55, 0.5, 0.45}};
  b.xi = {a.xi[1], a.xi[0]};
  a.delta0 = b.delta0 = 0.1;
  CHECK(phi_m(a, cache, kUnit) == phi_m(b, cache, kUnit));
}

TEST_CASE("colliding points are rejected") {
  DomainMask mask = unit_box(9);
  GreensCache cache(mask);
  ConfigPoint cfg;
  cfg.xi = {{0.5, 0.5, 0.5, 0.5}, {0.5, 0.5, 0.5, 0.5 + mask.grid.h / 2}};
  CHECK_THROWS_AS(phi_m(cfg, cache, kUnit), CollidingPoints);
}

TEST_CASE("nonpositive weight is rejected") {
  DomainMask mask = unit_box(9);
  GreensCache cache(mask);
  WeightFn bad = [](const Point4& x) { return x[0] - 2.0; };
  CHECK_THROWS_AS(phi_m(single(kCenter), cache, bad), NonpositiveWeight);
}

TEST_CASE("gradient vanishes at the box center and methods agree") {
  DomainMask mask = unit_box(13);
  GreensCache cache(mask, {1e-10, 0});
  ConfigPoint cfg = single(kCenter);
  auto gs = grad_phi_m(cfg, cache, kUnit, GradMethod::SymmetryField);
  double n2 = 0.0;
  for (double v : gs) n2 += v * v;
  CHECK(std::sqrt(n2) < 0.05);

  ConfigPoint off = single({0.4, 0.55, 0.5, 0.45});
  auto a = grad_phi_m(off, cache, kUnit, GradMethod::SymmetryField);
  auto b = grad_phi_m(off, cache, kUnit, GradMethod::CentralFD);
  for (size_t i = 0; i < a.size(); ++i)
    CHECK(a[i] == doctest::Approx(b[i]).epsilon(0.15).scale(1.0));
}

TEST_CASE("gradient reflects under a box reflection") {
  DomainMask mask = unit_box(13);
  GreensCache cache(mask, {1e-10, 0});
  Point4 p{0.4, 0.55, 0.5, 0.5};
  Point4 pr{0.6, 0.55, 0.5, 0.5};  // reflected across x1 = 1/2
  auto g = grad_phi_m(single(p), cache, kUnit, GradMethod::SymmetryField);
  auto gr = grad_phi_m(single(pr), cache, kUnit, GradMethod::SymmetryField);
  CHECK(g[0] == doctest::Approx(-gr[0]).epsilon(1e-5).scale(1.0));
  for (int d = 1; d < 4; ++d)
    CHECK(g[d] == doctest::Approx(gr[d]).epsilon(1e-5).scale(1.0));
}

TEST_CASE("find_critical reaches the box center") {
  DomainMask mask = unit_box(13);
  GreensCache cache(mask, {1e-10, 0});
  ConfigPoint start = single({0.38, 0.58, 0.45, 0.6});
  auto rep = find_critical(start, SearchMode::Minimize, 0.05, 200, cache, kUnit);
  CHECK(rep.reason == Termination::Converged);
  CHECK(dist(rep.final_cfg.xi[0], kCenter) < 2.0 * mask.grid.h);
  CHECK(rep.grad_norm <= 0.05);
}

TEST_CASE("find_critical rejects inadmissible starts") {
  DomainMask mask = unit_box(9);
  GreensCache cache(mask);
  CHECK_THROWS_AS(find_critical(single({0.12, 0.5, 0.5, 0.5}),
                                SearchMode::Minimize, 1e-3, 10, cache, kUnit),
                  NotAdmissible);
}

TEST_CASE("Psi_k dilation derivative is -8k(k-1)") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> U(-2, 2);
  for (int k : {2, 3, 5}) {
    for (int t = 0; t < 100; ++t) {
      auto pts = std::vector<Point4>(size_t(k));
      for (auto& p : pts) p = {U(rng), U(rng), U(rng), U(rng) + 3.0};
      auto res = psi_k_scaling(pts);
      double expect = -8.0 * k * (k - 1);
      CHECK(std::abs(res.lambda_derivative - expect) <=
            1e-10 * std::abs(expect));
    }
  }
  // value is symmetric under swapping a pair
  std::vector<Point4> pts = {{0, 0, 0, 1}, {1, 0, 0, 2}};
  std::vector<Point4> swapped = {pts[1], pts[0]};
  CHECK(psi_k_scaling(pts).value == psi_k_scaling(swapped).value);
  std::vector<Point4> dup = {pts[0], pts[0]};
  CHECK_THROWS_AS(psi_k_scaling(dup), DuplicatePoints);
}

TEST_CASE("half-space energy dilation derivative is -8k") {
  // The self terms are the only lambda-dependent part, so the identity is
  // -8k; at k = 2 this coincides with -8k(k-1) = -16.
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> U(-2, 2), Up(0.2, 3.0);
  for (int k : {1, 2, 3, 5}) {
    for (int t = 0; t < 100; ++t) {
      auto pts = std::vector<Point4>(size_t(k));
      for (auto& p : pts) p = {U(rng), U(rng), U(rng), Up(rng)};
      auto res = phi_halfspace_scaling(pts);
      double expect = -8.0 * k;
      CHECK(std::abs(res.lambda_derivative - expect) <=
            1e-10 * std::abs(expect));
    }
  }
  // k = 1 closed form: phi = -8 log(2t)
  std::vector<Point4> one = {{0, 0, 0, 0.7}};
  CHECK(phi_halfspace_scaling(one).value ==
        doctest::Approx(-8.0 * std::log(1.4)).epsilon(1e-14));
  std::vector<Point4> wall = {{0, 0, 0, 0.0}};
  CHECK_THROWS_AS(phi_halfspace_scaling(wall), PointOnWall);
}

TEST_CASE("numerical check of the half-space dilation derivative") {
  // Independent oracle: central difference of phi(lambda x) in lambda.
  std::vector<Point4> pts = {{0.3, -0.2, 0.1, 0.8}, {1.0, 0.4, -0.5, 1.5},
                             {-0.7, 0.9, 0.2, 0.4}};
  auto scale = [&](double lam) {
    std::vector<Point4> q = pts;
    for (auto& p : q)
      for (int d = 0; d < 4; ++d) p[d] *= lam;
    return phi_halfspace_scaling(q).value;
  };
  double dl = 1e-6;
  double fd = (scale(1.0 + dl) - scale(1.0 - dl)) / (2.0 * dl);
  auto res = phi_halfspace_scaling(pts);
  CHECK(fd == doctest::Approx(res.lambda_derivative).epsilon(1e-6));
  CHECK(fd == doctest::Approx(-24.0).epsilon(1e-6));  // -8k at k=3
}

TEST_CASE("box-with-hole phi_2 landscape has an interior basin across the hole") {
  auto spec = DomainSpec::box_with_hole({0, 0, 0, 0}, {1, 1, 1, 1},
                                        {0.375, 0.375, 0.375, 0.375},
                                        {0.625, 0.625, 0.625, 0.625});
  DomainMask mask = build_domain_on(spec, 25);
  GreensCache cache(mask, {1e-9, 0});

  // Independent oracle: phi_2 on a coarse line of symmetric pairs across the
  // hole has an interior local minimum (not attained at either end).
  std::vector<double> ts = {0.24, 0.27, 0.30, 0.33, 0.36, 0.38};
  std::vector<double> phis;
  for (double t : ts) {
    ConfigPoint c;
    c.delta0 = 0.05;
    c.xi = {{0.5 - t, 0.5, 0.5, 0.5}, {0.5 + t, 0.5, 0.5, 0.5}};
    REQUIRE(check_admissible(c, spec));
    phis.push_back(phi_m(c, cache, kUnit));
  }
  size_t argmin = 0;
  for (size_t i = 1; i < phis.size(); ++i)
    if (phis[i] < phis[argmin]) argmin = i;
  CHECK(argmin > 0);
  CHECK(argmin < phis.size() - 1);

  // Search from an antipodal start converges to an interior configuration
  // with the two points on opposite sides of the hole.
  ConfigPoint start;
  start.delta0 = 0.05;
  start.xi = {{0.2, 0.48, 0.5, 0.52}, {0.8, 0.52, 0.5, 0.48}};
  auto rep = find_critical(start, SearchMode::Minimize, 0.5, 120, cache, kUnit);
  CHECK(rep.final_cfg.xi[0][0] < 0.375);
  CHECK(rep.final_cfg.xi[1][0] > 0.625);
  for (const auto& p : rep.final_cfg.xi)
    CHECK(spec.distance_to_boundary(p) >= 2.0 * start.delta0 - 1e-9);
}
