#include "bilap4/verify.hpp"

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "bilap4/kexpr.hpp"
#include "bilap4/par.hpp"
#include "bilap4/solver.hpp"

namespace bilap4 {

namespace {

constexpr double kPi = std::numbers::pi;
const Point4 kZero{0, 0, 0, 0};
const Point4 kOne{1, 1, 1, 1};
const Point4 kCenter{0.5, 0.5, 0.5, 0.5};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  size_t n = x.size();
  for (size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double loglog_slope(const std::vector<double>& eps,
                    const std::vector<double>& val) {
  std::vector<double> lx, ly;
  for (size_t i = 0; i < eps.size(); ++i) {
    lx.push_back(std::log(eps[i]));
    ly.push_back(std::log(val[i]));
  }
  return lsq_slope(lx, ly);
}

DomainMask unit_box(int across) {
  return build_domain_on(DomainSpec::box(kZero, kOne), across);
}

// ---------------------------------------------------------------- criterion 1
CriterionResult criterion1(const VerifyOptions&) {
  CriterionResult r{1, "analytic radial constants", false, ""};
  auto g1 = [](double s) { return std::pow(1.0 + s * s, -4.0); };
  auto g2 = [](double s) {
    return std::log(1.0 + s * s) * std::pow(1.0 + s * s, -4.0);
  };
  double v1 = radial_integrate(g1, 1e3, 1 << 16).value;
  double v2 = radial_integrate(g2, 1e3, 1 << 16).value;
  const double e1 = kPi * kPi / 6.0;
  // True closed form is 5 pi^2/36; the source text misprints pi^2/12.
  const double e2 = 5.0 * kPi * kPi / 36.0;
  double r1 = std::abs(v1 - e1) / e1, r2 = std::abs(v2 - e2) / e2;
  r.pass = r1 < 1e-6 && r2 < 1e-6;
  r.detail = fmt("plain=%.9f (pi^2/6=%.9f rel=%.1e) log=%.9f "
                 "(5pi^2/36=%.9f rel=%.1e; stated pi^2/12=%.9f is a misprint)",
                 v1, e1, r1, v2, e2, r2, kPi * kPi / 12.0);
  return r;
}

// ---------------------------------------------------------------- criterion 2
CriterionResult criterion2(const VerifyOptions& opts) {
  CriterionResult r{2, "scaling identities", false, ""};
  std::mt19937_64 rng(opts.seed + 2);
  std::uniform_real_distribution<double> U(-2, 2), Up(0.2, 3.0);
  double worst_psi = 0.0, worst_phi = 0.0;
  for (int k : {2, 3, 5}) {
    for (int t = 0; t < 100; ++t) {
      auto pts = std::vector<Point4>(size_t(k));
      for (auto& p : pts) p = {U(rng), U(rng), U(rng), Up(rng)};
      double dpsi = psi_k_scaling(pts).lambda_derivative;
      double dphi = phi_halfspace_scaling(pts).lambda_derivative;
      worst_psi = std::max(worst_psi,
                           std::abs(dpsi + 8.0 * k * (k - 1)) / (8.0 * k * (k - 1)));
      // True dilation identity is -8k (only the self terms scale); the
      // source text's -8k(k-1) coincides with it at k = 2.
      worst_phi = std::max(worst_phi, std::abs(dphi + 8.0 * k) / (8.0 * k));
    }
  }
  r.pass = worst_psi < 1e-10 && worst_phi < 1e-10;
  r.detail = fmt("psi: max rel dev from -8k(k-1) = %.2e; halfspace: max rel "
                 "dev from -8k = %.2e (k=2 value -16 matches the stated "
                 "-8k(k-1); k=3,5 expose the misprint)",
                 worst_psi, worst_phi);
  return r;
}

// ---------------------------------------------------------------- criterion 3
CriterionResult criterion3(const VerifyOptions&) {
  CriterionResult r{3, "solver convergence order", false, ""};
  auto sine = [&](const Point4& x) {
    double s = 1.0;
    for (int d = 0; d < 4; ++d) s *= std::sin(kPi * x[d]);
    return s;
  };
  std::vector<double> perr, nerr;
  for (int across : {9, 17, 33}) {
    DomainMask mask = unit_box(across);
    ScalarField4 rhs(mask.grid), z(mask.grid), f4(mask.grid);
    for (int32_t ii : mask.interior) {
      Point4 x = mask.grid.coord(size_t(ii));
      rhs.v[size_t(ii)] = -4.0 * kPi * kPi * sine(x);
      f4.v[size_t(ii)] = 16.0 * std::pow(kPi, 4) * sine(x);
    }
    ScalarField4 up = solve_dirichlet(rhs, z, mask, {1e-10, 0});
    NavierSolution un = solve_navier(f4, z, z, mask, {1e-10, 0});
    double ep = 0, en = 0;
    for (int32_t ii : mask.interior) {
      double s = sine(mask.grid.coord(size_t(ii)));
      ep = std::max(ep, std::abs(up.v[size_t(ii)] - s));
      en = std::max(en, std::abs(un.u.v[size_t(ii)] - s));
    }
    perr.push_back(ep);
    nerr.push_back(en);
  }
  double pr1 = perr[0] / perr[1], pr2 = perr[1] / perr[2];
  double nr1 = nerr[0] / nerr[1], nr2 = nerr[1] / nerr[2];
  auto ok = [](double q) { return q > 3.2 && q < 4.8; };
  r.pass = ok(pr1) && ok(pr2) && ok(nr1) && ok(nr2);
  r.detail = fmt("poisson ratios %.2f %.2f, navier ratios %.2f %.2f "
                 "(target [3.2,4.8])", pr1, pr2, nr1, nr2);
  return r;
}

// ---------------------------------------------------------------- criterion 4
CriterionResult criterion4(const VerifyOptions&) {
  CriterionResult r{4, "half-space regular part", false, ""};
  auto spec = DomainSpec::box({-2, -2, -2, 0}, {2, 2, 2, 8});
  DomainMask mask = build_domain_on(spec, 33);
  GreensEvaluation ge = regular_part({0, 0, 0, 0.25}, mask, {1e-8, 0});
  double expect = 8.0 * std::log(0.5);
  double rel = std::abs(ge.h_diag - expect) / std::abs(expect);
  r.pass = rel <= 0.10;
  r.detail = fmt("H(xi,xi)=%.5f vs 8log(2t)=%.5f rel=%.3f (target <= 0.10)",
                 ge.h_diag, expect, rel);
  return r;
}

// ---------------------------------------------------------------- criterion 5
CriterionResult criterion5(const VerifyOptions& opts) {
  CriterionResult r{5, "Green symmetry and boundary vanishing", false, ""};
  const double tol_lin = 1e-8;
  DomainMask mask = unit_box(21);
  const double h2 = mask.grid.h * mask.grid.h;
  std::mt19937_64 rng(opts.seed + 5);
  std::uniform_real_distribution<double> U(0.2, 0.8);
  double worst_sym = 0.0, worst_bdry = 0.0, bdry_scale = 0.0;
  int done = 0;
  while (done < 10) {
    Point4 a{U(rng), U(rng), U(rng), U(rng)}, b{U(rng), U(rng), U(rng), U(rng)};
    if (dist(a, b) < 0.25) continue;
    ++done;
    GreensEvaluation ga = regular_part(a, mask, {tol_lin, 0});
    GreensEvaluation gb = regular_part(b, mask, {tol_lin, 0});
    double gab = greens_value(ga, b), gba = greens_value(gb, a);
    worst_sym = std::max(
        worst_sym, std::abs(gab - gba) / (5.0 * h2 * std::max(1.0, std::abs(gab))));
    double scale = 0.0, gmax = 0.0;
    for (int32_t ii : mask.boundary) {
      size_t i = size_t(ii);
      Point4 x = mask.grid.coord(i);
      double rr = dist(x, a);
      scale = std::max(scale, std::abs(8.0 * std::log(rr)) + 16.0 / (rr * rr));
      gmax = std::max(gmax,
                      std::abs(-8.0 * std::log(rr) + ga.h_field.v[i]));
    }
    worst_bdry = std::max(worst_bdry, gmax / (10.0 * tol_lin * scale));
    bdry_scale = std::max(bdry_scale, gmax);
  }
  r.pass = worst_sym <= 1.0 && worst_bdry <= 1.0;
  r.detail = fmt("max |G(a,b)-G(b,a)| / (5h^2 scale) = %.3f; max boundary |G| "
                 "= %.2e (allowance ratio %.3f) over 10 pairs",
                 worst_sym, bdry_scale, worst_bdry);
  return r;
}

// ---------------------------------------------------------------- criterion 6
CriterionResult criterion6(const VerifyOptions&) {
  CriterionResult r{6, "Aa6/Aa8 eps^2 trends", false, ""};
  auto spec = DomainSpec::box(kZero, kOne);
  const WeightFn k1 = [](const Point4&) { return 1.0; };
  std::vector<double> epss = {0.2, 0.1, 0.05};
  std::vector<int> across = {17, 33, 65};
  std::vector<double> aa6s, aa8s;
  for (size_t t = 0; t < epss.size(); ++t) {
    double eps = epss[t];
    DomainMask mask = build_domain_on(spec, across[t]);
    LinearSolveParams lp{1e-8, 0};
    GreensCache cache(mask, lp);
    const GreensEvaluation& ge = cache.get(kCenter);
    // Aa6 discrepancy at mu = 1, k = 1
    NavierSolution hj = boundary_correction(kCenter, 1.0, eps, 1.0, mask, lp);
    double shift = -4.0 * std::log(1.0 + eps * eps);
    double aa6 = 0.0;
    for (int32_t ii : mask.interior) {
      size_t i = size_t(ii);
      aa6 = std::max(aa6, std::abs(hj.u.v[i] - (ge.h_field.v[i] + shift)));
    }
    aa6s.push_back(aa6);
    // Aa8 far-field discrepancy with mu from the scale rule
    ConfigPoint cfg;
    cfg.xi = {kCenter};
    cfg.delta0 = 0.1;
    double mu = mu_from_xi(cfg, cache, k1)[0];
    NavierSolution hj2 = boundary_correction(kCenter, mu, eps, 1.0, mask, lp);
    double aa8 = 0.0;
    for (int32_t ii : mask.interior) {
      size_t i = size_t(ii);
      Point4 x = mask.grid.coord(i);
      double rr = dist(x, kCenter);
      if (rr < cfg.delta0) continue;
      double uj = bubble(x, kCenter, mu, eps, 1.0) + hj2.u.v[i];
      double g = -8.0 * std::log(rr) + ge.h_field.v[i];
      aa8 = std::max(aa8, std::abs(uj - g));
    }
    aa8s.push_back(aa8);
  }
  double s6 = loglog_slope(epss, aa6s), s8 = loglog_slope(epss, aa8s);
  auto ok = [](double s) { return s > 1.6 && s < 2.4; };
  r.pass = ok(s6) && ok(s8);
  r.detail = fmt("aa6 slope %.2f (sups %.4f %.4f %.4f), aa8 slope %.2f "
                 "(sups %.4f %.4f %.4f), target (1.6,2.4)",
                 s6, aa6s[0], aa6s[1], aa6s[2], s8, aa8s[0], aa8s[1], aa8s[2]);
  return r;
}

// ------------------------------------------------------- criteria 7+8 stages
struct TrendStage {
  double eps = 0.0;
  double star = 0.0;
  double energy_gap = 0.0;
  double phi_term = 0.0;  // |32 pi^2 phi_m|
};

std::vector<TrendStage> run_trend_stages() {
  // A constant weight raises mu to ~2.5, which both shrinks the grids the
  // resolution rule demands and pushes the eps range into the asymptotic
  // regime (discretization floor of ||R||* scales like 1/(mu^8 eps)). The
  // point sits off-center so symmetry does not cancel the first-order term.
  const double kconst = 16384.0;
  const WeightFn kf = [&](const Point4&) { return kconst; };
  const Point4 xi{0.46, 0.54, 0.47, 0.53};
  auto spec = DomainSpec::box(kZero, kOne);
  std::vector<double> epss = {0.08, 0.06, 0.045, 0.03};
  std::vector<int> across = {23, 29, 37, 55};
  std::vector<TrendStage> out;
  for (size_t t = 0; t < epss.size(); ++t) {
    DomainMask mask = build_domain_on(spec, across[t]);
    GreensCache cache(mask, {1e-9, 0});
    ConfigPoint cfg;
    cfg.xi = {xi};
    cfg.delta0 = 0.2;
    AnsatzBundle b = build_ansatz(cfg, epss[t], cache, kf, mask, {1e-9, 0});
    TrendStage s;
    s.eps = epss[t];
    s.star = residual(b, mask, kf).star_norm;
    double phi = phi_m(cfg, cache, kf);
    s.energy_gap = std::abs(energy_hybrid(b, kf, mask) -
                            energy_expansion_reference(1, epss[t], phi));
    s.phi_term = std::abs(32.0 * kPi * kPi * phi);
    out.push_back(s);
  }
  return out;
}

CriterionResult criterion7(const std::vector<TrendStage>& st) {
  CriterionResult r{7, "residual *-norm trend", false, ""};
  std::vector<double> eps, star;
  for (const auto& s : st) {
    eps.push_back(s.eps);
    star.push_back(s.star);
  }
  double slope = loglog_slope(eps, star);
  r.pass = slope > 0.7 && slope < 1.3;
  r.detail = fmt("||R||* slope %.2f over eps {%.3f,%.3f,%.3f} -> "
                 "{%.2f,%.2f,%.2f}, target (0.7,1.3)",
                 slope, eps[0], eps[1], eps[2], star[0], star[1], star[2]);
  return r;
}

CriterionResult criterion8(const std::vector<TrendStage>& st) {
  CriterionResult r{8, "energy expansion remainder", false, ""};
  std::vector<double> eps, gap;
  for (const auto& s : st) {
    eps.push_back(s.eps);
    gap.push_back(s.energy_gap);
  }
  double slope = loglog_slope(eps, gap);
  double frac = st.back().energy_gap / st.back().phi_term;
  r.pass = slope > 0.6 && slope < 1.4 && frac <= 0.05;
  r.detail = fmt("|J[U]-ref| slope %.2f ({%.2f,%.2f,%.2f}), smallest-eps "
                 "remainder %.2f = %.1f%% of |32pi^2 phi| (target slope "
                 "(0.6,1.4), <=5%%)",
                 slope, gap[0], gap[1], gap[2], gap[2], 100.0 * frac);
  return r;
}

// ---------------------------------------------------------------- criterion 9
CriterionResult criterion9(const VerifyOptions& opts) {
  CriterionResult r{9, "phi_1 critical point at the box center", false, ""};
  DomainMask mask = unit_box(21);
  GreensCache cache(mask, {1e-9, 0});
  const WeightFn k1 = [](const Point4&) { return 1.0; };
  std::mt19937_64 rng(opts.seed + 9);
  std::uniform_real_distribution<double> U(0.25, 0.75);
  double worst_dist = 0.0, worst_grad = 0.0;
  bool all_converged = true;
  for (int s = 0; s < 5; ++s) {
    ConfigPoint start;
    start.xi = {{U(rng), U(rng), U(rng), U(rng)}};
    start.delta0 = 0.1;
    auto rep = find_critical(start, SearchMode::Minimize, 1e-3, 300, cache, k1);
    all_converged = all_converged && rep.reason == Termination::Converged;
    worst_dist = std::max(worst_dist, dist(rep.final_cfg.xi[0], kCenter));
    worst_grad = std::max(worst_grad, rep.grad_norm);
  }
  double two_h = 2.0 * mask.grid.h;
  r.pass = all_converged && worst_dist <= two_h && worst_grad <= 1e-3;
  r.detail = fmt("5 starts: max dist to center %.5f (2h=%.4f), max grad "
                 "%.2e (target <= 1e-3), all converged %d",
                 worst_dist, two_h, worst_grad, int(all_converged));
  return r;
}

// -------------------------------------------------------- criteria 10+11
struct ContinuationData {
  ContinuationResult res;
  double ansatz_mass_005 = 0.0;
};

ContinuationData run_mass_continuation() {
  ContinuationData out;
  const double kconst = 16384.0;
  const WeightFn kf = [&](const Point4&) { return kconst; };
  auto spec = DomainSpec::box(kZero, kOne);
  ContinuationParams cp;
  cp.newton.tol = 1e-11;
  cp.linear.tol = 1e-9;
  cp.resolution_eta = 4.3;
  out.res = continuation(spec, {kCenter}, 0.2, {0.048, 0.040, 0.032}, kf, cp);

  // Hybrid ansatz mass at eps = 0.05: the bubble profile is integrated
  // analytically inside the delta0 ball and the grid supplies the smooth
  // far field.
  DomainMask mask = build_domain_on(spec, 35);
  GreensCache cache(mask, {1e-9, 0});
  ConfigPoint cfg;
  cfg.xi = {kCenter};
  cfg.delta0 = 0.2;
  BuildOptions opts;
  AnsatzBundle b = build_ansatz(cfg, 0.05, cache, kf, mask, {1e-9, 0}, opts);
  const double eps = 0.05;
  double rho4 = b.er.rho4();
  double wj = interpolate_quartic(b.H_j[0], kCenter);
  const double kconst2 = kconst;
  auto profile = [&](double r) {
    double a = b.cfg.mu[0] * b.cfg.mu[0] * eps * eps;
    double d = a + r * r;
    return 384.0 * std::pow(eps, 4) * std::pow(b.cfg.mu[0], 4) / (d * d * d * d);
  };
  double near = std::exp(wj) * radial_integrate(profile, cfg.delta0, 1 << 14).value;
  ScalarField4 far(mask.grid);
  auto fill = [&](int32_t ii) {
    size_t i = size_t(ii);
    Point4 x = mask.grid.coord(i);
    if (dist2(x, kCenter) <= cfg.delta0 * cfg.delta0) return;
    far.v[i] = rho4 * kconst2 * std::exp(b.U.v[i]);
  };
  for (int32_t ii : mask.interior) fill(ii);
  for (int32_t ii : mask.boundary) fill(ii);
  out.ansatz_mass_005 = near + integrate(far, mask);
  return out;
}

CriterionResult criterion10(const ContinuationData& cd) {
  CriterionResult r{10, "mass quantization trend", false, ""};
  const double target = 64.0 * kPi * kPi;
  if (cd.res.failed) {
    r.detail = "continuation failed: " + cd.res.failure;
    return r;
  }
  std::vector<double> eps, m;
  bool monotone = true, all_conv = true, in_basin = true;
  for (const auto& st : cd.res.stages) {
    eps.push_back(st.report.eps);
    m.push_back(st.report.mass_hybrid);
    if (!m.empty() && m.size() > 1 && m.back() <= m[m.size() - 2])
      monotone = false;
    all_conv = all_conv && st.report.converged;
    in_basin = in_basin && !st.report.branch_jump;
  }
  // linear extrapolation in eps to 0
  double slope = lsq_slope(eps, m);
  double mean_e = 0, mean_m = 0;
  for (size_t i = 0; i < eps.size(); ++i) {
    mean_e += eps[i];
    mean_m += m[i];
  }
  mean_e /= eps.size();
  mean_m /= m.size();
  double extrap = mean_m - slope * mean_e;
  double rel = std::abs(extrap - target) / target;
  double rel_ansatz = std::abs(cd.ansatz_mass_005 - target) / target;
  r.pass = all_conv && in_basin && monotone && rel <= 0.05 && rel_ansatz <= 0.10;
  r.detail = fmt("masses {%.2f,%.2f,%.2f} monotone=%d, extrapolated %.2f "
                 "(64pi^2=%.2f, rel %.3f <= 0.05), ansatz mass(eps=0.05) "
                 "%.2f (rel %.3f <= 0.10)",
                 m.size() > 0 ? m[0] : 0.0, m.size() > 1 ? m[1] : 0.0,
                 m.size() > 2 ? m[2] : 0.0, int(monotone), extrap, target, rel,
                 cd.ansatz_mass_005, rel_ansatz);
  return r;
}

CriterionResult criterion11(const ContinuationData& cd) {
  CriterionResult r{11, "correction bound trend", false, ""};
  if (cd.res.failed || cd.res.stages.empty()) {
    r.detail = "continuation unavailable";
    return r;
  }
  double lo = 1e300, hi = 0.0;
  std::string vals;
  for (const auto& st : cd.res.stages) {
    double q = st.report.correction_sup /
               (st.report.eps * std::abs(std::log(st.report.eps)));
    lo = std::min(lo, q);
    hi = std::max(hi, q);
    vals += fmt("%.4f ", q);
  }
  r.pass = hi / lo <= 2.0;
  r.detail = fmt("||u-U||_inf/(eps|log eps|) = { %s} drift %.2fx (target <= 2x)",
                 vals.c_str(), hi / lo);
  return r;
}

// --------------------------------------------------------------- criterion 12
CriterionResult criterion12(const VerifyOptions& opts) {
  CriterionResult r{12, "kernel annihilation", false, ""};
  const double mu = 1.3;
  auto W = [&](const Point4& z) {
    double z2 = dist2(z, kZero);
    double d = mu * mu + z2;
    return 384.0 * std::pow(mu, 4) / (d * d * d * d);
  };
  std::mt19937_64 rng(opts.seed + 12);
  std::uniform_real_distribution<double> U(-1, 1);
  std::vector<Point4> samples;
  for (int t = 0; t < 200; ++t) {
    Point4 z{U(rng), U(rng), U(rng), U(rng)};
    double n = std::sqrt(dist2(z, kZero));
    if (n < 1e-3) continue;
    double scale = std::pow(std::abs(U(rng)), 2.0) * 10.0 * mu;
    for (int d = 0; d < 4; ++d) z[d] *= scale / n;
    samples.push_back(z);
  }
  bool ok_all = true;
  std::string detail;
  for (int i = 0; i <= 4; ++i) {
    auto y = [&](const Point4& z) { return kernel_y(i, mu, z); };
    std::vector<double> errs;
    for (double hh : {0.2 * mu, 0.1 * mu, 0.05 * mu}) {
      double e = 0.0;
      for (const auto& z : samples)
        e = std::max(e, std::abs(bilaplacian_pointwise(y, z, hh) - W(z) * y(z)));
      errs.push_back(e);
    }
    double q1 = errs[0] / errs[1], q2 = errs[1] / errs[2];
    bool ok = q1 > 3.2 && q1 < 4.8 && q2 > 3.2 && q2 < 4.8;
    ok_all = ok_all && ok;
    detail += fmt("Y%d: %.2f %.2f  ", i, q1, q2);
  }
  r.pass = ok_all;
  r.detail = detail + "(refinement ratios, target [3.2,4.8])";
  return r;
}

// --------------------------------------------------------------- criterion 13
CriterionResult criterion13(const VerifyOptions& opts) {
  CriterionResult r{13, "parser robustness", false, ""};
  std::mt19937_64 rng(opts.seed + 13);
  const std::string alphabet = "0123456789.+-*/^()xr eslogqprtinc,";
  std::uniform_int_distribution<size_t> pick(0, alphabet.size() - 1);
  std::uniform_int_distribution<int> len(0, 32);
  const Point4 center{0.5, 0.5, 0.5, 0.5};
  long parsed = 0, rejected = 0;
  for (long t = 0; t < 100000; ++t) {
    std::string s;
    int n = len(rng);
    for (int i = 0; i < n; ++i) s.push_back(alphabet[pick(rng)]);
    try {
      KExpr e = KExpr::parse(s);
      (void)e.eval({0.3, -1.2, 0.9, 2.0}, center);
      ++parsed;
    } catch (const Error&) {
      ++rejected;
    }
  }
  struct Row {
    const char* src;
    Point4 x;
    double expect;
  };
  const Point4 o{0, 0, 0, 0};
  const Row rows[] = {
      {"1", o, 1.0},
      {"2+2", o, 4.0},
      {"2^10", o, 1024.0},
      {"10/4", o, 2.5},
      {"1 - 2 - 3", o, -4.0},
      {"2^3^2", o, 512.0},
      {"-5 + 3", o, -2.0},
      {"x1 + 2*x2", {1, 2, 3, 4}, 5.0},
      {"x3^2", {0, 0, 3, 0}, 9.0},
      {"x4/x1", {2, 0, 0, 5}, 2.5},
      {"exp(1)", o, 2.718281828459045},
      {"log(2.718281828459045)", o, 1.0},
      {"sqrt(2)", o, 1.4142135623730951},
      {"sin(1)", o, 0.8414709848078965},
      {"cos(1)", o, 0.5403023058681398},
      {"exp(0 - r^2)", {1.5, 0.5, 0.5, 0.5}, 0.36787944117144233},
      {"2*3 + 4*5", o, 26.0},
      {"(1+2)^(1+1)", o, 9.0},
      {"1/(1+r^2)", {0.5, 0.5, 0.5, 1.5}, 0.5},
      {"-(-(3))", o, 3.0},
  };
  double worst = 0.0;
  for (const auto& row : rows) {
    double got = KExpr::parse(row.src).eval(row.x, center);
    worst = std::max(worst, std::abs(got - row.expect) /
                                std::max(1.0, std::abs(row.expect)));
  }
  r.pass = (parsed + rejected == 100000) && worst <= 1e-12;
  r.detail = fmt("fuzz: %ld parsed, %ld rejected, 0 crashes; table max rel "
                 "err %.1e (target <= 1e-12)", parsed, rejected, worst);
  return r;
}

std::vector<CriterionResult> run_inner(const VerifyOptions& opts,
                                       std::ostream& log);

// --------------------------------------------------------------- criterion 14
CriterionResult criterion14(const VerifyOptions& opts) {
  CriterionResult r{14, "determinism", false, ""};
  // Re-run the seeded fast criteria twice and compare summaries byte for
  // byte; every heavier criterion uses the same deterministic machinery.
  VerifyOptions sub = opts;
  sub.only = {1, 2, 12, 13};
  sub.out_dir.clear();
  std::ostringstream sink1, sink2;
  std::string s1 = format_summary(run_inner(sub, sink1), sub.seed);
  std::string s2 = format_summary(run_inner(sub, sink2), sub.seed);
  r.pass = s1 == s2 && !s1.empty();
  r.detail = fmt("two subset runs, summaries byte-identical: %d (%zu bytes)",
                 int(s1 == s2), s1.size());
  return r;
}

std::vector<CriterionResult> run_inner(const VerifyOptions& opts,
                                       std::ostream& log) {
  if (opts.threads > 0) set_num_threads(opts.threads);
  auto wanted = [&](int id) {
    return opts.only.empty() || opts.only.count(id) > 0;
  };
  std::vector<CriterionResult> results;
  auto emit = [&](CriterionResult r) {
    log << (r.pass ? "PASS" : "FAIL") << "  [" << r.id << "] " << r.name
        << ": " << r.detail << "\n";
    log.flush();
    results.push_back(std::move(r));
  };

  if (wanted(1)) emit(criterion1(opts));
  if (wanted(2)) emit(criterion2(opts));
  if (wanted(3)) emit(criterion3(opts));
  if (wanted(4)) emit(criterion4(opts));
  if (wanted(5)) emit(criterion5(opts));
  if (wanted(6)) emit(criterion6(opts));
  if (wanted(7) || wanted(8)) {
    auto stages = run_trend_stages();
    if (wanted(7)) emit(criterion7(stages));
    if (wanted(8)) emit(criterion8(stages));
  }
  if (wanted(9)) emit(criterion9(opts));
  if (wanted(10) || wanted(11)) {
    auto cd = run_mass_continuation();
    if (wanted(10)) emit(criterion10(cd));
    if (wanted(11)) emit(criterion11(cd));
  }
  if (wanted(12)) emit(criterion12(opts));
  if (wanted(13)) emit(criterion13(opts));
  if (wanted(14)) emit(criterion14(opts));
  return results;
}

}  // namespace

std::vector<CriterionResult> run_verify(const VerifyOptions& opts,
                                        std::ostream& log) {
  return run_inner(opts, log);
}

std::string format_summary(const std::vector<CriterionResult>& results,
                           uint64_t seed) {
  std::ostringstream os;
  os << "{\n  \"tool\": \"bilap4\",\n  \"version\": \"0.1.0\",\n";
  os << "  \"seed\": " << seed << ",\n  \"criteria\": [\n";
  for (size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    os << "    {\"id\": " << r.id << ", \"name\": \"" << r.name
       << "\", \"pass\": " << (r.pass ? "true" : "false") << ", \"detail\": \"";
    for (char c : r.detail) {
      if (c == '"' || c == '\\') os << '\\';
      os << c;
    }
    os << "\"}" << (i + 1 < results.size() ? "," : "") << "\n";
  }
  os << "  ]\n}\n";
  return os.str();
}

}  // namespace bilap4
