#include "bilap4/reduced_energy.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

namespace bilap4 {

bool check_admissible(const ConfigPoint& cfg, const DomainSpec& spec) {
  const double need = 2.0 * cfg.delta0;
  for (const auto& p : cfg.xi) {
    if (spec.distance_to_boundary(p) < need) return false;
  }
  for (size_t i = 0; i < cfg.xi.size(); ++i)
    for (size_t j = i + 1; j < cfg.xi.size(); ++j)
      if (dist(cfg.xi[i], cfg.xi[j]) < need) return false;
  return true;
}

const GreensEvaluation& GreensCache::get(const Point4& xi) {
  const double q = mask_->grid.h / 16.0;
  std::array<int64_t, 4> key;
  for (int d = 0; d < 4; ++d)
    key[d] = int64_t(std::llround((xi[d] - mask_->grid.origin[d]) / q));
  {
    std::shared_lock lock(mutex_);
    auto it = map_.find(key);
    if (it != map_.end()) return *it->second;
  }
  auto ge = std::make_shared<GreensEvaluation>(regular_part(xi, *mask_, params_));
  std::unique_lock lock(mutex_);
  auto [it, inserted] = map_.emplace(key, std::move(ge));
  return *it->second;
}

size_t GreensCache::size() const {
  std::shared_lock lock(mutex_);
  return map_.size();
}

namespace {

void check_points(const ConfigPoint& cfg, GreensCache& greens,
                  const WeightFn& k, std::vector<double>* log_k) {
  const double h = greens.mask().grid.h;
  for (size_t i = 0; i < cfg.xi.size(); ++i)
    for (size_t j = i + 1; j < cfg.xi.size(); ++j)
      if (dist(cfg.xi[i], cfg.xi[j]) < h)
        throw CollidingPoints("points closer than one grid spacing");
  if (log_k) {
    log_k->resize(cfg.xi.size());
    for (size_t j = 0; j < cfg.xi.size(); ++j) {
      double kv = k(cfg.xi[j]);
      if (!(kv > 0.0))
        throw NonpositiveWeight("k(xi_" + std::to_string(j + 1) +
                                ") = " + std::to_string(kv));
      (*log_k)[j] = std::log(kv);
    }
  }
}

// G(xi_i, xi_j) for every unordered pair, evaluated once with a
// deterministic orientation so relabeling the points cannot change bits.
std::vector<std::vector<double>> pair_greens(const ConfigPoint& cfg,
                                             GreensCache& greens) {
  int m = cfg.m();
  std::vector<std::vector<double>> G(m, std::vector<double>(m, 0.0));
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const Point4 &a = cfg.xi[i], &b = cfg.xi[j];
      bool a_first = std::lexicographical_compare(a.begin(), a.end(), b.begin(),
                                                  b.end());
      const Point4& src = a_first ? a : b;
      const Point4& at = a_first ? b : a;
      double g = greens_value(greens.get(src), at);
      G[i][j] = G[j][i] = g;
    }
  }
  return G;
}

}  // namespace

double phi_m(const ConfigPoint& cfg, GreensCache& greens, const WeightFn& k) {
  std::vector<double> log_k;
  check_points(cfg, greens, k, &log_k);
  auto G = pair_greens(cfg, greens);
  double phi = 0.0;
  for (int j = 0; j < cfg.m(); ++j) {
    phi -= 2.0 * log_k[j] + greens.get(cfg.xi[j]).h_diag;
    for (int i = 0; i < cfg.m(); ++i)
      if (i != j) phi -= G[i][j];
  }
  return phi;
}

std::vector<double> mu_from_xi(const ConfigPoint& cfg, GreensCache& greens,
                               const WeightFn& k) {
  std::vector<double> log_k;
  check_points(cfg, greens, k, &log_k);
  auto G = pair_greens(cfg, greens);
  std::vector<double> mu(cfg.m());
  for (int j = 0; j < cfg.m(); ++j) {
    double s = log_k[j] + greens.get(cfg.xi[j]).h_diag;
    for (int i = 0; i < cfg.m(); ++i)
      if (i != j) s += G[i][j];
    mu[j] = std::exp(s / 4.0);
  }
  return mu;
}

std::vector<double> grad_phi_m(const ConfigPoint& cfg, GreensCache& greens,
                               const WeightFn& k, GradMethod method,
                               double h_fd) {
  if (h_fd <= 0.0) h_fd = greens.mask().grid.h;
  const int m = cfg.m();
  std::vector<double> grad(size_t(m) * 4, 0.0);

  if (method == GradMethod::CentralFD) {
    for (int j = 0; j < m; ++j) {
      for (int d = 0; d < 4; ++d) {
        ConfigPoint p = cfg, q = cfg;
        p.xi[j][d] += h_fd;
        q.xi[j][d] -= h_fd;
        grad[size_t(j) * 4 + d] =
            (phi_m(p, greens, k) - phi_m(q, greens, k)) / (2.0 * h_fd);
      }
    }
    return grad;
  }

  std::vector<double> log_k;
  check_points(cfg, greens, k, &log_k);
  for (int j = 0; j < m; ++j) {
    const Point4& xj = cfg.xi[j];
    const GreensEvaluation& gj = greens.get(xj);
    Point4 dH = interpolate_quartic_gradient(gj.h_field, xj);
    for (int d = 0; d < 4; ++d) {
      // 2 log k differenced; H and G terms use Green symmetry.
      Point4 xp = xj, xm = xj;
      xp[d] += h_fd;
      xm[d] -= h_fd;
      double kp = k(xp), km = k(xm);
      if (!(kp > 0.0 && km > 0.0))
        throw NonpositiveWeight("k nonpositive at a finite-difference stencil point");
      double g = -2.0 * (std::log(kp) - std::log(km)) / (2.0 * h_fd);
      g -= 2.0 * dH[d];
      for (int i = 0; i < m; ++i) {
        if (i == j) continue;
        g -= 2.0 * greens_gradient(greens.get(cfg.xi[i]), xj)[d];
      }
      grad[size_t(j) * 4 + d] = g;
    }
  }
  return grad;
}

namespace {

// Projection onto the admissible set: clip to the delta0-margin box, push out
// of the hole margin, then repair pairwise separations along the connecting
// segments.
void project_to_admissible(ConfigPoint& cfg, const DomainSpec& spec) {
  const double margin = 2.0 * cfg.delta0;
  for (auto& p : cfg.xi) {
    for (int d = 0; d < 4; ++d)
      p[d] = std::clamp(p[d], spec.lo[d] + margin, spec.hi[d] - margin);
    if (spec.has_hole) {
      bool in_margin = true;
      for (int d = 0; d < 4; ++d)
        if (p[d] <= spec.hole_lo[d] - margin || p[d] >= spec.hole_hi[d] + margin)
          in_margin = false;
      if (in_margin) {
        // Push out along the cheapest axis.
        int best_d = 0;
        double best_move = 1e300, best_target = 0.0;
        for (int d = 0; d < 4; ++d) {
          double to_lo = p[d] - (spec.hole_lo[d] - margin);
          double to_hi = (spec.hole_hi[d] + margin) - p[d];
          if (to_lo < best_move) {
            best_move = to_lo;
            best_d = d;
            best_target = spec.hole_lo[d] - margin;
          }
          if (to_hi < best_move) {
            best_move = to_hi;
            best_d = d;
            best_target = spec.hole_hi[d] + margin;
          }
        }
        p[best_d] = best_target;
        p[best_d] = std::clamp(p[best_d], spec.lo[best_d] + margin,
                               spec.hi[best_d] - margin);
      }
    }
  }
  for (int pass = 0; pass < 8; ++pass) {
    bool moved = false;
    for (size_t i = 0; i < cfg.xi.size(); ++i) {
      for (size_t j = i + 1; j < cfg.xi.size(); ++j) {
        double d = dist(cfg.xi[i], cfg.xi[j]);
        if (d >= margin) continue;
        moved = true;
        Point4 dir{1, 0, 0, 0};
        if (d > 1e-14) {
          for (int a = 0; a < 4; ++a) dir[a] = (cfg.xi[j][a] - cfg.xi[i][a]) / d;
        }
        double push = (margin - d) / 2.0 + 1e-12;
        for (int a = 0; a < 4; ++a) {
          cfg.xi[i][a] -= push * dir[a];
          cfg.xi[j][a] += push * dir[a];
        }
      }
    }
    if (!moved) break;
  }
}

}  // namespace

namespace {

// The greens cache resolves sources to an h/16 lattice; the search walks on
// the same lattice so every phi evaluation is consistent with its fields.
Point4 snap_to_cache(const Point4& p, const Grid4& g) {
  const double q = g.h / 16.0;
  Point4 out;
  for (int d = 0; d < 4; ++d)
    out[d] = g.origin[d] + q * double(std::llround((p[d] - g.origin[d]) / q));
  return out;
}

}  // namespace

CriticalSearchReport find_critical(const ConfigPoint& start, SearchMode mode,
                                   double tol, int max_iter,
                                   GreensCache& greens, const WeightFn& k) {
  const DomainSpec& spec = greens.mask().spec;
  const Grid4& grid = greens.mask().grid;
  if (!check_admissible(start, spec))
    throw NotAdmissible("start configuration violates the admissible set");

  const double sign = (mode == SearchMode::Minimize) ? 1.0 : -1.0;
  const double q = grid.h / 16.0;
  ConfigPoint cfg = start;
  for (auto& p : cfg.xi) p = snap_to_cache(p, grid);
  project_to_admissible(cfg, spec);
  for (auto& p : cfg.xi) p = snap_to_cache(p, grid);

  CriticalSearchReport rep;
  rep.reason = Termination::MaxIter;
  double f = sign * phi_m(cfg, greens, k);
  rep.phi_trace.push_back(sign * f);
  double step = grid.h;

  auto eval_grad_norm = [&](const ConfigPoint& c, std::vector<double>& g) {
    g = grad_phi_m(c, greens, k, GradMethod::SymmetryField);
    double g2 = 0.0;
    for (double v : g) g2 += v * v;
    return std::sqrt(g2);
  };

  bool hit_boundary = false;
  std::vector<double> g;
  for (int it = 0; it < max_iter; ++it) {
    rep.iterations = it + 1;
    double gnorm = eval_grad_norm(cfg, g);
    rep.grad_norm = gnorm;
    if (gnorm <= tol) {
      rep.reason = Termination::Converged;
      break;
    }

    bool accepted = false;
    bool projection_active = false;
    double t = std::min(step * 2.0, 0.5 / std::max(gnorm, 1e-30));
    for (int half = 0; half < 24 && t * gnorm >= 0.5 * q; ++half) {
      ConfigPoint trial = cfg;
      for (int j = 0; j < cfg.m(); ++j)
        for (int d = 0; d < 4; ++d)
          trial.xi[j][d] -= t * sign * g[size_t(j) * 4 + d];
      project_to_admissible(trial, spec);
      projection_active = false;
      for (int j = 0; j < cfg.m(); ++j)
        for (int d = 0; d < 4; ++d) {
          double raw = cfg.xi[j][d] - t * sign * g[size_t(j) * 4 + d];
          if (std::abs(raw - trial.xi[j][d]) > 1e-13) projection_active = true;
        }
      for (auto& p : trial.xi) p = snap_to_cache(p, grid);
      double ftrial = sign * phi_m(trial, greens, k);
      double moved2 = 0.0;
      for (int j = 0; j < cfg.m(); ++j)
        moved2 += dist2(trial.xi[size_t(j)], cfg.xi[size_t(j)]);
      if (moved2 > 0.0 && ftrial <= f - 1e-4 * t * gnorm * gnorm) {
        cfg = trial;
        f = ftrial;
        step = t;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      // Lattice polish: descend over axis neighbors on the cache lattice
      // until a local lattice minimum of phi.
      bool improved = true;
      int rounds = 0;
      while (improved && rounds++ < 64) {
        improved = false;
        for (int j = 0; j < cfg.m() && !improved; ++j)
          for (int d = 0; d < 4 && !improved; ++d)
            for (double sgn : {-1.0, 1.0}) {
              ConfigPoint trial = cfg;
              trial.xi[size_t(j)][d] += sgn * q;
              if (!check_admissible(trial, spec)) continue;
              double ftrial = sign * phi_m(trial, greens, k);
              if (ftrial < f) {
                cfg = trial;
                f = ftrial;
                improved = true;
                break;
              }
            }
      }
      double gnorm = eval_grad_norm(cfg, g);
      rep.grad_norm = gnorm;
      rep.phi_trace.push_back(sign * f);
      if (gnorm <= tol) {
        rep.reason = Termination::Converged;
      } else if (projection_active || hit_boundary) {
        rep.reason = Termination::HitBoundaryOfO;
      } else {
        rep.reason = Termination::MaxIter;
      }
      break;
    }
    hit_boundary = projection_active;
    rep.phi_trace.push_back(sign * f);
  }

  cfg.mu = mu_from_xi(cfg, greens, k);
  rep.final_cfg = cfg;
  rep.phi_value = sign * f;
  return rep;
}

ScalingResult psi_k_scaling(std::span<const Point4> points) {
  const size_t k = points.size();
  ScalingResult out;
  for (size_t i = 0; i < k; ++i)
    for (size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      double d2 = dist2(points[i], points[j]);
      if (d2 == 0.0) throw DuplicatePoints("coincident points in Psi_k");
      out.value += -8.0 * 0.5 * std::log(d2);
    }
  // grad_{x_i} Psi = -16 sum_{j != i} (x_i - x_j)/|x_i - x_j|^2
  for (size_t i = 0; i < k; ++i) {
    Point4 g{};
    for (size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      double d2 = dist2(points[i], points[j]);
      for (int a = 0; a < 4; ++a)
        g[a] += -16.0 * (points[i][a] - points[j][a]) / d2;
    }
    for (int a = 0; a < 4; ++a) out.lambda_derivative += g[a] * points[i][a];
  }
  return out;
}

ScalingResult phi_halfspace_scaling(std::span<const Point4> points) {
  const size_t k = points.size();
  auto reflect = [](const Point4& p) {
    return Point4{p[0], p[1], p[2], -p[3]};
  };
  for (const auto& p : points)
    if (!(p[3] > 0.0))
      throw PointOnWall("point has nonpositive fourth coordinate");
  for (size_t i = 0; i < k; ++i)
    for (size_t j = i + 1; j < k; ++j)
      if (dist2(points[i], points[j]) == 0.0)
        throw DuplicatePoints("coincident points");

  ScalingResult out;
  for (size_t j = 0; j < k; ++j)
    out.value += -8.0 * std::log(2.0 * points[j][3]);
  for (size_t i = 0; i < k; ++i)
    for (size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      out.value += 8.0 * (std::log(dist(points[i], points[j])) -
                          std::log(dist(points[i], reflect(points[j]))));
    }

  std::vector<Point4> grad(k, Point4{});
  for (size_t l = 0; l < k; ++l) grad[l][3] += -8.0 / points[l][3];
  for (size_t i = 0; i < k; ++i)
    for (size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      double dij2 = dist2(points[i], points[j]);
      Point4 rj = reflect(points[j]);
      double dir2 = dist2(points[i], rj);
      for (int a = 0; a < 4; ++a) {
        double plain = 8.0 * (points[i][a] - points[j][a]) / dij2;
        grad[i][a] += plain;
        grad[j][a] -= plain;
        // -8 log|x_i - xbar_j| contributes to x_i directly and to x_j
        // through the reflection.
        grad[i][a] += -8.0 * (points[i][a] - rj[a]) / dir2;
        double sa = (a == 3) ? -1.0 : 1.0;
        grad[j][a] += -8.0 * sa * (rj[a] - points[i][a]) / dir2;
      }
    }
  for (size_t l = 0; l < k; ++l)
    for (int a = 0; a < 4; ++a)
      out.lambda_derivative += grad[l][a] * points[l][a];
  return out;
}

}  // namespace bilap4
