#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "bilap4/par.hpp"
#include "bilap4/solver.hpp"
#include "bilap4/verify.hpp"
#include "json.hpp"

namespace bilap4::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

double wall_seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string hex64(uint64_t v) {
  char buf[20];
  snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Header block carried by every output file.
void write_csv_header(std::ofstream& out, const RunConfig& cfg, int grid_n,
                      double eps, double wall) {
  out << "# tool: bilap4 " << kVersion << "\n";
  out << "# config_hash: " << hex64(cfg.hash) << "\n";
  out << "# grid: " << grid_n << " nodes across\n";
  out << "# eps: " << eps << "\n";
  out << "# wall_time_s: " << wall << "\n";
}

json meta_block(const RunConfig& cfg, int grid_n, double eps, double wall) {
  json m;
  m["tool"] = std::string("bilap4 ") + kVersion;
  m["config_hash"] = hex64(cfg.hash);
  m["grid"] = grid_n;
  m["eps"] = eps;
  m["wall_time_s"] = wall;
  return m;
}

void atomic_write(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out << content;
  }
  fs::rename(tmp, path);
}

struct Workspace {
  DomainMask mask;
  GreensCache cache;
  WeightFn k;
  Workspace(const RunConfig& cfg, int grid_n)
      : mask(build_domain_on(cfg.domain, grid_n)),
        cache(mask, {cfg.tol.linear, 0}),
        k(cfg.weight()) {}
};

std::string fmt_point(const Point4& p) {
  std::ostringstream os;
  os.precision(12);
  os << p[0] << "," << p[1] << "," << p[2] << "," << p[3];
  return os.str();
}

}  // namespace

int cmd_green(const RunConfig& cfg, const std::vector<Point4>& xs) {
  auto t0 = std::chrono::steady_clock::now();
  if (xs.empty()) throw InvalidDomainSpec("green needs at least one --xi point");
  if (cfg.threads > 0) set_num_threads(cfg.threads);
  int grid_n = cfg.grid_for_stage(0);
  Workspace ws(cfg, grid_n);
  fs::create_directories(cfg.out_dir);

  std::ostringstream diag;
  diag.precision(12);
  diag << "source_x1,source_x2,source_x3,source_x4,h_diag\n";
  for (const auto& xi : xs) {
    const GreensEvaluation& ge = ws.cache.get(xi);
    diag << fmt_point(xi) << "," << ge.h_diag << "\n";
  }

  std::ostringstream pair;
  pair.precision(12);
  pair << "i,j,g_value\n";
  for (size_t i = 0; i < xs.size(); ++i)
    for (size_t j = 0; j < xs.size(); ++j) {
      if (i == j) continue;
      pair << i << "," << j << ","
           << greens_value(ws.cache.get(xs[i]), xs[j]) << "\n";
    }

  std::ostringstream slice;
  slice.precision(12);
  slice << "source,axis,t,h_value\n";
  for (size_t s = 0; s < xs.size(); ++s) {
    const GreensEvaluation& ge = ws.cache.get(xs[s]);
    const Grid4& g = ws.mask.grid;
    auto base = g.unpack(g.index(0, 0, 0, 0));
    (void)base;
    for (int axis = 0; axis < 4; ++axis) {
      std::array<int, 4> idx{};
      for (int d = 0; d < 4; ++d)
        idx[size_t(d)] =
            int(std::lround((xs[s][size_t(d)] - g.origin[size_t(d)]) / g.h));
      for (int i = 0; i < g.n[size_t(axis)]; ++i) {
        idx[size_t(axis)] = i;
        size_t flat = g.index(idx[0], idx[1], idx[2], idx[3]);
        if (ws.mask.cls[flat] == NodeClass::Exterior) continue;
        slice << s << "," << axis << "," << g.coord(flat)[size_t(axis)] << ","
              << ge.h_field.v[flat] << "\n";
      }
    }
  }

  double wall = wall_seconds(t0);
  for (auto [name, body] :
       {std::pair<std::string, std::ostringstream*>{"green_hdiag.csv", &diag},
        {"green_pairs.csv", &pair},
        {"green_slices.csv", &slice}}) {
    std::ostringstream full;
    std::ofstream tmp;
    std::ostringstream head;
    {
      std::ofstream out;  // reuse header writer via a string stream
    }
    std::ostringstream hs;
    hs << "# tool: bilap4 " << kVersion << "\n# config_hash: " << hex64(cfg.hash)
       << "\n# grid: " << grid_n << " nodes across\n# eps: n/a\n# wall_time_s: "
       << wall << "\n";
    atomic_write(fs::path(cfg.out_dir) / name, hs.str() + body->str());
  }
  std::cout << "green: wrote 3 files to " << cfg.out_dir << "\n";
  return 0;
}

int cmd_phi(const RunConfig& cfg, int lattice_per_axis) {
  auto t0 = std::chrono::steady_clock::now();
  if (lattice_per_axis < 2)
    throw InvalidDomainSpec("phi lattice needs at least 2 points per axis");
  if (cfg.threads > 0) set_num_threads(cfg.threads);
  int grid_n = cfg.grid_for_stage(0);
  Workspace ws(cfg, grid_n);
  fs::create_directories(cfg.out_dir);

  const DomainSpec& spec = cfg.domain;
  const double margin = 2.0 * cfg.delta0;
  Point4 lo, hi;
  for (int d = 0; d < 4; ++d) {
    lo[size_t(d)] = spec.lo[size_t(d)] + margin;
    hi[size_t(d)] = spec.hi[size_t(d)] - margin;
    if (!(hi[size_t(d)] > lo[size_t(d)]))
      throw InvalidDomainSpec("admissible box is empty for this delta0");
  }
  Point4 bary = spec.barycenter();

  std::ostringstream rows;
  rows.precision(12);
  rows << "x1,x2,x3,x4,phi\n";
  std::vector<int> idx(4, 0);
  const int N = lattice_per_axis;
  for (idx[0] = 0; idx[0] < N; ++idx[0])
    for (idx[1] = 0; idx[1] < N; ++idx[1])
      for (idx[2] = 0; idx[2] < N; ++idx[2])
        for (idx[3] = 0; idx[3] < N; ++idx[3]) {
          Point4 p;
          for (int d = 0; d < 4; ++d)
            p[size_t(d)] = lo[size_t(d)] + (hi[size_t(d)] - lo[size_t(d)]) *
                                               idx[size_t(d)] / double(N - 1);
          ConfigPoint c;
          c.delta0 = cfg.delta0;
          c.xi = {p};
          for (int extra = 1; extra < cfg.m; ++extra) {
            Point4 q;
            for (int d = 0; d < 4; ++d)
              q[size_t(d)] = 2.0 * bary[size_t(d)] - p[size_t(d)];
            c.xi.push_back(q);
          }
          if (!spec.inside(p) ||
              (cfg.m > 1 && !spec.inside(c.xi[1]))) continue;
          rows << fmt_point(p) << ",";
          try {
            rows << phi_m(c, ws.cache, ws.k) << "\n";
          } catch (const CollidingPoints&) {
            rows << "-inf\n";  // phi_m = -inf at the diagonal
          }
        }

  std::ostringstream hs;
  hs << "# tool: bilap4 " << kVersion << "\n# config_hash: " << hex64(cfg.hash)
     << "\n# grid: " << grid_n << " nodes across\n# eps: n/a\n# wall_time_s: "
     << wall_seconds(t0) << "\n";
  atomic_write(fs::path(cfg.out_dir) / "phi_lattice.csv", hs.str() + rows.str());
  std::cout << "phi: wrote phi_lattice.csv to " << cfg.out_dir << "\n";
  return 0;
}

int cmd_find_critical(const RunConfig& cfg, int random_starts,
                      const std::vector<std::vector<Point4>>& starts) {
  auto t0 = std::chrono::steady_clock::now();
  if (cfg.threads > 0) set_num_threads(cfg.threads);
  int grid_n = cfg.grid_for_stage(0);
  Workspace ws(cfg, grid_n);
  fs::create_directories(cfg.out_dir);

  std::vector<std::vector<Point4>> all = starts;
  if (random_starts > 0) {
    std::mt19937_64 rng(cfg.seed);
    const DomainSpec& spec = cfg.domain;
    const double margin = 2.0 * cfg.delta0;
    int guard = 0;
    while (int(all.size()) < random_starts + int(starts.size()) &&
           guard++ < 100000) {
      std::vector<Point4> s;
      for (int j = 0; j < cfg.m; ++j) {
        Point4 p;
        for (int d = 0; d < 4; ++d) {
          std::uniform_real_distribution<double> U(spec.lo[size_t(d)] + margin,
                                                   spec.hi[size_t(d)] - margin);
          p[size_t(d)] = U(rng);
        }
        s.push_back(p);
      }
      ConfigPoint c;
      c.xi = s;
      c.delta0 = cfg.delta0;
      if (check_admissible(c, spec)) all.push_back(s);
    }
  }
  if (all.empty()) throw InvalidDomainSpec("no admissible starts supplied");

  json out = json::array();
  for (const auto& s : all) {
    ConfigPoint start;
    start.xi = s;
    start.delta0 = cfg.delta0;
    auto rep = find_critical(start, SearchMode::Minimize, 1e-3, 300, ws.cache,
                             ws.k);
    json r;
    r["termination"] = rep.reason == Termination::Converged ? "Converged"
                       : rep.reason == Termination::HitBoundaryOfO
                           ? "HitBoundaryOfO"
                           : "MaxIter";
    r["iterations"] = rep.iterations;
    r["grad_norm"] = rep.grad_norm;
    r["phi"] = rep.phi_value;
    json pts = json::array(), mus = json::array();
    for (const auto& p : rep.final_cfg.xi)
      pts.push_back({p[0], p[1], p[2], p[3]});
    for (double m : rep.final_cfg.mu) mus.push_back(m);
    r["xi"] = pts;
    r["mu"] = mus;
    r["phi_trace"] = rep.phi_trace;
    out.push_back(r);
  }

  json doc;
  doc["meta"] = meta_block(cfg, grid_n, 0.0, wall_seconds(t0));
  doc["reports"] = out;
  atomic_write(fs::path(cfg.out_dir) / "critical_reports.json", doc.dump(2) + "\n");
  std::cout << "find-critical: wrote critical_reports.json (" << all.size()
            << " starts)\n";
  return 0;
}

int cmd_ansatz(const RunConfig& cfg, bool auto_critical,
               const std::vector<Point4>& xi) {
  auto t0 = std::chrono::steady_clock::now();
  if (cfg.eps_schedule.empty())
    throw InvalidDomainSpec("ansatz needs a non-empty eps_schedule");
  if (cfg.threads > 0) set_num_threads(cfg.threads);
  double eps = cfg.eps_schedule.front();
  int grid_n = cfg.grid_for_stage(0);
  Workspace ws(cfg, grid_n);
  fs::create_directories(cfg.out_dir);

  ConfigPoint c;
  c.delta0 = cfg.delta0;
  if (auto_critical) {
    ConfigPoint start;
    start.delta0 = cfg.delta0;
    Point4 bary = cfg.domain.barycenter();
    for (int j = 0; j < cfg.m; ++j) {
      Point4 p = bary;
      p[0] += 0.05 * (j + 1);  // separated seeds along axis 0
      p[1] -= 0.05 * j;
      start.xi.push_back(p);
    }
    auto rep =
        find_critical(start, SearchMode::Minimize, 1e-3, 300, ws.cache, ws.k);
    c.xi = rep.final_cfg.xi;
  } else {
    if (int(xi.size()) != cfg.m)
      throw InvalidDomainSpec("ansatz needs m --xi points or \"auto\"");
    c.xi = xi;
  }

  AnsatzBundle b =
      build_ansatz(c, eps, ws.cache, ws.k, ws.mask, {cfg.tol.linear, 0});
  ResidualReport rr = residual(b, ws.mask, ws.k);
  double phi = phi_m(b.cfg, ws.cache, ws.k);
  double jh = energy_hybrid(b, ws.k, ws.mask);
  double jp = energy(b.U, b.er.rho, ws.k, ws.mask);
  double ref = energy_expansion_reference(b.cfg.m(), eps, phi);
  double mh = cfg.hybrid_quadrature
                  ? mass_hybrid(b.U, b.cfg, b.er, cfg.delta0, ws.k, ws.mask)
                  : mass(b.U, b.er.rho, ws.k, ws.mask);

  json doc;
  doc["meta"] = meta_block(cfg, grid_n, eps, wall_seconds(t0));
  json pts = json::array(), mus = json::array();
  for (const auto& p : b.cfg.xi) pts.push_back({p[0], p[1], p[2], p[3]});
  for (double m : b.cfg.mu) mus.push_back(m);
  doc["xi"] = pts;
  doc["mu"] = mus;
  doc["rho"] = b.er.rho;
  doc["star_norm"] = rr.star_norm;
  doc["star_norm_excluded_band"] = rr.band_sup;
  doc["aa8_sup"] = b.aa8_sup;
  doc["phi"] = phi;
  doc["energy_hybrid"] = jh;
  doc["energy_plain"] = jp;
  doc["energy_reference"] = ref;
  doc["mass"] = mh;
  atomic_write(fs::path(cfg.out_dir) / "ansatz_report.json", doc.dump(2) + "\n");
  std::cout << "ansatz: wrote ansatz_report.json (||R||* = " << rr.star_norm
            << ")\n";
  return 0;
}

int cmd_solve(const RunConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  if (cfg.eps_schedule.empty())
    throw InvalidDomainSpec("solve needs a non-empty eps_schedule");
  if (cfg.threads > 0) set_num_threads(cfg.threads);
  fs::create_directories(cfg.out_dir);

  // Concentration points: critical configuration from the barycenter seed.
  int grid_n = cfg.grid_for_stage(0);
  Workspace ws(cfg, grid_n);
  ConfigPoint start;
  start.delta0 = cfg.delta0;
  Point4 bary = cfg.domain.barycenter();
  for (int j = 0; j < cfg.m; ++j) {
    Point4 p = bary;
    p[0] += 0.05 * (j + 1);
    p[1] -= 0.05 * j;
    start.xi.push_back(p);
  }
  auto crit =
      find_critical(start, SearchMode::Minimize, 1e-3, 300, ws.cache, ws.k);

  ContinuationParams cp;
  cp.newton.tol = cfg.tol.newton;
  cp.linear.tol = cfg.tol.linear;
  ContinuationResult res = continuation(cfg.domain, crit.final_cfg.xi,
                                        cfg.delta0, cfg.eps_schedule, ws.k, cp);

  json doc;
  doc["meta"] = meta_block(cfg, grid_n, cfg.eps_schedule.front(),
                           wall_seconds(t0));
  doc["failed"] = res.failed;
  if (res.failed) {
    doc["failed_index"] = res.failed_index;
    doc["failure"] = res.failure;
  }
  json stages = json::array();
  std::ostringstream trend;
  trend.precision(12);
  trend << "eps,rho,nodes_across,converged,iterations,mass,mass_hybrid,energy,"
           "energy_reference,phi,correction_sup,correction_over_eps_log_eps,"
           "ansatz_star_norm,branch_jump\n";
  for (const auto& st : res.stages) {
    json s;
    s["eps"] = st.report.eps;
    s["rho"] = st.report.rho;
    s["nodes_across"] = st.nodes_across;
    s["converged"] = st.report.converged;
    s["iterations"] = st.report.iterations;
    s["residual_norms"] = st.report.residual_norms;
    s["mass"] = st.report.mass;
    s["mass_hybrid"] = st.report.mass_hybrid;
    s["energy"] = st.report.energy;
    s["energy_reference"] = st.energy_reference;
    s["ansatz_energy_hybrid"] = st.ansatz_energy;
    s["ansatz_star_norm"] = st.ansatz_star_norm;
    s["phi"] = st.phi_value;
    s["correction_sup"] = st.report.correction_sup;
    s["branch_jump"] = st.report.branch_jump;
    stages.push_back(s);
    double el = st.report.eps * std::abs(std::log(st.report.eps));
    trend << st.report.eps << "," << st.report.rho << "," << st.nodes_across
          << "," << int(st.report.converged) << "," << st.report.iterations
          << "," << st.report.mass << "," << st.report.mass_hybrid << ","
          << st.report.energy << "," << st.energy_reference << ","
          << st.phi_value << "," << st.report.correction_sup << ","
          << st.report.correction_sup / el << "," << st.ansatz_star_norm << ","
          << int(st.report.branch_jump) << "\n";
  }
  doc["stages"] = stages;
  atomic_write(fs::path(cfg.out_dir) / "solve_reports.json", doc.dump(2) + "\n");
  std::ostringstream hs;
  hs << "# tool: bilap4 " << kVersion << "\n# config_hash: " << hex64(cfg.hash)
     << "\n# grid: per-stage (see nodes_across)\n# eps: schedule\n"
     << "# wall_time_s: " << wall_seconds(t0) << "\n";
  atomic_write(fs::path(cfg.out_dir) / "solve_trends.csv",
               hs.str() + trend.str());
  std::cout << "solve: " << res.stages.size() << " stages"
            << (res.failed ? " (failed at stage " +
                                 std::to_string(res.failed_index) + ")"
                           : "")
            << "\n";
  return res.failed ? 3 : 0;
}

int cmd_verify(const RunConfig& cfg, const std::vector<int>& only) {
  if (cfg.threads > 0) set_num_threads(cfg.threads);
  fs::create_directories(cfg.out_dir);
  VerifyOptions opts;
  opts.seed = cfg.seed;
  opts.threads = cfg.threads;
  for (int id : only) opts.only.insert(id);
  auto results = run_verify(opts, std::cout);
  // The summary is deterministic for a given config + seed: no wall time.
  std::string summary = format_summary(results, cfg.seed);
  atomic_write(fs::path(cfg.out_dir) / "verify_summary.json", summary);
  int failed = 0;
  for (const auto& r : results)
    if (!r.pass) ++failed;
  std::cout << results.size() << " criteria run, " << failed << " failed\n";
  return failed == 0 ? 0 : 1;
}

}  // namespace bilap4::cli
