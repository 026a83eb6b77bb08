#include "config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace bilap4::cli {

using nlohmann::json;

uint64_t fnv1a(const std::string& bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

WeightFn RunConfig::weight() const {
  KExpr e = k_expr();
  Point4 c = k_center();
  return [e, c](const Point4& x) { return e.eval(x, c); };
}

namespace {

Point4 read_point(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 4)
    throw InvalidDomainSpec(what + " must be an array of 4 numbers");
  Point4 p;
  for (int d = 0; d < 4; ++d) p[size_t(d)] = j[size_t(d)].get<double>();
  return p;
}

}  // namespace

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidDomainSpec("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InvalidDomainSpec(std::string("config is not valid JSON: ") + e.what());
  }

  RunConfig cfg;
  if (!j.contains("domain")) throw InvalidDomainSpec("config needs a domain");
  const json& dom = j["domain"];
  std::string type = dom.value("type", "box");
  Point4 lo = read_point(dom.at("lo"), "domain.lo");
  Point4 hi = read_point(dom.at("hi"), "domain.hi");
  if (type == "box") {
    cfg.domain = DomainSpec::box(lo, hi);
  } else if (type == "box_with_hole") {
    cfg.domain = DomainSpec::box_with_hole(lo, hi,
                                           read_point(dom.at("hole_lo"), "hole_lo"),
                                           read_point(dom.at("hole_hi"), "hole_hi"));
  } else {
    throw InvalidDomainSpec("domain.type must be box or box_with_hole");
  }

  if (j.contains("grid")) {
    const json& g = j["grid"].contains("n") ? j["grid"]["n"] : j["grid"];
    cfg.grid_n.clear();
    if (g.is_number_integer()) {
      cfg.grid_n.push_back(g.get<int>());
    } else if (g.is_array()) {
      for (const auto& v : g) cfg.grid_n.push_back(v.get<int>());
    } else {
      throw InvalidDomainSpec("grid.n must be an integer or integer list");
    }
    for (int n : cfg.grid_n)
      if (n < 5) throw InvalidDomainSpec("grid.n entries must be >= 5");
  }

  cfg.k_source = j.value("k", std::string("1"));
  (void)KExpr::parse(cfg.k_source);  // validate now, errors carry offsets
  cfg.m = j.value("m", 1);
  if (cfg.m < 1 || cfg.m > 16)
    throw InvalidDomainSpec("m must be between 1 and 16");
  cfg.delta0 = j.value("delta0", 0.1);
  if (!(cfg.delta0 > 0.0))
    throw InvalidDomainSpec("delta0 must be positive");
  if (j.contains("eps_schedule")) {
    for (const auto& v : j["eps_schedule"])
      cfg.eps_schedule.push_back(v.get<double>());
    for (size_t i = 0; i < cfg.eps_schedule.size(); ++i) {
      double e = cfg.eps_schedule[i];
      if (!(e > 0.0 && e < 1.0))
        throw InvalidDomainSpec("eps_schedule entries must be in (0,1)");
      if (i > 0 && e >= cfg.eps_schedule[i - 1])
        throw InvalidDomainSpec("eps_schedule must be strictly decreasing");
    }
  }
  if (j.contains("tol")) {
    cfg.tol.linear = j["tol"].value("linear", 1e-8);
    cfg.tol.newton = j["tol"].value("newton", 1e-9);
    if (!(cfg.tol.linear > 0.0 && cfg.tol.linear <= 1e-2))
      throw InvalidDomainSpec("tol.linear must be in (0, 1e-2]");
  }
  if (j.contains("quadrature"))
    cfg.hybrid_quadrature = j["quadrature"].value("hybrid", true);
  cfg.seed = j.value("seed", uint64_t(20240809));
  cfg.threads = j.value("threads", 0);
  if (j.contains("r_center")) {
    cfg.r_center = read_point(j["r_center"], "r_center");
    cfg.r_center_set = true;
  }
  cfg.out_dir = j.value("out", std::string("out"));

  cfg.canonical = j.dump();  // nlohmann dumps keys sorted
  cfg.hash = fnv1a(cfg.canonical);
  return cfg;
}

}  // namespace bilap4::cli
