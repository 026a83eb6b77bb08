#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bilap4/errors.hpp"
#include "commands.hpp"

namespace {

using namespace bilap4;
using namespace bilap4::cli;

Point4 parse_point(const std::string& s) {
  Point4 p{};
  std::stringstream ss(s);
  std::string tok;
  int d = 0;
  while (std::getline(ss, tok, ',') && d < 4) p[size_t(d++)] = std::stod(tok);
  if (d != 4) throw InvalidDomainSpec("point needs 4 comma-separated values: " + s);
  return p;
}

// exit codes: 0 success, 1 criterion failure, 2 input error, 3 numerical
int classify(const Error& e) {
  if (dynamic_cast<const NoConvergence*>(&e) ||
      dynamic_cast<const JacobianSolveFailure*>(&e) ||
      dynamic_cast<const OverflowGuard*>(&e) ||
      dynamic_cast<const NonFinite*>(&e) ||
      dynamic_cast<const NonfiniteIntegrand*>(&e) ||
      dynamic_cast<const CoreUnderResolved*>(&e) ||
      dynamic_cast<const StageFailed*>(&e))
    return 3;
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical construction and verification of multi-bubble "
               "blow-up solutions of Delta^2 u = rho^4 k e^u on 4D domains"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_override;
  int threads = 0;
  uint64_t seed = 0;
  bool seed_set = false;
  app.add_option("--config", config_path, "JSON config file")->required();
  app.add_option("--out", out_override, "output directory override");
  app.add_option("--threads", threads, "worker threads");
  app.add_option("--seed", seed, "seed override")->each([&](const std::string&) {
    seed_set = true;
  });

  std::vector<std::string> xi_args;
  auto* green = app.add_subcommand("green", "Green's function regular parts");
  green->add_option("--xi", xi_args, "source point x1,x2,x3,x4 (repeatable)");

  int lattice = 5;
  auto* phi = app.add_subcommand("phi", "reduced-energy landscape");
  phi->add_option("--lattice", lattice, "lattice points per axis");

  int random_starts = 0;
  std::vector<std::string> start_args;
  auto* findc = app.add_subcommand("find-critical", "critical-point search");
  findc->add_option("--random-starts", random_starts, "seeded random starts");
  findc->add_option("--start", start_args,
                    "start: m points joined by ';' (repeatable)");

  std::string ansatz_xi = "auto";
  auto* ansatz = app.add_subcommand("ansatz", "multi-bubble ansatz diagnostics");
  ansatz->add_option("--xi", ansatz_xi,
                     "\"auto\" or m points joined by ';'");

  app.add_subcommand("solve", "Newton continuation along the eps schedule");

  std::vector<int> only;
  auto* verify = app.add_subcommand("verify", "acceptance criteria");
  verify->add_option("--only", only, "criterion ids to run");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = load_config(config_path);
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (threads > 0) cfg.threads = threads;
    if (seed_set) cfg.seed = seed;

    if (green->parsed()) {
      std::vector<Point4> xs;
      for (const auto& s : xi_args) xs.push_back(parse_point(s));
      return cmd_green(cfg, xs);
    }
    if (phi->parsed()) return cmd_phi(cfg, lattice);
    if (findc->parsed()) {
      std::vector<std::vector<Point4>> starts;
      for (const auto& s : start_args) {
        std::vector<Point4> one;
        std::stringstream ss(s);
        std::string tok;
        while (std::getline(ss, tok, ';')) one.push_back(parse_point(tok));
        starts.push_back(one);
      }
      return cmd_find_critical(cfg, random_starts, starts);
    }
    if (ansatz->parsed()) {
      bool auto_c = ansatz_xi == "auto";
      std::vector<Point4> xs;
      if (!auto_c) {
        std::stringstream ss(ansatz_xi);
        std::string tok;
        while (std::getline(ss, tok, ';')) xs.push_back(parse_point(tok));
      }
      return cmd_ansatz(cfg, auto_c, xs);
    }
    if (app.get_subcommand("solve")->parsed()) return cmd_solve(cfg);
    if (verify->parsed()) return cmd_verify(cfg, only);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return classify(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
