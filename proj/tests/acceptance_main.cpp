// Acceptance suite: runs every criterion at its pinned tolerance and prints
// one PASS/FAIL line each. Exit code 0 only if all pass.
#include <cstdio>
#include <cstdlib>
#include <iostream>

#include "bilap4/verify.hpp"

int main(int argc, char** argv) {
  bilap4::VerifyOptions opts;
  for (int i = 1; i < argc; ++i) {
    int id = std::atoi(argv[i]);
    if (id >= 1 && id <= 14) opts.only.insert(id);
  }
  auto results = bilap4::run_verify(opts, std::cout);
  int failed = 0;
  for (const auto& r : results)
    if (!r.pass) ++failed;
  std::printf("%zu criteria run, %d failed\n", results.size(), failed);
  return failed == 0 ? 0 : 1;
}
