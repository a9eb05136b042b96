// Acceptance battery at default resolution: one PASS/FAIL line per criterion.
#include <cstdio>
#include <iostream>

#include "spherelab/verify.hpp"

int main() {
  using namespace spherelab;
  int failed = 0;
  run_verify_suite({}, [&](const CriterionResult& r) {
    std::cout << format_result(r) << "  " << r.detail.dump() << std::endl;
    if (!r.pass) ++failed;
  });
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
