#pragma once

#include <functional>
#include <string>
#include <vector>

#include "spherelab/immersion.hpp"

namespace spherelab {

struct VerifyOptions {
  int resolution = 64;
  // Resolution of the brute-force all-pairs oracle in the embedding check.
  int oracle_resolution = 16;
  unsigned seed = 1;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  double seconds = 0.0;
  // Measured quantities and the thresholds they were compared against.
  json detail = json::object();
};

inline constexpr int kCriterionCount = 14;
// Wall-time budget of the whole battery.
inline constexpr double kSuiteBudgetSeconds = 600.0;

// Criteria 1 to 13. An exception inside a criterion is a failure with the
// message recorded under detail["error"].
CriterionResult run_criterion(int id, const VerifyOptions& opt = {});
// All criteria in order; the last one checks the total wall time. The callback
// sees each result as soon as it is available.
std::vector<CriterionResult> run_verify_suite(const VerifyOptions& opt = {},
                                              const std::function<void(const CriterionResult&)>& on_result = {});

// "PASS  3  radii shift law  (12.4 s)"
std::string format_result(const CriterionResult& r);
json to_json(const CriterionResult& r);

}  // namespace spherelab
