#pragma once

#include <string>

#include "spherelab/immersion.hpp"

namespace spherelab {

inline constexpr int kScenarioSchema = 1;

inline constexpr int kExitOk = 0;
inline constexpr int kExitAssertion = 1;
inline constexpr int kExitSchema = 2;
inline constexpr int kExitNumeric = 3;

// A number, or a string "<x>pi" meaning x * pi ("0.25pi", "-pi", "pi").
// Throws SchemaError naming `where` otherwise.
double parse_angle(const json& v, const std::string& where);

// Immersion from a spec such as {"family": "round", "r": "0.25pi"}.
// Keys: family (round | clifford | radial_graph), n, r, a, b, r0, eps, h,
// squeeze, rotation ("identity" | "random" | square matrix).
Immersion build_immersion(const json& spec, int resolution, unsigned seed);

struct ScenarioOutcome {
  int exit_code = kExitOk;
  json report;
  // Per-sample curvature table of the last analyze, empty if none ran.
  std::string samples_csv;
  // One line per track step of every track operation, in order.
  std::string track_jsonl;
};

// Validates the whole scenario first (SchemaError becomes exit 2 with nothing
// executed), then runs the operations in order. A library Error stops the run
// with exit 3; failed assertions give exit 1 after all operations ran. The
// report records the status and a structured diagnostic.
ScenarioOutcome run_scenario(const json& scenario);
// As run_scenario, starting from text; invalid JSON is a schema error.
ScenarioOutcome run_scenario_text(const std::string& text);

// Writes report, samples and track files into dir under the names from the
// scenario's "outputs" (defaults report.json, samples.csv, track.jsonl).
// Empty samples/track tables are not written.
void write_outputs(const ScenarioOutcome& out, const std::string& dir);

}  // namespace spherelab
