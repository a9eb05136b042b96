#include <numbers>

#include "doctest.h"
#include "spherelab/errors.hpp"
#include "spherelab/scenario.hpp"
#include "spherelab/verify.hpp"

using namespace spherelab;
using std::numbers::pi;

namespace {

json scenario(json immersion, json ops) {
  return {{"schema", 1}, {"resolution", 12}, {"immersion", std::move(immersion)}, {"operations", std::move(ops)}};
}

const json kRound = {{"family", "round"}, {"r", "0.25pi"}};
const json kClifford = {{"family", "clifford"}, {"a", 1}, {"b", 1}};

}  // namespace

TEST_CASE("angles as multiples of pi") {
  CHECK(parse_angle(json("0.25pi"), "x") == doctest::Approx(pi / 4).epsilon(1e-15));
  CHECK(parse_angle(json("pi"), "x") == pi);
  CHECK(parse_angle(json("-pi"), "x") == -pi);
  CHECK(parse_angle(json("-1.5pi"), "x") == doctest::Approx(-1.5 * pi));
  CHECK(parse_angle(json(0.3), "x") == 0.3);
  CHECK_THROWS_AS(parse_angle(json("0.25"), "x"), SchemaError);
  CHECK_THROWS_AS(parse_angle(json("quarterpi"), "x"), SchemaError);
  CHECK_THROWS_AS(parse_angle(json(true), "x"), SchemaError);
}

TEST_CASE("schema errors are found before anything runs") {
  CHECK(run_scenario({{"operations", json::array()}}).exit_code == kExitSchema);
  CHECK(run_scenario({{"schema", 2}}).exit_code == kExitSchema);
  CHECK(run_scenario({{"schema", 1}, {"colour", "red"}}).exit_code == kExitSchema);
  CHECK(run_scenario(scenario({{"family", "round"}, {"radius", 1}}, json::array({{{"op", "analyze"}}}))).exit_code ==
        kExitSchema);
  CHECK(run_scenario(scenario(kRound, json::array({{{"op", "spin"}}}))).exit_code == kExitSchema);
  CHECK(run_scenario(scenario(kRound, json::array({{{"op", "translate"}, {"r", "wide"}}}))).exit_code == kExitSchema);
  CHECK(run_scenario(scenario(kRound, json::array({{{"op", "quotient"}, {"deck", "lens:4,2"}}}))).exit_code ==
        kExitSchema);
  CHECK(run_scenario({{"schema", 1}, {"operations", json::array({{{"op", "analyze"}}})}}).exit_code == kExitSchema);
  // The unknown key sits after a valid degenerate translate: validation still wins.
  const ScenarioOutcome late = run_scenario(
      scenario(kClifford, json::array({{{"op", "translate"}, {"r", "0.25pi"}}, {{"op", "dual"}, {"x", 1}}})));
  CHECK(late.exit_code == kExitSchema);
  CHECK(late.report["error"]["message"].get<std::string>().find("unknown key 'x'") != std::string::npos);
  CHECK(run_scenario_text("{ not json").exit_code == kExitSchema);
}

TEST_CASE("empty scenario") {
  const ScenarioOutcome out = run_scenario({{"schema", 1}, {"name", "empty"}, {"operations", json::array()}});
  CHECK(out.exit_code == kExitOk);
  CHECK(out.report["operations"].empty());
  CHECK(out.report["status"] == "ok");
  CHECK(out.samples_csv.empty());
  CHECK(out.track_jsonl.empty());
}

TEST_CASE("assertions") {
  const json ops = json::array({{{"op", "analyze"}},
                                {{"op", "assert"}, {"pointer", "/J_lo"}, {"equals", "0.25pi"}, {"tol", 1e-6}, {"mod_pi", true}},
                                {{"op", "assert"}, {"pointer", "/J_hi"}, {"equals", "0.75pi"}, {"tol", 1e-6}, {"mod_pi", true}},
                                {{"op", "assert"}, {"pointer", "/min_k"}, {"min", -1.0 - 1e-8}, {"max", -1.0 + 1e-8}}});
  const ScenarioOutcome ok = run_scenario(scenario(kClifford, ops));
  CHECK(ok.exit_code == kExitOk);
  CHECK(ok.report["assertions"]["passed"] == 3);
  CHECK(ok.samples_csv.find("kappa1") != std::string::npos);

  const ScenarioOutcome bad = run_scenario(scenario(
      kRound, json::array({{{"op", "analyze"}}, {{"op", "assert"}, {"pointer", "/locally_convex"}, {"equals", false}},
                           {{"op", "assert"}, {"pointer", "/no_such_key"}, {"equals", 1}}})));
  CHECK(bad.exit_code == kExitAssertion);
  CHECK(bad.report["assertions"]["failed"] == 2);
  CHECK(bad.report["status"] == "assertion_failed");
}

TEST_CASE("numeric failures stop the run with a diagnostic") {
  const ScenarioOutcome out = run_scenario(
      scenario(kClifford, json::array({{{"op", "translate"}, {"r", "0.25pi"}}, {{"op", "analyze"}}})));
  CHECK(out.exit_code == kExitNumeric);
  CHECK(out.report["error"]["kind"] == "degeneracy");
  CHECK(out.report["error"]["operation"] == 0);
  CHECK(out.report["error"]["message"].get<std::string>().find("principal radius hit") != std::string::npos);
  CHECK(out.report["operations"].empty());
}

TEST_CASE("incomplete tracks") {
  const json track = {{"op", "translate_track"}, {"to", "0.25pi"}, {"steps", 5}};
  const ScenarioOutcome strict = run_scenario(scenario(kClifford, json::array({track})));
  CHECK(strict.exit_code == kExitNumeric);
  CHECK_FALSE(strict.track_jsonl.empty());
  json allowed = track;
  allowed["allow_incomplete"] = true;
  const ScenarioOutcome loose = run_scenario(scenario(
      kClifford, json::array({allowed, {{"op", "assert"}, {"pointer", "/complete"}, {"equals", false}}})));
  CHECK(loose.exit_code == kExitOk);
}

TEST_CASE("pipelines and determinism") {
  const json sc = scenario({{"family", "round"}, {"r", 0.6}, {"rotation", "random"}, {"squeeze", 1.3}},
                           json::array({{{"op", "translate"}, {"r", 0.2}},
                                        {{"op", "analyze"}},
                                        {{"op", "assert"}, {"pointer", "/J_mid"}, {"equals", 0.4}, {"tol", 1e-8}},
                                        {{"op", "dual"}},
                                        {{"op", "check_embedding"}},
                                        {{"op", "assert"}, {"pointer", "/embedded"}, {"equals", true}}}));
  const ScenarioOutcome a = run_scenario(sc), b = run_scenario(sc);
  CHECK(a.exit_code == kExitOk);
  CHECK(a.report.dump() == b.report.dump());
  CHECK(a.samples_csv == b.samples_csv);
}

TEST_CASE("verify criteria") {
  VerifyOptions opt;
  opt.resolution = 16;
  const CriterionResult c2 = run_criterion(2, opt);
  CHECK(c2.pass);
  CHECK(c2.title == "Clifford data");
  CHECK(run_criterion(8, opt).pass);
  CHECK(format_result(c2).rfind("PASS  2", 0) == 0);
  CHECK_THROWS_AS(run_criterion(14, opt), DomainError);
  CHECK_THROWS_AS(run_criterion(0, opt), DomainError);
}
