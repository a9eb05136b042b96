// Command-line front end: one-shot subcommands and scenario files.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "spherelab/errors.hpp"
#include "spherelab/homotopy.hpp"
#include "spherelab/operators.hpp"
#include "spherelab/rigidity.hpp"
#include "spherelab/scenario.hpp"
#include "spherelab/verify.hpp"

namespace {

using spherelab::json;

struct ImmersionFlags {
  std::string family = "round";
  int n = 2;
  std::string r = "0.25pi";
  int a = 1, b = 1;
  std::string r0 = "0.25pi";
  double eps = 1e-2;
  std::string h = "quadric";
  double squeeze = 1.0;
  std::string rotation = "identity";
  int seed = 1;
  int resolution = 64;
  std::string out_dir = ".";
};

void add_immersion_flags(CLI::App* cmd, ImmersionFlags& f) {
  cmd->add_option("--family", f.family, "round | clifford | radial_graph")->capture_default_str();
  cmd->add_option("--n", f.n, "domain dimension (round, radial_graph)")->capture_default_str();
  cmd->add_option("--r", f.r, "round radius; number or multiple of pi like 0.25pi")->capture_default_str();
  cmd->add_option("--a", f.a, "Clifford wrap degree in the first angle")->capture_default_str();
  cmd->add_option("--b", f.b, "Clifford wrap degree in the second angle")->capture_default_str();
  cmd->add_option("--r0", f.r0, "radial graph base radius")->capture_default_str();
  cmd->add_option("--eps", f.eps, "radial graph perturbation size")->capture_default_str();
  cmd->add_option("--profile", f.h, "radial graph profile: quadric | cubic")->capture_default_str();
  cmd->add_option("--squeeze", f.squeeze, "round family: squeeze diffeo factor")->capture_default_str();
  cmd->add_option("--rotation", f.rotation, "identity | random (seeded)")->capture_default_str();
  cmd->add_option("--seed", f.seed, "seed for random choices")->capture_default_str();
  cmd->add_option("--resolution", f.resolution, "samples per chart direction")->capture_default_str();
  cmd->add_option("--out-dir", f.out_dir, "directory for report.json, samples.csv, track.jsonl")
      ->capture_default_str();
}

// Plain numbers stay numbers; anything else ("0.25pi") is passed on as text.
json angle(const std::string& s) {
  std::size_t used = 0;
  try {
    const double x = std::stod(s, &used);
    if (used == s.size()) return x;
  } catch (const std::exception&) {
  }
  return s;
}

json immersion_spec(const ImmersionFlags& f) {
  json spec = {{"family", f.family}};
  if (f.family == "round") {
    spec["n"] = f.n;
    spec["r"] = angle(f.r);
    if (f.squeeze != 1.0) spec["squeeze"] = f.squeeze;
  } else if (f.family == "clifford") {
    spec["a"] = f.a;
    spec["b"] = f.b;
  } else if (f.family == "radial_graph") {
    spec["n"] = f.n;
    spec["r0"] = angle(f.r0);
    spec["eps"] = f.eps;
    spec["h"] = f.h;
  }
  if (f.rotation != "identity") spec["rotation"] = f.rotation;
  return spec;
}

int finish(const spherelab::ScenarioOutcome& out, const std::string& out_dir, bool print_result) {
  try {
    spherelab::write_outputs(out, out_dir);
  } catch (const std::exception& e) {
    std::cerr << json{{"status", "io_error"}, {"message", e.what()}}.dump() << "\n";
    return spherelab::kExitNumeric;
  }
  const json& rep = out.report;
  if (rep.contains("error")) std::cerr << json{{"status", rep["status"]}, {"error", rep["error"]}}.dump() << "\n";
  if (print_result && rep.contains("operations") && !rep["operations"].empty())
    std::cout << rep["operations"].back()["result"].dump(2) << "\n";
  if (!print_result) std::cout << rep.value("status", "unknown") << "\n";
  return out.exit_code;
}

int run_ops(const ImmersionFlags& f, json ops) {
  const json sc = {{"schema", spherelab::kScenarioSchema},
                   {"seed", f.seed},
                   {"resolution", f.resolution},
                   {"immersion", immersion_spec(f)},
                   {"operations", std::move(ops)}};
  return finish(spherelab::run_scenario(sc), f.out_dir, true);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hypersurfaces of spheres: curvature, normal translates, duals, flows and quotients"};
  app.require_subcommand(1);

  ImmersionFlags f;

  auto* analyze = app.add_subcommand("analyze", "principal curvatures, radii interval J and hypotheses");
  add_immersion_flags(analyze, f);

  std::string by = "0.1";
  bool as_track = false;
  int steps = spherelab::kTrackSteps;
  auto* translate = app.add_subcommand("translate", "normal translate f_r, or the track 0 -> r with --track");
  add_immersion_flags(translate, f);
  translate->add_option("--by", by, "translation distance r; number or multiple of pi")->capture_default_str();
  translate->add_flag("--track", as_track, "run the translate track from 0 to r");
  translate->add_option("--steps", steps, "track steps")->capture_default_str();

  auto* dual = app.add_subcommand("dual", "dual hypersurface and its curvature data");
  add_immersion_flags(dual, f);

  double s_min = 0.2, s_step = 0.05;
  bool check_embedding = false;
  auto* moebius = app.add_subcommand("moebius-flow", "Moebius flow monitor from s = 1 down to s_min");
  add_immersion_flags(moebius, f);
  moebius->add_option("--s-min", s_min, "smallest flow parameter")->capture_default_str();
  moebius->add_option("--step", s_step, "grid step")->capture_default_str();
  moebius->add_flag("--check-embedding", check_embedding, "test each step for self-intersections");

  bool no_embedding = false;
  auto* zeta = app.add_subcommand("zeta-flow", "conjugated zeta track to the equatorial sphere");
  add_immersion_flags(zeta, f);
  zeta->add_option("--steps", steps, "track steps")->capture_default_str();
  zeta->add_flag("--no-embedding", no_embedding, "skip the per-step self-intersection test");

  auto* deform = app.add_subcommand("deform", "deformation of a convex hypersurface to a round sphere");
  add_immersion_flags(deform, f);
  deform->add_option("--steps", steps, "steps per stage")->capture_default_str();

  double eps = spherelab::kIntersectionEps;
  bool of_dual = false;
  auto* embed = app.add_subcommand("check-embedding", "self-intersection multiplicity");
  add_immersion_flags(embed, f);
  embed->add_option("--tol", eps, "distance below which images coincide")->capture_default_str();
  embed->add_flag("--dual", of_dual, "test the dual instead");

  std::string deck = "antipodal";
  double eps_link = 0.0;
  auto* quotient = app.add_subcommand("quotient", "preimage components and multiplicity bound under a deck group");
  add_immersion_flags(quotient, f);
  quotient->add_option("--deck", deck, "trivial | antipodal | lens:p,q")->capture_default_str();
  quotient->add_option("--eps-link", eps_link, "linking distance, 0 for 3x median spacing")->capture_default_str();

  spherelab::VerifyOptions vopt;
  int only = 0;
  std::string verify_out;
  auto* verify = app.add_subcommand("verify-suite", "run the acceptance battery and print a pass/fail table");
  verify->add_option("--resolution", vopt.resolution, "samples per chart direction")->capture_default_str();
  verify->add_option("--seed", vopt.seed, "seed for random choices")->capture_default_str();
  verify->add_option("--only", only, "run a single criterion (1-13)");
  verify->add_option("--report", verify_out, "write the results as JSON to this file");

  std::string scenario_file, run_out = ".";
  auto* run = app.add_subcommand("run", "execute a scenario file");
  run->add_option("scenario", scenario_file, "scenario JSON")->required();
  run->add_option("--out-dir", run_out, "directory for report.json, samples.csv, track.jsonl")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : spherelab::kExitSchema;
  }

  if (*analyze) return run_ops(f, json::array({{{"op", "analyze"}}}));
  if (*translate) {
    if (as_track) return run_ops(f, json::array({{{"op", "translate_track"}, {"to", angle(by)}, {"steps", steps}}}));
    return run_ops(f, json::array({{{"op", "translate"}, {"r", angle(by)}}, {{"op", "analyze"}}}));
  }
  if (*dual) return run_ops(f, json::array({{{"op", "dual"}}, {{"op", "analyze"}}}));
  if (*moebius)
    return run_ops(f, json::array({{{"op", "moebius_flow"},
                                    {"s_min", s_min},
                                    {"step", s_step},
                                    {"check_embedding", check_embedding}}}));
  if (*zeta) return run_ops(f, json::array({{{"op", "zeta_flow"}, {"steps", steps}, {"check_embedding", !no_embedding}}}));
  if (*deform) return run_ops(f, json::array({{{"op", "deform"}, {"steps", steps}}}));
  if (*embed) return run_ops(f, json::array({{{"op", "check_embedding"}, {"eps", eps}, {"dual", of_dual}}}));
  if (*quotient) return run_ops(f, json::array({{{"op", "quotient"}, {"deck", deck}, {"eps_link", eps_link}}}));
  if (*verify) {
    std::vector<spherelab::CriterionResult> results;
    auto print = [](const spherelab::CriterionResult& r) { std::cout << spherelab::format_result(r) << std::endl; };
    if (only != 0) {
      if (only < 1 || only >= spherelab::kCriterionCount) {
        std::cerr << "verify-suite: --only expects 1 to " << spherelab::kCriterionCount - 1 << "\n";
        return spherelab::kExitSchema;
      }
      results.push_back(spherelab::run_criterion(only, vopt));
      print(results.back());
    } else {
      results = spherelab::run_verify_suite(vopt, print);
    }
    bool all = true;
    json out = json::array();
    for (const auto& r : results) {
      all = all && r.pass;
      out.push_back(spherelab::to_json(r));
    }
    if (!verify_out.empty()) std::ofstream(verify_out) << out.dump(2) << "\n";
    std::cout << (all ? "all criteria passed" : "some criteria failed") << std::endl;
    return all ? spherelab::kExitOk : spherelab::kExitAssertion;
  }
  if (*run) {
    std::ifstream in(scenario_file);
    if (!in) {
      std::cerr << json{{"status", "schema_error"}, {"error", {{"kind", "schema"}, {"message", "cannot read " + scenario_file}}}}.dump()
                << "\n";
      return spherelab::kExitSchema;
    }
    std::stringstream text;
    text << in.rdbuf();
    return finish(spherelab::run_scenario_text(text.str()), run_out, false);
  }
  return spherelab::kExitSchema;
}
