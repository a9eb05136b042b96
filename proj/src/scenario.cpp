#include "spherelab/scenario.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "spherelab/curvature.hpp"
#include "spherelab/errors.hpp"
#include "spherelab/homotopy.hpp"
#include "spherelab/operators.hpp"
#include "spherelab/rigidity.hpp"

namespace spherelab {
namespace {

using std::numbers::pi;

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw SchemaError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw SchemaError(where + ": unknown key '" + key + "'");
  }
}

double get_number(const json& obj, const std::string& key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw SchemaError(where + "." + key + ": expected a number");
  return obj[key].get<double>();
}

int get_int(const json& obj, const std::string& key, int fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) throw SchemaError(where + "." + key + ": expected an integer");
  return obj[key].get<int>();
}

bool get_bool(const json& obj, const std::string& key, bool fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) throw SchemaError(where + "." + key + ": expected true or false");
  return obj[key].get<bool>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& fallback,
                       const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) throw SchemaError(where + "." + key + ": expected a string");
  return obj[key].get<std::string>();
}

double get_angle(const json& obj, const std::string& key, std::optional<double> fallback, const std::string& where) {
  if (!obj.contains(key)) {
    if (!fallback) throw SchemaError(where + ": missing '" + key + "'");
    return *fallback;
  }
  return parse_angle(obj[key], where + "." + key);
}

Rotation parse_rotation(const json& v, int dim, unsigned seed, const std::string& where) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "identity") return Rotation::identity(dim);
    if (s == "random") {
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> g;
      Matrix a(dim, dim);
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = g(rng);
      Matrix q = Eigen::HouseholderQR<Matrix>(a).householderQ();
      if (q.determinant() < 0) q.col(0) = -q.col(0);
      return Rotation(q);
    }
    throw SchemaError(where + ": expected \"identity\", \"random\" or a matrix");
  }
  if (!v.is_array() || static_cast<int>(v.size()) != dim) throw SchemaError(where + ": expected a square matrix");
  Matrix m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    if (!v[i].is_array() || static_cast<int>(v[i].size()) != dim) throw SchemaError(where + ": expected a square matrix");
    for (int j = 0; j < dim; ++j) {
      if (!v[i][j].is_number()) throw SchemaError(where + ": matrix entries must be numbers");
      m(i, j) = v[i][j].get<double>();
    }
  }
  try {
    return Rotation(m);
  } catch (const DomainError& e) {
    throw SchemaError(where + ": " + e.what());
  }
}

struct Tolerances {
  double radius_margin = kRadiusMargin;
  double curvature_margin = kCurvatureMargin;
  double intersection_eps = kIntersectionEps;
};

Tolerances parse_tolerances(const json& t) {
  const std::string where = "tolerances";
  check_keys(t, {"radius_margin", "curvature_margin", "intersection_eps"}, where);
  Tolerances out;
  out.radius_margin = get_number(t, "radius_margin", out.radius_margin, where);
  out.curvature_margin = get_number(t, "curvature_margin", out.curvature_margin, where);
  out.intersection_eps = get_number(t, "intersection_eps", out.intersection_eps, where);
  if (out.radius_margin < 0 || out.curvature_margin < 0 || out.intersection_eps <= 0)
    throw SchemaError(where + ": margins must be non-negative and intersection_eps positive");
  return out;
}

struct Context {
  std::optional<Immersion> current;
  Tolerances tol;
  json last_result;
  std::string samples_csv;
  std::ostringstream track_jsonl;
};

Immersion& need(Context& ctx) {
  if (!ctx.current) throw SchemaError("operation needs an immersion");
  return *ctx.current;
}

// Incomplete tracks are numeric failures unless the scenario allows them.
json track_result(Context& ctx, const Track& t, const json& params) {
  write_jsonl(ctx.track_jsonl, t);
  if (!t.complete && !params.value("allow_incomplete", false)) throw NumericError(t.failure);
  return to_json(t);
}

bool compare(const json& actual, const json& expected, double tol, bool mod) {
  if (actual.is_number() && (expected.is_number() || expected.is_string())) {
    const double a = actual.get<double>(), e = parse_angle(expected, "assert.equals");
    return (mod ? circle_distance(a, e) : std::abs(a - e)) <= tol;
  }
  return actual == expected;
}

struct OpSpec {
  std::set<std::string> keys;
  std::function<void(const json&, const std::string&)> validate;
  std::function<json(Context&, const json&)> run;
};

const std::map<std::string, OpSpec>& op_table() {
  static const std::map<std::string, OpSpec> table = {
      {"analyze",
       {{},
        nullptr,
        [](Context& ctx, const json&) {
          const auto spec = spectrum(need(ctx));
          std::ostringstream os;
          write_samples_csv(os, spec);
          ctx.samples_csv = os.str();
          const HypothesisReport h = classify(spec);
          json r = to_json(h);
          r["J_width"] = h.j.interval.width();
          r["samples"] = spec.size();
          return r;
        }}},
      {"translate",
       {{"r"},
        [](const json& p, const std::string& w) { get_angle(p, "r", std::nullopt, w); },
        [](Context& ctx, const json& p) {
          ctx.current = normal_translate(need(ctx), get_angle(p, "r", std::nullopt, ""), ctx.tol.radius_margin);
          return json{{"provenance", ctx.current->provenance()}};
        }}},
      {"dual",
       {{},
        nullptr,
        [](Context& ctx, const json&) {
          ctx.current = dual(need(ctx), ctx.tol.curvature_margin);
          return json{{"provenance", ctx.current->provenance()}};
        }}},
      {"moebius",
       {{"s"},
        [](const json& p, const std::string& w) {
          const double s = get_number(p, "s", 1.0, w);
          if (!(s > 0.0 && s <= 1.0)) throw SchemaError(w + ".s: expected 0 < s <= 1");
        },
        [](Context& ctx, const json& p) {
          const Circumcap cap = circumcenter(need(ctx).points());
          ctx.current = apply_moebius(need(ctx), cap.center, get_number(p, "s", 1.0, ""));
          return json{{"center", std::vector<double>(cap.center.v().begin(), cap.center.v().end())},
                      {"cap_radius", cap.radius}};
        }}},
      {"translate_track",
       {{"from", "to", "steps", "allow_incomplete"},
        [](const json& p, const std::string& w) {
          get_angle(p, "from", 0.0, w);
          get_angle(p, "to", std::nullopt, w);
          if (get_int(p, "steps", kTrackSteps, w) < 2) throw SchemaError(w + ".steps: expected at least 2");
          get_bool(p, "allow_incomplete", false, w);
        },
        [](Context& ctx, const json& p) {
          const auto grid = uniform_grid(get_angle(p, "from", 0.0, ""), get_angle(p, "to", std::nullopt, ""),
                                         get_int(p, "steps", kTrackSteps, ""));
          return track_result(ctx, track_normal_translate(need(ctx), grid), p);
        }}},
      {"moebius_flow",
       {{"s_min", "step", "check_embedding", "allow_incomplete"},
        [](const json& p, const std::string& w) {
          const double s_min = get_number(p, "s_min", 0.2, w), step = get_number(p, "step", 0.05, w);
          if (!(s_min > 0.0 && s_min <= 1.0 && step > 0.0)) throw SchemaError(w + ": expected 0 < s_min <= 1, step > 0");
          get_bool(p, "check_embedding", false, w);
          get_bool(p, "allow_incomplete", false, w);
        },
        [](Context& ctx, const json& p) {
          const auto grid = decreasing_grid(get_number(p, "s_min", 0.2, ""), get_number(p, "step", 0.05, ""));
          return track_result(ctx, track_moebius(need(ctx), grid, get_bool(p, "check_embedding", false, "")), p);
        }}},
      {"zeta_flow",
       {{"steps", "check_embedding", "allow_incomplete"},
        [](const json& p, const std::string& w) {
          if (get_int(p, "steps", kTrackSteps, w) < 2) throw SchemaError(w + ".steps: expected at least 2");
          get_bool(p, "check_embedding", true, w);
          get_bool(p, "allow_incomplete", false, w);
        },
        [](Context& ctx, const json& p) {
          return track_result(ctx,
                              track_zeta(need(ctx), get_int(p, "steps", kTrackSteps, ""),
                                         get_bool(p, "check_embedding", true, "")),
                              p);
        }}},
      {"deform",
       {{"steps", "allow_incomplete"},
        [](const json& p, const std::string& w) {
          if (get_int(p, "steps", kTrackSteps, w) < 2) throw SchemaError(w + ".steps: expected at least 2");
          get_bool(p, "allow_incomplete", false, w);
        },
        [](Context& ctx, const json& p) {
          return track_result(ctx, deform_to_round(need(ctx), get_int(p, "steps", kTrackSteps, "")), p);
        }}},
      {"check_embedding",
       {{"eps", "dual"},
        [](const json& p, const std::string& w) {
          if (get_number(p, "eps", 1.0, w) <= 0.0) throw SchemaError(w + ".eps: expected a positive number");
          get_bool(p, "dual", false, w);
        },
        [](Context& ctx, const json& p) {
          const double eps = get_number(p, "eps", ctx.tol.intersection_eps, "");
          const Immersion& f = need(ctx);
          return to_json(get_bool(p, "dual", false, "") ? dual_embedding_check(f, eps) : self_intersections(f, eps));
        }}},
      {"quotient",
       {{"deck", "eps_link"},
        [](const json& p, const std::string& w) {
          try {
            deck_from_string(get_string(p, "deck", "antipodal", w), 2);
          } catch (const DomainError& e) {
            throw SchemaError(w + ".deck: " + e.what());
          }
          if (get_number(p, "eps_link", 0.0, w) < 0.0) throw SchemaError(w + ".eps_link: expected >= 0");
        },
        [](Context& ctx, const json& p) {
          const Immersion& f = need(ctx);
          const DeckGroup gamma = deck_from_string(get_string(p, "deck", "antipodal", ""), f.n());
          const PreimageReport pre = preimage_components(f, gamma, get_number(p, "eps_link", 0.0, ""));
          return json{{"deck", gamma.name},
                      {"preimage", to_json(pre)},
                      {"multiplicity", to_json(multiplicity_bound_check(f, gamma))}};
        }}},
      {"factor",
       {{},
        nullptr,
        [](Context& ctx, const json&) {
          const FactorReport r = irreducible_factor(need(ctx));
          return json{{"symmetry_order", r.symmetry_order}, {"factor", r.factor}};
        }}},
      {"assert",
       {{"pointer", "equals", "min", "max", "tol", "mod_pi"},
        [](const json& p, const std::string& w) {
          const std::string ptr = get_string(p, "pointer", "", w);
          try {
            json::json_pointer check(ptr);
          } catch (const json::exception& e) {
            throw SchemaError(w + ".pointer: " + e.what());
          }
          if (!p.contains("equals") && !p.contains("min") && !p.contains("max"))
            throw SchemaError(w + ": needs one of equals, min, max");
          if (p.contains("min")) parse_angle(p["min"], w + ".min");
          if (p.contains("max")) parse_angle(p["max"], w + ".max");
          if (p.contains("equals") && (p["equals"].is_string() || p["equals"].is_number()))
            parse_angle(p["equals"], w + ".equals");
          if (get_number(p, "tol", 0.0, w) < 0.0) throw SchemaError(w + ".tol: expected >= 0");
          get_bool(p, "mod_pi", false, w);
        },
        [](Context& ctx, const json& p) {
          const json::json_pointer ptr(get_string(p, "pointer", "", ""));
          json r = {{"pointer", ptr.to_string()}};
          if (!ctx.last_result.contains(ptr)) {
            r["pass"] = false;
            r["actual"] = nullptr;
            return r;
          }
          const json& actual = ctx.last_result[ptr];
          const double tol = get_number(p, "tol", 0.0, "");
          bool pass = true;
          if (p.contains("equals")) pass = pass && compare(actual, p["equals"], tol, get_bool(p, "mod_pi", false, ""));
          if (p.contains("min")) pass = pass && actual.is_number() && actual.get<double>() >= parse_angle(p["min"], "") - tol;
          if (p.contains("max")) pass = pass && actual.is_number() && actual.get<double>() <= parse_angle(p["max"], "") + tol;
          r["actual"] = actual;
          r["pass"] = pass;
          return r;
        }}},
  };
  return table;
}

void validate_op(const json& op, std::size_t index) {
  const std::string where = "operations[" + std::to_string(index) + "]";
  if (!op.is_object() || !op.contains("op") || !op["op"].is_string())
    throw SchemaError(where + ": expected an object with a string 'op'");
  const std::string name = op["op"].get<std::string>();
  const auto it = op_table().find(name);
  if (it == op_table().end()) throw SchemaError(where + ": unknown operation '" + name + "'");
  std::set<std::string> keys = it->second.keys;
  keys.insert("op");
  check_keys(op, keys, where);
  if (it->second.validate) it->second.validate(op, where);
}

struct Validated {
  std::string name;
  unsigned seed = 1;
  int resolution = 64;
  Tolerances tol;
  json outputs;
};

Validated validate(const json& sc) {
  check_keys(sc, {"schema", "name", "seed", "resolution", "immersion", "operations", "tolerances", "outputs"},
             "scenario");
  if (!sc.contains("schema") || sc["schema"] != kScenarioSchema)
    throw SchemaError("scenario: 'schema' must be " + std::to_string(kScenarioSchema));
  Validated v;
  v.name = get_string(sc, "name", "", "scenario");
  const int seed = get_int(sc, "seed", 1, "scenario");
  if (seed < 0) throw SchemaError("scenario.seed: expected >= 0");
  v.seed = static_cast<unsigned>(seed);
  v.resolution = get_int(sc, "resolution", 64, "scenario");
  if (v.resolution < 4 || v.resolution > 512) throw SchemaError("scenario.resolution: expected 4 .. 512");
  if (sc.contains("tolerances")) v.tol = parse_tolerances(sc["tolerances"]);
  v.outputs = {{"report", "report.json"}, {"samples", "samples.csv"}, {"track", "track.jsonl"}};
  if (sc.contains("outputs")) {
    check_keys(sc["outputs"], {"report", "samples", "track"}, "outputs");
    for (const auto& [key, value] : sc["outputs"].items()) v.outputs[key] = get_string(sc["outputs"], key, "", "outputs");
  }
  if (sc.contains("operations")) {
    if (!sc["operations"].is_array()) throw SchemaError("scenario.operations: expected an array");
    for (std::size_t i = 0; i < sc["operations"].size(); ++i) validate_op(sc["operations"][i], i);
    if (!sc["operations"].empty() && !sc.contains("immersion")) throw SchemaError("scenario: missing 'immersion'");
  }
  return v;
}

json error_json(const char* kind, const std::string& message, std::optional<std::size_t> op, const json& ops) {
  json e = {{"kind", kind}, {"message", message}};
  if (op) {
    e["operation"] = *op;
    e["op"] = ops[*op]["op"];
  }
  return e;
}

}  // namespace

double parse_angle(const json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (!v.is_string()) throw SchemaError(where + ": expected a number or a string like \"0.25pi\"");
  std::string s = v.get<std::string>();
  if (s.size() < 2 || s.substr(s.size() - 2) != "pi") throw SchemaError(where + ": cannot read angle '" + s + "'");
  s.resize(s.size() - 2);
  if (s.empty() || s == "+") return pi;
  if (s == "-") return -pi;
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw SchemaError(where + ": cannot read angle '" + v.get<std::string>() + "'");
  return x * pi;
}

Immersion build_immersion(const json& spec, int resolution, unsigned seed) {
  const std::string w = "immersion";
  if (!spec.is_object()) throw SchemaError(w + ": expected an object");
  const std::string family = get_string(spec, "family", "", w);
  std::optional<Immersion> f;
  if (family == "round") {
    check_keys(spec, {"family", "n", "r", "squeeze", "rotation"}, w);
    const int n = get_int(spec, "n", 2, w);
    if (n != 2 && n != 3) throw SchemaError(w + ".n: expected 2 or 3");
    const double lambda = get_number(spec, "squeeze", 1.0, w);
    if (lambda <= 0.0) throw SchemaError(w + ".squeeze: expected a positive number");
    if (lambda != 1.0 && n != 2) throw SchemaError(w + ".squeeze: only for n = 2");
    const Rotation q = parse_rotation(spec.value("rotation", json("identity")), n + 2, seed, w + ".rotation");
    return family_round(n, get_angle(spec, "r", pi / 4, w), q, lambda == 1.0 ? identity_diffeo() : squeeze_diffeo(lambda),
                        resolution);
  }
  if (family == "clifford") {
    check_keys(spec, {"family", "a", "b", "rotation"}, w);
    f = family_clifford(get_int(spec, "a", 1, w), get_int(spec, "b", 1, w), resolution);
  } else if (family == "radial_graph") {
    check_keys(spec, {"family", "n", "r0", "eps", "h", "rotation"}, w);
    const int n = get_int(spec, "n", 2, w);
    if (n != 2 && n != 3) throw SchemaError(w + ".n: expected 2 or 3");
    f = family_radial_graph(n, get_angle(spec, "r0", pi / 4, w), get_number(spec, "eps", 1e-2, w),
                            radial_profile_from_string(get_string(spec, "h", "quadric", w)), resolution);
  } else {
    throw SchemaError(w + ".family: expected round, clifford or radial_graph");
  }
  if (spec.contains("rotation")) {
    const Rotation q = parse_rotation(spec["rotation"], f->ambient_dim(), seed, w + ".rotation");
    if (!q.matrix().isIdentity(0.0)) return postcompose_rotation(*f, q);
  }
  return *f;
}

ScenarioOutcome run_scenario(const json& sc) {
  ScenarioOutcome out;
  Validated v;
  try {
    v = validate(sc);
  } catch (const SchemaError& e) {
    out.exit_code = kExitSchema;
    out.report = {{"status", "schema_error"}, {"error", error_json(e.kind(), e.what(), std::nullopt, json())}};
    return out;
  }
  const json ops = sc.value("operations", json::array());
  json& rep = out.report;
  rep = {{"schema", kScenarioSchema}, {"name", v.name}, {"seed", v.seed}, {"resolution", v.resolution},
         {"tolerances",
          {{"radius_margin", v.tol.radius_margin},
           {"curvature_margin", v.tol.curvature_margin},
           {"intersection_eps", v.tol.intersection_eps}}},
         {"outputs", v.outputs}};
  rep["immersion"] = nullptr;
  rep["operations"] = json::array();
  Context ctx;
  ctx.tol = v.tol;
  int passed = 0, failed = 0;
  std::optional<std::size_t> at;
  try {
    if (sc.contains("immersion")) {
      ctx.current = build_immersion(sc["immersion"], v.resolution, v.seed);
      rep["immersion"] = ctx.current->provenance();
    }
    for (std::size_t i = 0; i < ops.size(); ++i) {
      at = i;
      const std::string name = ops[i]["op"].get<std::string>();
      const json result = op_table().at(name).run(ctx, ops[i]);
      rep["operations"].push_back({{"op", name}, {"params", ops[i]}, {"result", result}});
      if (name == "assert") {
        (result["pass"].get<bool>() ? passed : failed)++;
      } else {
        ctx.last_result = result;
      }
    }
  } catch (const SchemaError& e) {
    out.exit_code = kExitSchema;
    rep["status"] = "schema_error";
    rep["error"] = error_json(e.kind(), e.what(), at, ops);
  } catch (const Error& e) {
    out.exit_code = kExitNumeric;
    rep["status"] = "numeric_error";
    rep["error"] = error_json(e.kind(), e.what(), at, ops);
  }
  rep["assertions"] = {{"passed", passed}, {"failed", failed}};
  if (out.exit_code == kExitOk) {
    out.exit_code = failed == 0 ? kExitOk : kExitAssertion;
    rep["status"] = failed == 0 ? "ok" : "assertion_failed";
  }
  out.samples_csv = ctx.samples_csv;
  out.track_jsonl = ctx.track_jsonl.str();
  return out;
}

ScenarioOutcome run_scenario_text(const std::string& text) {
  json sc;
  try {
    sc = json::parse(text);
  } catch (const json::parse_error& e) {
    ScenarioOutcome out;
    out.exit_code = kExitSchema;
    out.report = {{"status", "schema_error"}, {"error", {{"kind", "schema"}, {"message", e.what()}}}};
    return out;
  }
  return run_scenario(sc);
}

void write_outputs(const ScenarioOutcome& out, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const json names = out.report.value("outputs", json{{"report", "report.json"},
                                                      {"samples", "samples.csv"},
                                                      {"track", "track.jsonl"}});
  auto write = [&](const std::string& key, const std::string& text) {
    std::ofstream os(fs::path(dir) / names[key].get<std::string>());
    if (!os) throw Error("cannot write " + (fs::path(dir) / names[key].get<std::string>()).string());
    os << text;
  };
  write("report", out.report.dump(2) + "\n");
  if (!out.samples_csv.empty()) write("samples", out.samples_csv);
  if (!out.track_jsonl.empty()) write("track", out.track_jsonl);
}

}  // namespace spherelab
