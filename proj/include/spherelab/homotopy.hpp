#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "spherelab/curvature.hpp"
#include "spherelab/immersion.hpp"

namespace spherelab {

inline constexpr int kTrackSteps = 21;
// Distance from the smallest principal radius at which the translate-Moebius
// track stops.
inline constexpr double kTranslateEndMargin = 1e-3;
// Margin on radii and cap radius that ends the Moebius stage of deform_to_round.
inline constexpr double kDeformMargin = 0.05;

struct TrackStep {
  std::string stage;
  int step = 0;
  double param = 0.0;
  double min_k = 0.0;
  double max_k = 0.0;
  double j_mid = 0.0;
  double j_width = 0.0;
  std::optional<bool> embedded;
  double rank_margin = 0.0;
  // Inserted by bisection between two grid points.
  bool refined = false;
  // Stage-specific monitors (mu, radius margins, derivative bounds, ...).
  json extra = json::object();
};

struct TrackStage {
  std::string label;
  std::size_t first = 0;  // index range into Track::steps
  std::size_t last = 0;
};

struct Track {
  std::vector<TrackStage> stages;
  std::vector<TrackStep> steps;
  // One immersion per step.
  std::vector<Immersion> snapshots;
  bool complete = true;
  std::string failure;
  // Largest pointwise mismatch between consecutive stage endpoints.
  double stage_gap = 0.0;
  json diagnostics = json::object();
};

// One JSON object per step with keys stage, step, param, min_k, max_k, J_mid,
// J_width, embedded, rank_margin.
void write_jsonl(std::ostream& os, const Track& t);
json step_json(const TrackStep& s);
// Summary without the per-step snapshots.
json to_json(const Track& t);

// a, ..., b in steps - 1 equal increments.
std::vector<double> uniform_grid(double a, double b, int steps = kTrackSteps);

// Monitors of a single immersion, as recorded at a track step.
TrackStep monitor_step(const Immersion& f, bool check_embedding = false);

Track track_normal_translate(const Immersion& f, const std::vector<double>& r_path);
// Moebius flow with centre the circumcenter of f; f must be locally convex.
Track track_moebius(const Immersion& f, const std::vector<double>& s_grid, bool check_embedding = false);
// H_s(t) = (M_s o f_t)_{-t} for t on [0, a - kTranslateEndMargin], a the
// smallest principal radius of f.
Track track_translate_moebius(const Immersion& f, double s, int steps = kTrackSteps);
// (1 - s) phi + s tan(r) nu_phi for s on [0, 1].
Track track_euclidean_straightline(const Immersion& phi, double r, int steps = kTrackSteps);
// Moebius shrink, central projection and straight line at r = pi/4, mapped
// back to the sphere. The endpoint is compared with psi(phi_convex(.)).
Track deform_to_round(const Immersion& f, int steps = kTrackSteps);
// Q_f zeta_s Q_f^{-1} f for s on [0, 1], Q_f from phi_hemi.
Track track_zeta(const Immersion& f, int steps = kTrackSteps, bool check_embedding = true);

}  // namespace spherelab
