#pragma once
#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dnk/common.hpp"
#include "dnk/rng.hpp"

namespace dnk {

struct PointMassState {
  std::array<double, 2> p{0, 0};
  std::array<double, 2> v{0, 0};
};

struct Action {
  std::array<double, 2> a{0, 0};
};

struct Obstacle {
  double cx = 0, cy = 0, r = 0;
};

struct Scene {
  std::array<double, 2> goal{0, 0};
  std::vector<Obstacle> obstacles;  // at most kMaxObstacles
};

struct EnvParams {
  double dt = 0.1;
  double damping = 0.1;
  double a_max = 1.0;
  double v_max = 2.0;
  double ws_lo = -2.0;
  double ws_hi = 2.0;
};

// H steps of (state, action); flattened as H x (4 state + 2 action) entries,
// states before actions within each step.
struct Trajectory {
  int H = 0;
  std::vector<double> flat;

  Trajectory() = default;
  explicit Trajectory(int h) : H(h), flat(size_t(h) * kStepDim, 0.0) {}
  double* state(int t) { return flat.data() + size_t(t) * kStepDim; }
  const double* state(int t) const { return flat.data() + size_t(t) * kStepDim; }
  double* action(int t) { return flat.data() + size_t(t) * kStepDim + kStateDim; }
  const double* action(int t) const { return flat.data() + size_t(t) * kStepDim + kStateDim; }
};

PointMassState step(const PointMassState& s, const Action& a, const EnvParams& ep);

// Clearance of a single position: min over obstacles of |p-c|-r, or the
// distance to the workspace boundary when the scene has no obstacles.
double point_clearance(const std::array<double, 2>& p, const Scene& scene, const EnvParams& ep);
double clearance(const Trajectory& traj, const Scene& scene, const EnvParams& ep);

double score_geometry(const Trajectory& traj, const Scene& scene, double kc, double ku,
                      double kg = 2.0, double c_sat = 0.3, const EnvParams& ep = {});

struct EpisodeResult {
  double raw_return = 0.0;
  bool success = false;
  bool collided = false;
  int steps = 0;
  std::vector<PointMassState> trace;
  std::vector<double> latencies_ms;
  std::string note;  // diagnostic when the episode was aborted by a fault
};

using Controller = std::function<Action(const PointMassState&, int tick)>;

EpisodeResult rollout(const Scene& scene, const PointMassState& start, const Controller& ctrl,
                      int max_steps, double r_goal, const EnvParams& ep);

// --- scene sampling ---

struct SceneParams {
  int n_obs_min = 1, n_obs_max = 3;
  double r_min = 0.08, r_max = 0.15;
  double dist_min = 0.45, dist_max = 0.75;
  double place_lo = -1.4, place_hi = 1.4;  // start/goal sampling box
  double delta_safe = 0.15;
};

struct SampledTask {
  Scene scene;
  PointMassState start;  // at rest
};

SampledTask sample_scene(Rng& rng, const SceneParams& sp);
// Single obstacle sitting on the start-goal segment midpoint: the two detour
// homotopy classes are symmetric, which makes the task family bimodal.
SampledTask sample_bimodal_scene(Rng& rng, const SceneParams& sp);

}  // namespace dnk
