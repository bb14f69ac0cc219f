#pragma once
#include <optional>

#include "dnk/env.hpp"

namespace dnk {

struct PlannerParams {
  double delta_safe = 0.15;   // obstacle inflation margin
  double spline_margin = 0.05;  // extra detour radius absorbing spline corner-cutting
  double a_tan = 0.5;         // tangential acceleration budget
  double a_lat = 0.6;         // lateral (curvature) acceleration budget
  double v_plan = 1.2;        // cruise speed cap
  int fine_samples = 400;     // arc-length discretization of the spline
};

// Scripted expert: piecewise-linear path start->goal with tangent-arc detours
// around inflated obstacles (side chosen uniformly at random when both fit),
// smoothed by a clamped cubic B-spline, time-parameterized by a
// curvature-limited speed profile, and converted to actions by inverse
// dynamics of step(). Returns nothing when no dynamically feasible,
// collision-free H-step plan exists (callers resample the scene).
std::optional<Trajectory> expert_plan(const Scene& scene, const PointMassState& start, int H,
                                      Rng& rng, const EnvParams& ep = {},
                                      const PlannerParams& pp = {});

}  // namespace dnk
