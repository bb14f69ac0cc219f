#pragma once
#include <vector>

#include "dnk/env.hpp"

namespace dnk {

// Model space: positions and velocities divided by 2 (workspace half-width /
// speed cap), actions by 1. Networks only ever see model-space values;
// physical quantities exist at the env boundary.
constexpr double kPosScale = 2.0;
constexpr double kVelScale = 2.0;
constexpr double kActScale = 1.0;

void traj_to_model(const Trajectory& phys, double* out);
std::vector<double> traj_to_model(const Trajectory& phys);
Trajectory traj_to_phys(const double* model, int H);

// Context layout: current state (4), goal (2), then (cx, cy, r) per obstacle
// slot, zero-padded to kMaxObstacles. All entries position-scaled.
std::vector<double> encode_context(const PointMassState& s, const Scene& scene);
// Recovers goal and obstacles (radius > 0 slots) from a context vector.
Scene scene_from_context(const std::vector<double>& ctx);
void state_from_context(const std::vector<double>& ctx, PointMassState& out);

// 8 sinusoidal features of t in (0,1]: sin/cos(pi t 2^j), j = 0..3.
void time_embed(double t01, double* out);

}  // namespace dnk
