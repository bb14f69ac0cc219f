#include "dnk/encoding.hpp"

#include <cmath>

namespace dnk {

void traj_to_model(const Trajectory& phys, double* out) {
  for (int t = 0; t < phys.H; ++t) {
    const double* s = phys.state(t);
    const double* a = phys.action(t);
    double* o = out + size_t(t) * kStepDim;
    o[0] = s[0] / kPosScale;
    o[1] = s[1] / kPosScale;
    o[2] = s[2] / kVelScale;
    o[3] = s[3] / kVelScale;
    o[4] = a[0] / kActScale;
    o[5] = a[1] / kActScale;
  }
}

std::vector<double> traj_to_model(const Trajectory& phys) {
  std::vector<double> out(size_t(phys.H) * kStepDim);
  traj_to_model(phys, out.data());
  return out;
}

Trajectory traj_to_phys(const double* model, int H) {
  Trajectory traj(H);
  for (int t = 0; t < H; ++t) {
    const double* o = model + size_t(t) * kStepDim;
    double* s = traj.state(t);
    double* a = traj.action(t);
    s[0] = o[0] * kPosScale;
    s[1] = o[1] * kPosScale;
    s[2] = o[2] * kVelScale;
    s[3] = o[3] * kVelScale;
    a[0] = o[4] * kActScale;
    a[1] = o[5] * kActScale;
  }
  return traj;
}

std::vector<double> encode_context(const PointMassState& s, const Scene& scene) {
  require(int(scene.obstacles.size()) <= kMaxObstacles, "encode_context: too many obstacles");
  std::vector<double> ctx(kCtxDim, 0.0);
  ctx[0] = s.p[0] / kPosScale;
  ctx[1] = s.p[1] / kPosScale;
  ctx[2] = s.v[0] / kVelScale;
  ctx[3] = s.v[1] / kVelScale;
  ctx[4] = scene.goal[0] / kPosScale;
  ctx[5] = scene.goal[1] / kPosScale;
  for (size_t i = 0; i < scene.obstacles.size(); ++i) {
    ctx[6 + 3 * i] = scene.obstacles[i].cx / kPosScale;
    ctx[7 + 3 * i] = scene.obstacles[i].cy / kPosScale;
    ctx[8 + 3 * i] = scene.obstacles[i].r / kPosScale;
  }
  return ctx;
}

Scene scene_from_context(const std::vector<double>& ctx) {
  require(int(ctx.size()) == kCtxDim, "scene_from_context: bad context length");
  Scene sc;
  sc.goal = {ctx[4] * kPosScale, ctx[5] * kPosScale};
  for (int i = 0; i < kMaxObstacles; ++i) {
    double r = ctx[8 + 3 * i] * kPosScale;
    if (r > 0.0)
      sc.obstacles.push_back({ctx[6 + 3 * i] * kPosScale, ctx[7 + 3 * i] * kPosScale, r});
  }
  return sc;
}

void state_from_context(const std::vector<double>& ctx, PointMassState& out) {
  out.p = {ctx[0] * kPosScale, ctx[1] * kPosScale};
  out.v = {ctx[2] * kVelScale, ctx[3] * kVelScale};
}

void time_embed(double t01, double* out) {
  double base = 3.14159265358979323846 * t01;
  for (int j = 0; j < 4; ++j) {
    double arg = base * double(1 << j);
    out[2 * j] = std::sin(arg);
    out[2 * j + 1] = std::cos(arg);
  }
}

}  // namespace dnk
