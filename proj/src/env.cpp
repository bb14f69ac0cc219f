#include "dnk/env.hpp"

#include <chrono>
#include <cmath>

namespace dnk {

PointMassState step(const PointMassState& s, const Action& a, const EnvParams& ep) {
  double ax = clip(a.a[0], -ep.a_max, ep.a_max);
  double ay = clip(a.a[1], -ep.a_max, ep.a_max);
  PointMassState out;
  out.p[0] = s.p[0] + s.v[0] * ep.dt;
  out.p[1] = s.p[1] + s.v[1] * ep.dt;
  double k = 1.0 - ep.damping * ep.dt;
  out.v[0] = k * s.v[0] + ax * ep.dt;
  out.v[1] = k * s.v[1] + ay * ep.dt;
  double speed = std::hypot(out.v[0], out.v[1]);
  if (speed > ep.v_max) {
    double f = ep.v_max / speed;
    out.v[0] *= f;
    out.v[1] *= f;
  }
  return out;
}

double point_clearance(const std::array<double, 2>& p, const Scene& scene, const EnvParams& ep) {
  if (scene.obstacles.empty()) {
    double d = p[0] - ep.ws_lo;
    d = std::min(d, ep.ws_hi - p[0]);
    d = std::min(d, p[1] - ep.ws_lo);
    d = std::min(d, ep.ws_hi - p[1]);
    return d;
  }
  double best = 1e300;
  for (const auto& o : scene.obstacles) {
    double d = std::hypot(p[0] - o.cx, p[1] - o.cy) - o.r;
    best = std::min(best, d);
  }
  return best;
}

double clearance(const Trajectory& traj, const Scene& scene, const EnvParams& ep) {
  double best = 1e300;
  for (int t = 0; t < traj.H; ++t) {
    const double* s = traj.state(t);
    best = std::min(best, point_clearance({s[0], s[1]}, scene, ep));
  }
  return best;
}

double score_geometry(const Trajectory& traj, const Scene& scene, double kc, double ku, double kg,
                      double c_sat, const EnvParams& ep) {
  double c = std::min(clearance(traj, scene, ep), c_sat);
  double effort = 0.0;
  for (int t = 0; t < traj.H; ++t) {
    const double* a = traj.action(t);
    effort += a[0] * a[0] + a[1] * a[1];
  }
  const double* last = traj.state(traj.H - 1);
  double gx = last[0] - scene.goal[0], gy = last[1] - scene.goal[1];
  return kc * c - ku * effort - kg * (gx * gx + gy * gy);
}

EpisodeResult rollout(const Scene& scene, const PointMassState& start, const Controller& ctrl,
                      int max_steps, double r_goal, const EnvParams& ep) {
  require(max_steps >= 1, "rollout: max_steps >= 1");
  EpisodeResult res;
  PointMassState s = start;
  res.trace.push_back(s);
  double last_dist = std::hypot(s.p[0] - scene.goal[0], s.p[1] - scene.goal[1]);
  using Clock = std::chrono::steady_clock;
  for (int t = 0; t < max_steps; ++t) {
    auto t0 = Clock::now();
    Action a = ctrl(s, t);
    res.latencies_ms.push_back(std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
    a.a[0] = clip(a.a[0], -ep.a_max, ep.a_max);
    a.a[1] = clip(a.a[1], -ep.a_max, ep.a_max);
    s = step(s, a, ep);
    res.trace.push_back(s);
    ++res.steps;
    double d = std::hypot(s.p[0] - scene.goal[0], s.p[1] - scene.goal[1]);
    res.raw_return -= d + 0.05 * (a.a[0] * a.a[0] + a.a[1] * a.a[1]);
    last_dist = d;
    if (d <= r_goal) {
      res.success = true;
      break;
    }
    if (point_clearance(s.p, scene, ep) < 0.0) {
      res.collided = true;
      break;
    }
  }
  // Episodes are padded to a fixed cost horizon: after termination the agent
  // "stays" at its terminal distance with zero effort, so returns of episodes
  // with different lengths are comparable.
  res.raw_return -= double(max_steps - res.steps) * last_dist;
  return res;
}

SampledTask sample_scene(Rng& rng, const SceneParams& sp) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    SampledTask task;
    double sx = rng.uniform_range(sp.place_lo, sp.place_hi);
    double sy = rng.uniform_range(sp.place_lo, sp.place_hi);
    double dist = rng.uniform_range(sp.dist_min, sp.dist_max);
    double ang = rng.uniform_range(0.0, 6.283185307179586);
    double gx = sx + dist * std::cos(ang);
    double gy = sy + dist * std::sin(ang);
    if (gx < sp.place_lo || gx > sp.place_hi || gy < sp.place_lo || gy > sp.place_hi) continue;
    task.start.p = {sx, sy};
    task.scene.goal = {gx, gy};

    int want = sp.n_obs_min + rng.uniform_int(sp.n_obs_max - sp.n_obs_min + 1);
    bool ok = true;
    for (int i = 0; i < want && ok; ++i) {
      bool placed = false;
      for (int tries = 0; tries < 50; ++tries) {
        Obstacle o;
        o.r = rng.uniform_range(sp.r_min, sp.r_max);
        if (i == 0) {
          // First obstacle blocks the start-goal segment so detours (and with
          // them multimodal data) actually occur.
          double t = rng.uniform_range(0.35, 0.65);
          double off = rng.uniform_range(-0.5, 0.5) * o.r;
          double nx = -(gy - sy) / dist, ny = (gx - sx) / dist;
          o.cx = sx + t * (gx - sx) + off * nx;
          o.cy = sy + t * (gy - sy) + off * ny;
        } else {
          o.cx = rng.uniform_range(sp.place_lo, sp.place_hi);
          o.cy = rng.uniform_range(sp.place_lo, sp.place_hi);
        }
        double margin = o.r + sp.delta_safe + 0.06;
        if (std::hypot(o.cx - sx, o.cy - sy) < margin) continue;
        if (std::hypot(o.cx - gx, o.cy - gy) < margin) continue;
        bool overlap = false;
        for (const auto& other : task.scene.obstacles)
          if (std::hypot(o.cx - other.cx, o.cy - other.cy) <
              o.r + other.r + 2.0 * sp.delta_safe + 0.06)
            overlap = true;
        if (overlap) continue;
        task.scene.obstacles.push_back(o);
        placed = true;
        break;
      }
      if (i == 0 && !placed) ok = false;  // a blocking obstacle is required
    }
    if (!ok || task.scene.obstacles.empty()) continue;
    return task;
  }
  throw DnkError("sample_scene: could not sample a valid scene");
}

SampledTask sample_bimodal_scene(Rng& rng, const SceneParams& sp) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    double cx = rng.uniform_range(-0.7, 0.7);
    double cy = rng.uniform_range(-0.7, 0.7);
    double dist = rng.uniform_range(0.55, 0.7);
    double ang = rng.uniform_range(0.0, 6.283185307179586);
    double hx = 0.5 * dist * std::cos(ang), hy = 0.5 * dist * std::sin(ang);
    SampledTask task;
    task.start.p = {cx - hx, cy - hy};
    task.scene.goal = {cx + hx, cy + hy};
    Obstacle o;
    o.r = rng.uniform_range(0.10, 0.13);
    o.cx = cx + rng.uniform_range(-0.015, 0.015);
    o.cy = cy + rng.uniform_range(-0.015, 0.015);
    double margin = o.r + sp.delta_safe + 0.06;
    if (std::hypot(o.cx - task.start.p[0], o.cy - task.start.p[1]) < margin) continue;
    if (std::hypot(o.cx - task.scene.goal[0], o.cy - task.scene.goal[1]) < margin) continue;
    task.scene.obstacles.push_back(o);
    return task;
  }
  throw DnkError("sample_bimodal_scene: could not sample a valid scene");
}

}  // namespace dnk
