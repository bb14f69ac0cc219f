#include "dnk/planner.hpp"

#include <algorithm>
#include <cmath>

#include "dnk/bspline.hpp"

namespace dnk {
namespace {

using Pt = std::array<double, 2>;

double dist(const Pt& a, const Pt& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

// Smallest distance from segment ab to point c, and the parameter of the foot.
double seg_point_dist(const Pt& a, const Pt& b, const Pt& c, double* t_out) {
  double dx = b[0] - a[0], dy = b[1] - a[1];
  double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((c[0] - a[0]) * dx + (c[1] - a[1]) * dy) / len2 : 0.0;
  t = clip(t, 0.0, 1.0);
  if (t_out) *t_out = t;
  return std::hypot(a[0] + t * dx - c[0], a[1] + t * dy - c[1]);
}

// Intersection parameters of segment ab with circle (c, R); false if none.
bool seg_circle_hits(const Pt& a, const Pt& b, const Pt& c, double R, double* t1, double* t2) {
  double dx = b[0] - a[0], dy = b[1] - a[1];
  double fx = a[0] - c[0], fy = a[1] - c[1];
  double A = dx * dx + dy * dy;
  double B = 2.0 * (fx * dx + fy * dy);
  double C = fx * fx + fy * fy - R * R;
  double disc = B * B - 4 * A * C;
  if (disc <= 0 || A == 0) return false;
  double sq = std::sqrt(disc);
  double lo = (-B - sq) / (2 * A), hi = (-B + sq) / (2 * A);
  if (hi <= 0.0 || lo >= 1.0) return false;
  *t1 = std::max(lo, 0.0);
  *t2 = std::min(hi, 1.0);
  return true;
}

// Arc points on circle (c, R) from angle pa to pb, going counterclockwise if
// side > 0 and clockwise otherwise. Endpoints excluded.
std::vector<Pt> arc_points(const Pt& c, double R, double pa, double pb, int side) {
  double d = pb - pa;
  const double tau = 6.283185307179586476925286766559;
  d = std::fmod(std::fmod(d, tau) + tau, tau);  // ccw sweep in [0, 2pi)
  double sweep = side > 0 ? d : d - tau;        // cw sweep is negative
  int n = std::max(2, int(std::ceil(std::fabs(sweep) / 0.35)));
  std::vector<Pt> pts;
  for (int i = 1; i < n; ++i) {
    double ang = pa + sweep * double(i) / n;
    pts.push_back({c[0] + R * std::cos(ang), c[1] + R * std::sin(ang)});
  }
  return pts;
}

bool inside_ws(const Pt& p, const EnvParams& ep, double margin) {
  return p[0] > ep.ws_lo + margin && p[0] < ep.ws_hi - margin && p[1] > ep.ws_lo + margin &&
         p[1] < ep.ws_hi - margin;
}

// Polyline construction: route around each inflated obstacle that blocks the
// current polyline, picking the detour side at random when both stay inside
// the workspace. Returns empty on failure.
std::vector<Pt> build_polyline(const Scene& scene, const Pt& start, Rng& rng, double R_extra,
                               const EnvParams& ep, const PlannerParams& pp) {
  std::vector<Pt> poly{start, scene.goal};
  // Obstacles ordered along the direct segment so detours are inserted
  // left-to-right; the sampler keeps inflated discs disjoint.
  std::vector<int> order(scene.obstacles.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = int(i);
  std::vector<double> proj(scene.obstacles.size());
  for (size_t i = 0; i < scene.obstacles.size(); ++i) {
    double t;
    seg_point_dist(start, scene.goal, {scene.obstacles[i].cx, scene.obstacles[i].cy}, &t);
    proj[i] = t;
  }
  std::sort(order.begin(), order.end(), [&](int a, int b) { return proj[a] < proj[b]; });

  for (int oi : order) {
    const Obstacle& o = scene.obstacles[oi];
    Pt c{o.cx, o.cy};
    double R = o.r + pp.delta_safe + pp.spline_margin + R_extra;
    // find the first polyline segment crossing the inflated disc
    int hit = -1;
    double t1 = 0, t2 = 0;
    for (size_t s = 0; s + 1 < poly.size(); ++s) {
      if (seg_circle_hits(poly[s], poly[s + 1], c, R, &t1, &t2)) {
        hit = int(s);
        break;
      }
    }
    if (hit < 0) continue;
    Pt a = poly[hit], b = poly[hit + 1];
    Pt A{a[0] + t1 * (b[0] - a[0]), a[1] + t1 * (b[1] - a[1])};
    Pt B{a[0] + t2 * (b[0] - a[0]), a[1] + t2 * (b[1] - a[1])};
    // push entry/exit onto the circle
    for (Pt* q : {&A, &B}) {
      double d = dist(*q, c);
      if (d < 1e-9) return {};
      (*q)[0] = c[0] + ((*q)[0] - c[0]) * R / d;
      (*q)[1] = c[1] + ((*q)[1] - c[1]) * R / d;
    }
    double pa = std::atan2(A[1] - c[1], A[0] - c[0]);
    double pb = std::atan2(B[1] - c[1], B[0] - c[0]);
    bool ok[2];
    std::vector<Pt> cand[2];
    for (int side = 0; side < 2; ++side) {
      cand[side] = arc_points(c, R, pa, pb, side == 0 ? +1 : -1);
      ok[side] = true;
      for (const auto& q : cand[side])
        if (!inside_ws(q, ep, 0.05)) ok[side] = false;
    }
    int side;
    if (ok[0] && ok[1])
      side = rng.uniform_int(2);
    else if (ok[0])
      side = 0;
    else if (ok[1])
      side = 1;
    else
      return {};
    std::vector<Pt> ins;
    ins.push_back(A);
    for (auto& q : cand[side]) ins.push_back(q);
    ins.push_back(B);
    poly.insert(poly.begin() + hit + 1, ins.begin(), ins.end());
  }
  return poly;
}

// Even re-spacing along the polyline (points stay on it).
std::vector<Pt> respace(const std::vector<Pt>& poly, int n) {
  std::vector<double> cum{0.0};
  for (size_t i = 0; i + 1 < poly.size(); ++i) cum.push_back(cum.back() + dist(poly[i], poly[i + 1]));
  double total = cum.back();
  std::vector<Pt> out;
  for (int i = 0; i < n; ++i) {
    double s = total * double(i) / (n - 1);
    size_t j = 1;
    while (j < cum.size() - 1 && cum[j] < s) ++j;
    double seg = cum[j] - cum[j - 1];
    double t = seg > 0 ? (s - cum[j - 1]) / seg : 0.0;
    out.push_back({poly[j - 1][0] + t * (poly[j][0] - poly[j - 1][0]),
                   poly[j - 1][1] + t * (poly[j][1] - poly[j - 1][1])});
  }
  return out;
}

}  // namespace

std::optional<Trajectory> expert_plan(const Scene& scene, const PointMassState& start, int H,
                                      Rng& rng, const EnvParams& ep, const PlannerParams& pp) {
  for (int attempt = 0; attempt < 3; ++attempt) {
    double R_extra = 0.06 * attempt;
    std::vector<Pt> poly = build_polyline(scene, start.p, rng, R_extra, ep, pp);
    if (poly.empty()) continue;

    double plen = 0.0;
    for (size_t i = 0; i + 1 < poly.size(); ++i) plen += dist(poly[i], poly[i + 1]);
    if (plen < 1e-6) continue;
    int n_ctrl = std::max(6, std::min(24, int(std::lround(plen / 0.12))));
    BSpline2 spline = make_spline(respace(poly, n_ctrl));

    // fine arc-length table
    int NS = pp.fine_samples;
    std::vector<Pt> fp(NS + 1);
    std::vector<double> s_cum(NS + 1, 0.0);
    for (int i = 0; i <= NS; ++i) fp[i] = spline.eval(double(i) / NS);
    for (int i = 1; i <= NS; ++i) s_cum[i] = s_cum[i - 1] + dist(fp[i - 1], fp[i]);
    double total = s_cum[NS];
    if (total < 1e-6) continue;

    // curvature-limited speed caps
    std::vector<double> vcap(NS + 1, pp.v_plan);
    for (int i = 1; i < NS; ++i) {
      double a1 = std::atan2(fp[i][1] - fp[i - 1][1], fp[i][0] - fp[i - 1][0]);
      double a2 = std::atan2(fp[i + 1][1] - fp[i][1], fp[i + 1][0] - fp[i][0]);
      double dth = std::fabs(std::remainder(a2 - a1, 6.283185307179586));
      double ds = 0.5 * (s_cum[i + 1] - s_cum[i - 1]);
      double kappa = ds > 1e-12 ? dth / ds : 0.0;
      if (kappa > 1e-9) vcap[i] = std::min(vcap[i], std::sqrt(pp.a_lat / kappa));
    }
    // forward/backward passes; rest at both ends
    std::vector<double> v(NS + 1, 0.0);
    double v0 = std::hypot(start.v[0], start.v[1]);
    v[0] = std::min(v0, vcap[0]);
    for (int i = 0; i < NS; ++i) {
      double ds = s_cum[i + 1] - s_cum[i];
      v[i + 1] = std::min(vcap[i + 1], std::sqrt(v[i] * v[i] + 2.0 * pp.a_tan * ds));
    }
    v[NS] = 0.0;
    for (int i = NS - 1; i >= 0; --i) {
      double ds = s_cum[i + 1] - s_cum[i];
      v[i] = std::min(v[i], std::sqrt(v[i + 1] * v[i + 1] + 2.0 * pp.a_tan * ds));
    }
    // time stamps
    std::vector<double> tm(NS + 1, 0.0);
    bool pinched = false;
    for (int i = 0; i < NS; ++i) {
      double ds = s_cum[i + 1] - s_cum[i];
      double va = 0.5 * (v[i] + v[i + 1]);
      if (va < 1e-6) {
        if (ds > 1e-9 && i != 0 && i != NS - 1) pinched = true;
        tm[i + 1] = tm[i] + (ds > 1e-9 ? ds / std::max(va, 1e-3) : 0.0);
      } else {
        tm[i + 1] = tm[i] + ds / va;
      }
    }
    if (pinched) continue;
    double T = tm[NS];
    if (T > (H - 3) * ep.dt) continue;  // cannot reach and stop within horizon

    // Sample positions on the dynamics grid (two extra for velocity/action
    // finite differences). The profile is delayed one tick and the second
    // position is pinned to start.p + start.v*dt so the trajectory's first
    // state equals the caller's start state exactly — an open-loop replay of
    // the actions from that state then reproduces the plan bit-for-bit.
    // Starts with velocity misaligned with the path fail the action bound
    // below and are rejected; demonstration starts are at rest.
    std::vector<Pt> pos(H + 2);
    pos[0] = {start.p[0], start.p[1]};
    int cursor = 0;
    for (int k = 1; k < H + 2; ++k) {
      double tk = (k - 1) * ep.dt;
      if (tk >= T) {
        pos[k] = fp[NS];
        continue;
      }
      while (cursor < NS && tm[cursor + 1] < tk) ++cursor;
      double seg = tm[cursor + 1] - tm[cursor];
      double f = seg > 1e-12 ? (tk - tm[cursor]) / seg : 0.0;
      pos[k] = {fp[cursor][0] + f * (fp[cursor + 1][0] - fp[cursor][0]),
                fp[cursor][1] + f * (fp[cursor + 1][1] - fp[cursor][1])};
    }
    pos[1] = {start.p[0] + start.v[0] * ep.dt, start.p[1] + start.v[1] * ep.dt};

    // states/actions by inverse dynamics: v_k = (p_{k+1}-p_k)/dt,
    // a_k = (v_{k+1} - (1-damping dt) v_k)/dt
    std::vector<Pt> vel(H + 1);
    for (int k = 0; k <= H; ++k)
      vel[k] = {(pos[k + 1][0] - pos[k][0]) / ep.dt, (pos[k + 1][1] - pos[k][1]) / ep.dt};
    double kd = 1.0 - ep.damping * ep.dt;
    Trajectory traj(H);
    bool feasible = true;
    for (int k = 0; k < H; ++k) {
      double ax = (vel[k + 1][0] - kd * vel[k][0]) / ep.dt;
      double ay = (vel[k + 1][1] - kd * vel[k][1]) / ep.dt;
      if (std::fabs(ax) > ep.a_max || std::fabs(ay) > ep.a_max) feasible = false;
      if (std::hypot(vel[k][0], vel[k][1]) > ep.v_max) feasible = false;
      double* s = traj.state(k);
      s[0] = pos[k][0];
      s[1] = pos[k][1];
      s[2] = vel[k][0];
      s[3] = vel[k][1];
      double* a = traj.action(k);
      a[0] = ax;
      a[1] = ay;
    }
    if (!feasible) continue;
    if (clearance(traj, scene, ep) < pp.delta_safe / 2.0) continue;
    bool inside = true;
    for (int k = 0; k < H; ++k) {
      const double* s = traj.state(k);
      if (!inside_ws({s[0], s[1]}, ep, 0.0)) inside = false;
    }
    if (!inside) continue;
    return traj;
  }
  return std::nullopt;
}

}  // namespace dnk
