#include "dnk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace dnk {

namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

double pop_std(const std::vector<double>& v) {
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / double(v.size()));
}

double cross(const std::array<double, 2>& o, const std::array<double, 2>& a,
             const std::array<double, 2>& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

EpisodeStats episode_stats(const std::vector<std::vector<double>>& per_seed_returns) {
  require(!per_seed_returns.empty(), "episode_stats: no seeds");
  std::vector<double> seed_means, seed_stds;
  for (const auto& eps : per_seed_returns) {
    require(!eps.empty(), "episode_stats: seed with no episodes");
    seed_means.push_back(mean_of(eps));
    seed_stds.push_back(pop_std(eps));
  }
  EpisodeStats st;
  st.mean = mean_of(seed_means);
  st.std_across_seeds = pop_std(seed_means);
  st.sigma_ep = mean_of(seed_stds);
  st.worst_case = *std::min_element(seed_means.begin(), seed_means.end());
  return st;
}

LatencyStats latency_stats(const std::vector<double>& samples_ms) {
  require(!samples_ms.empty(), "latency_stats: no samples");
  LatencyStats st;
  st.mean = mean_of(samples_ms);
  st.stdev = pop_std(samples_ms);
  std::vector<double> sorted = samples_ms;
  std::sort(sorted.begin(), sorted.end());
  const size_t n = sorted.size();
  const size_t rank = size_t(std::ceil(0.95 * double(n)));  // 1-based nearest rank
  st.p95 = sorted[rank - 1];
  return st;
}

double normalize_return(double raw, double null_mean, double expert_mean) {
  require(expert_mean > null_mean, "normalize_return: reference interval is empty");
  return (raw - null_mean) / (expert_mean - null_mean);
}

std::vector<std::array<double, 2>> convex_hull(std::vector<std::array<double, 2>> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const int n = static_cast<int>(pts.size());
  if (n < 3) return pts;
  std::vector<std::array<double, 2>> hull(2 * n);
  int k = 0;
  for (int i = 0; i < n; ++i) {  // lower chain
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  for (int i = n - 2, lo = k + 1; i >= 0; --i) {  // upper chain
    while (k >= lo && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

double polygon_area(const std::vector<std::array<double, 2>>& poly) {
  const int n = static_cast<int>(poly.size());
  if (n < 3) return 0.0;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % n];
    acc += a[0] * b[1] - b[0] * a[1];
  }
  return 0.5 * acc;
}

std::vector<std::array<double, 2>> clip_convex(const std::vector<std::array<double, 2>>& subject,
                                               const std::vector<std::array<double, 2>>& clip) {
  std::vector<std::array<double, 2>> out = subject;
  const int m = static_cast<int>(clip.size());
  for (int e = 0; e < m && !out.empty(); ++e) {
    const auto& a = clip[e];
    const auto& b = clip[(e + 1) % m];
    std::vector<std::array<double, 2>> in = std::move(out);
    out.clear();
    const int n = static_cast<int>(in.size());
    for (int i = 0; i < n; ++i) {
      const auto& p = in[i];
      const auto& q = in[(i + 1) % n];
      const double dp = cross(a, b, p);
      const double dq = cross(a, b, q);
      if (dp >= 0.0) out.push_back(p);
      if ((dp >= 0.0) != (dq >= 0.0)) {
        const double t = dp / (dp - dq);
        out.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
      }
    }
  }
  return out;
}

double hull_overlap(const std::vector<std::array<double, 2>>& a,
                    const std::vector<std::array<double, 2>>& b) {
  const auto ha = convex_hull(a);
  const auto hb = convex_hull(b);
  const double area_a = polygon_area(ha);
  const double area_b = polygon_area(hb);
  if (area_a <= 0.0 || area_b <= 0.0) return 0.0;
  const double inter = std::max(0.0, polygon_area(clip_convex(ha, hb)));
  const double uni = area_a + area_b - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

PcaCompare pca_candidates(const CandidateSet& student_set, const CandidateSet& teacher_set) {
  require(!student_set.cands.empty() && !teacher_set.cands.empty(),
          "pca_candidates: empty candidate set");
  const size_t dim = student_set.cands[0].traj.size();
  std::vector<std::vector<double>> pooled;
  for (const auto& c : student_set.cands) {
    require(c.traj.size() == dim, "pca_candidates: flattened dimension mismatch");
    pooled.push_back(c.traj);
  }
  for (const auto& c : teacher_set.cands) {
    require(c.traj.size() == dim, "pca_candidates: flattened dimension mismatch");
    pooled.push_back(c.traj);
  }
  PcaResult fit = pca_fit(pooled, 2);
  PcaCompare pc;
  pc.frac1 = fit.fractions[0];
  pc.frac2 = fit.fractions[1];
  const size_t ns = student_set.cands.size();
  for (size_t i = 0; i < pooled.size(); ++i) {
    const std::array<double, 2> xy{fit.projections.at(int(i), 0), fit.projections.at(int(i), 1)};
    if (i < ns)
      pc.student_xy.push_back(xy);
    else
      pc.teacher_xy.push_back(xy);
  }
  pc.overlap = hull_overlap(pc.student_xy, pc.teacher_xy);
  return pc;
}

std::pair<double, double> mode_coverage(const CandidateSet& cands, const Scene& scene,
                                        const PointMassState& start, const EnvParams& ep) {
  require(!cands.cands.empty(), "mode_coverage: empty candidate set");
  require(scene.obstacles.size() == 1, "mode_coverage: scene must have exactly one obstacle");
  const Obstacle& ob = scene.obstacles[0];
  const std::array<double, 2> s = start.p;
  const std::array<double, 2> g = scene.goal;
  // The obstacle must block the start-goal segment.
  const double gx = g[0] - s[0], gy = g[1] - s[1];
  const double seg2 = gx * gx + gy * gy;
  require(seg2 > 0.0, "mode_coverage: start and goal coincide");
  double t = ((ob.cx - s[0]) * gx + (ob.cy - s[1]) * gy) / seg2;
  t = std::clamp(t, 0.0, 1.0);
  const double ex = s[0] + t * gx - ob.cx, ey = s[1] + t * gy - ob.cy;
  require(std::sqrt(ex * ex + ey * ey) < ob.r,
          "mode_coverage: obstacle does not block the start-goal segment");
  (void)ep;

  int left = 0;
  for (const auto& c : cands.cands) {
    const int H = static_cast<int>(c.traj.size()) / kStepDim;
    const Trajectory phys = traj_to_phys(c.traj.data(), H);
    // Closest approach to the obstacle along the plan.
    int best_t = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int k = 0; k < H; ++k) {
      const double dx = phys.state(k)[0] - ob.cx, dy = phys.state(k)[1] - ob.cy;
      const double d = dx * dx + dy * dy;
      if (d < best_d) {
        best_d = d;
        best_t = k;
      }
    }
    const double side = gx * (phys.state(best_t)[1] - s[1]) - gy * (phys.state(best_t)[0] - s[0]);
    if (side >= 0.0) ++left;
  }
  const double fl = double(left) / double(cands.cands.size());
  return {fl, 1.0 - fl};
}

void emit_report(const std::vector<RunSummary>& summaries, const std::string& path_prefix,
                 const std::vector<std::string>& meta) {
  require(!summaries.empty(), "emit_report: no summaries");
  for (const auto& sm : summaries) {
    require(!sm.seeds.empty() && sm.per_seed_returns.size() == sm.seeds.size() &&
                sm.per_seed_success.size() == sm.seeds.size(),
            "emit_report: summary '" + sm.method + "' has inconsistent per-seed lists");
    for (size_t i = 0; i < sm.seeds.size(); ++i)
      require(!sm.per_seed_returns[i].empty() &&
                  sm.per_seed_success[i].size() == sm.per_seed_returns[i].size(),
              "emit_report: summary '" + sm.method + "' has an empty or mismatched seed");
  }

  const std::string results_path = path_prefix + "_results.csv";
  FILE* f = std::fopen(results_path.c_str(), "wb");
  require(f != nullptr, "emit_report: cannot write " + results_path);
  std::fputs("method,seed,episodes,mean_return,std_return,success_rate\n", f);
  for (const auto& sm : summaries) {
    for (size_t i = 0; i < sm.seeds.size(); ++i) {
      const auto& eps = sm.per_seed_returns[i];
      double succ = 0.0;
      for (int v : sm.per_seed_success[i]) succ += v ? 1.0 : 0.0;
      succ /= double(eps.size());
      std::fprintf(f, "%s,%llu,%zu,%s,%s,%s\n", sm.method.c_str(),
                   static_cast<unsigned long long>(sm.seeds[i]), eps.size(),
                   fmt(mean_of(eps)).c_str(), fmt(pop_std(eps)).c_str(), fmt(succ).c_str());
    }
    const EpisodeStats st = episode_stats(sm.per_seed_returns);
    size_t total = 0;
    double succ_sum = 0.0;
    for (size_t i = 0; i < sm.seeds.size(); ++i) {
      total += sm.per_seed_returns[i].size();
      double s = 0.0;
      for (int v : sm.per_seed_success[i]) s += v ? 1.0 : 0.0;
      succ_sum += s / double(sm.per_seed_success[i].size());
    }
    // Aggregate row: seed-levelled mean / sigma_ep / mean per-seed success.
    std::fprintf(f, "%s,all,%zu,%s,%s,%s\n", sm.method.c_str(), total, fmt(st.mean).c_str(),
                 fmt(st.sigma_ep).c_str(), fmt(succ_sum / double(sm.seeds.size())).c_str());
  }
  std::fputs("# std_return is the population standard deviation\n", f);
  std::fputs("# aggregate row: mean of per-seed means / mean of per-seed stds\n", f);
  for (const auto& line : meta) std::fprintf(f, "# %s\n", line.c_str());
  require(std::fclose(f) == 0, "emit_report: close failed for " + results_path);

  const std::string pareto_path = path_prefix + "_pareto.csv";
  FILE* p = std::fopen(pareto_path.c_str(), "wb");
  require(p != nullptr, "emit_report: cannot write " + pareto_path);
  std::fputs("method,mean_latency_ms,p95_latency_ms,mean_return\n", p);
  for (const auto& sm : summaries) {
    const EpisodeStats st = episode_stats(sm.per_seed_returns);
    if (sm.latencies_ms.empty()) {
      std::fprintf(p, "%s,nan,nan,%s\n", sm.method.c_str(), fmt(st.mean).c_str());
    } else {
      const LatencyStats ls = latency_stats(sm.latencies_ms);
      std::fprintf(p, "%s,%s,%s,%s\n", sm.method.c_str(), fmt(ls.mean).c_str(),
                   fmt(ls.p95).c_str(), fmt(st.mean).c_str());
    }
  }
  std::fputs("# P95 is nearest-rank: sorted[ceil(0.95 n)]\n", p);
  for (const auto& line : meta) std::fprintf(p, "# %s\n", line.c_str());
  require(std::fclose(p) == 0, "emit_report: close failed for " + pareto_path);
}

void emit_pca_csv(const PcaCompare& pc, const std::string& path,
                  const std::vector<std::string>& meta) {
  FILE* f = std::fopen(path.c_str(), "wb");
  require(f != nullptr, "emit_pca_csv: cannot write " + path);
  std::fputs("set,index,x,y\n", f);
  for (size_t i = 0; i < pc.student_xy.size(); ++i)
    std::fprintf(f, "student,%zu,%s,%s\n", i, fmt(pc.student_xy[i][0]).c_str(),
                 fmt(pc.student_xy[i][1]).c_str());
  for (size_t i = 0; i < pc.teacher_xy.size(); ++i)
    std::fprintf(f, "teacher,%zu,%s,%s\n", i, fmt(pc.teacher_xy[i][0]).c_str(),
                 fmt(pc.teacher_xy[i][1]).c_str());
  std::fprintf(f, "# frac1=%s frac2=%s hull_overlap=%s\n", fmt(pc.frac1).c_str(),
               fmt(pc.frac2).c_str(), fmt(pc.overlap).c_str());
  for (const auto& line : meta) std::fprintf(f, "# %s\n", line.c_str());
  require(std::fclose(f) == 0, "emit_pca_csv: close failed for " + path);
}

}  // namespace dnk
