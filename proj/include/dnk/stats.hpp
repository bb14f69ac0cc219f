#pragma once
#include <array>
#include <string>
#include <vector>

#include "dnk/control.hpp"
#include "dnk/pca.hpp"

namespace dnk {

// Per-method evaluation record: one list of episode returns and success flags
// per seed, plus pooled per-decision latencies.
struct RunSummary {
  std::string method;
  std::vector<uint64_t> seeds;
  std::vector<std::vector<double>> per_seed_returns;
  std::vector<std::vector<int>> per_seed_success;  // 0/1 per episode
  std::vector<double> latencies_ms;
};

struct EpisodeStats {
  double mean = 0.0;              // grand mean of per-seed means
  double std_across_seeds = 0.0;  // population std of per-seed means
  double sigma_ep = 0.0;          // mean over seeds of within-seed population std
  double worst_case = 0.0;        // min over seeds of per-seed mean
};

// Population standard deviation throughout; each seed needs >= 1 episode.
EpisodeStats episode_stats(const std::vector<std::vector<double>>& per_seed_returns);

struct LatencyStats {
  double mean = 0.0;
  double stdev = 0.0;  // population
  double p95 = 0.0;    // nearest-rank: sorted[ceil(0.95 n) - 1]
};

LatencyStats latency_stats(const std::vector<double>& samples_ms);

// Two-point return normalization: 0 at the do-nothing baseline, 1 at the
// expert reference.
double normalize_return(double raw, double null_mean, double expert_mean);

// --- 2D computational geometry (PCA cloud comparison) ---

// Convex hull in counter-clockwise order (monotone chain); collinear points
// on the boundary are dropped. Fewer than 3 distinct points give a
// degenerate hull as-is.
std::vector<std::array<double, 2>> convex_hull(std::vector<std::array<double, 2>> pts);
// Shoelace area, positive for counter-clockwise polygons.
double polygon_area(const std::vector<std::array<double, 2>>& poly);
// Intersection of two convex CCW polygons (Sutherland-Hodgman clipping).
std::vector<std::array<double, 2>> clip_convex(const std::vector<std::array<double, 2>>& subject,
                                               const std::vector<std::array<double, 2>>& clip);
// Intersection-over-union of the two point clouds' convex hulls, in [0, 1];
// 0 when either hull is degenerate.
double hull_overlap(const std::vector<std::array<double, 2>>& a,
                    const std::vector<std::array<double, 2>>& b);

// PCA fitted on the pooled candidate trajectories of both sets, then split
// back into labeled 2D clouds.
struct PcaCompare {
  std::vector<std::array<double, 2>> student_xy;
  std::vector<std::array<double, 2>> teacher_xy;
  double frac1 = 0.0, frac2 = 0.0;  // leading variance fractions
  double overlap = 0.0;             // hull intersection-over-union
};

PcaCompare pca_candidates(const CandidateSet& student_set, const CandidateSet& teacher_set);

// Fraction of candidates passing the blocking obstacle on each side of the
// start-goal line, judged at each plan's closest approach to the obstacle.
// The scene must contain exactly one obstacle and it must intersect the
// start-goal segment.
std::pair<double, double> mode_coverage(const CandidateSet& cands, const Scene& scene,
                                        const PointMassState& start, const EnvParams& ep = {});

// --- report emission ---
//
// Writes <prefix>_results.csv (one row per method and seed plus one
// aggregate "all" row per method) and <prefix>_pareto.csv. Schemas:
//   results: method,seed,episodes,mean_return,std_return,success_rate
//   pareto:  method,mean_latency_ms,p95_latency_ms,mean_return
// Numbers are printed with 17 significant digits so parsing them back is
// exact; trailing '#' lines state the std/percentile conventions, followed
// by one '#' line per extra meta entry (provenance, etc.).
void emit_report(const std::vector<RunSummary>& summaries, const std::string& path_prefix,
                 const std::vector<std::string>& meta = {});

// Writes labeled 2D projections: set,index,x,y with variance fractions and
// the hull overlap in a trailing '#' line.
void emit_pca_csv(const PcaCompare& pc, const std::string& path,
                  const std::vector<std::string>& meta = {});

}  // namespace dnk
