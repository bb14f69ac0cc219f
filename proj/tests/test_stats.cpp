#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dnk/rng.hpp"
#include "dnk/stats.hpp"
#include "doctest.h"

using namespace dnk;

namespace {

// Minimal CSV reader: rows of comma-separated cells, '#' lines skipped.
std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("episode statistics follow the seed-levelled conventions") {
  EpisodeStats st = episode_stats({{1.0, 1.0}, {0.5, 0.7}});
  CHECK(st.worst_case == 0.6);
  CHECK(st.sigma_ep == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(st.mean == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(st.std_across_seeds == doctest::Approx(0.2).epsilon(1e-12));

  // Degenerate: one seed, one episode.
  EpisodeStats one = episode_stats({{0.42}});
  CHECK(one.mean == 0.42);
  CHECK(one.std_across_seeds == 0.0);
  CHECK(one.sigma_ep == 0.0);
  CHECK(one.worst_case == 0.42);

  // Permutation within a seed changes nothing; worst <= mean always.
  Rng rng(31);
  for (int rep = 0; rep < 25; ++rep) {
    std::vector<std::vector<double>> seeds(3);
    for (auto& v : seeds) {
      v.resize(7);
      for (double& x : v) x = rng.normal();
    }
    EpisodeStats a = episode_stats(seeds);
    for (auto& v : seeds) rng.shuffle(v);
    std::swap(seeds[0], seeds[2]);
    EpisodeStats b = episode_stats(seeds);
    CHECK(a.mean == doctest::Approx(b.mean).epsilon(1e-12));
    CHECK(a.sigma_ep == doctest::Approx(b.sigma_ep).epsilon(1e-12));
    // Summation order shifts the last ulp, so exact equality is too strong.
    CHECK(a.worst_case == doctest::Approx(b.worst_case).epsilon(1e-12));
    CHECK(a.worst_case <= a.mean + 1e-15);
  }

  CHECK_THROWS_AS(episode_stats({}), DnkError);
  CHECK_THROWS_AS(episode_stats({{1.0}, {}}), DnkError);
}

TEST_CASE("latency statistics use nearest-rank percentiles") {
  std::vector<double> v(100);
  for (int i = 0; i < 100; ++i) v[size_t(i)] = 100.0 - i;  // unsorted on purpose
  LatencyStats st = latency_stats(v);
  CHECK(st.p95 == 95.0);
  CHECK(st.mean == doctest::Approx(50.5).epsilon(1e-12));

  LatencyStats c = latency_stats({3.5, 3.5, 3.5});
  CHECK(c.mean == 3.5);
  CHECK(c.stdev == 0.0);
  CHECK(c.p95 == 3.5);

  LatencyStats s = latency_stats({8.25});
  CHECK(s.mean == 8.25);
  CHECK(s.stdev == 0.0);
  CHECK(s.p95 == 8.25);

  CHECK_THROWS_AS(latency_stats({}), DnkError);
}

TEST_CASE("return normalization anchors the null and expert references") {
  CHECK(normalize_return(-3.0, -3.0, -1.0) == 0.0);
  CHECK(normalize_return(-1.0, -3.0, -1.0) == 1.0);
  CHECK(normalize_return(-2.0, -3.0, -1.0) == 0.5);
  CHECK(normalize_return(0.0, -3.0, -1.0) == 1.5);  // better than expert is allowed
  CHECK_THROWS_AS(normalize_return(0.0, 1.0, 1.0), DnkError);
  CHECK_THROWS_AS(normalize_return(0.0, 2.0, 1.0), DnkError);
}

TEST_CASE("convex hulls, clipping, and overlap have exact geometric oracles") {
  // Unit square plus interior and duplicate points.
  std::vector<std::array<double, 2>> pts = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5},
                                            {0.2, 0.7}, {1, 1}, {0.5, 0.0}};
  auto hull = convex_hull(pts);
  CHECK(hull.size() == 4);
  CHECK(polygon_area(hull) == doctest::Approx(1.0).epsilon(1e-15));

  // Triangle area via shoelace.
  CHECK(polygon_area({{0, 0}, {2, 0}, {0, 1}}) == doctest::Approx(1.0).epsilon(1e-15));

  // Clip a square by itself: unchanged area.
  auto self = clip_convex(hull, hull);
  CHECK(polygon_area(self) == doctest::Approx(1.0).epsilon(1e-12));

  // Two unit squares offset by 0.5: intersection 0.5, union 1.5, IoU 1/3.
  std::vector<std::array<double, 2>> sq1 = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  std::vector<std::array<double, 2>> sq2 = {{0.5, 0}, {1.5, 0}, {1.5, 1}, {0.5, 1}};
  CHECK(polygon_area(clip_convex(convex_hull(sq1), convex_hull(sq2))) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(hull_overlap(sq1, sq2) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  // Identical, nested, and disjoint clouds.
  CHECK(hull_overlap(sq1, sq1) == doctest::Approx(1.0).epsilon(1e-12));
  std::vector<std::array<double, 2>> inner = {{0.25, 0.25}, {0.75, 0.25}, {0.75, 0.75},
                                              {0.25, 0.75}};
  CHECK(hull_overlap(sq1, inner) == doctest::Approx(0.25).epsilon(1e-12));
  std::vector<std::array<double, 2>> far = {{5, 5}, {6, 5}, {6, 6}, {5, 6}};
  CHECK(hull_overlap(sq1, far) == 0.0);

  // Degenerate cloud (collinear) has no hull area.
  std::vector<std::array<double, 2>> line = {{0, 0}, {1, 1}, {2, 2}};
  CHECK(hull_overlap(sq1, line) == 0.0);
}

TEST_CASE("pooled PCA labels both candidate clouds consistently") {
  // Two synthetic candidate sets living on different branches of a plane.
  Rng rng(88);
  auto make_set = [&](double offset, int n) {
    CandidateSet cs;
    for (int i = 0; i < n; ++i) {
      Candidate c;
      c.traj.assign(4 * kStepDim, 0.0);
      const double u = rng.normal(), w = rng.normal();
      for (int d = 0; d < 4 * kStepDim; ++d)
        c.traj[size_t(d)] = std::sin(0.3 * d) * (u + offset) + 0.05 * std::cos(0.7 * d) * w;
      cs.cands.push_back(std::move(c));
    }
    return cs;
  };
  CandidateSet a = make_set(0.0, 24);
  CandidateSet b = make_set(0.4, 30);

  PcaCompare pc = pca_candidates(a, b);
  REQUIRE(pc.student_xy.size() == 24);
  REQUIRE(pc.teacher_xy.size() == 30);
  CHECK(pc.frac1 >= pc.frac2);
  CHECK(pc.frac1 <= 1.0 + 1e-12);
  CHECK(pc.frac2 >= 0.0);
  CHECK(pc.overlap >= 0.0);
  CHECK(pc.overlap <= 1.0);

  // Identical sets project to identical clouds with full overlap.
  PcaCompare same = pca_candidates(a, a);
  for (size_t i = 0; i < same.student_xy.size(); ++i) {
    CHECK(same.student_xy[i][0] == same.teacher_xy[i][0]);
    CHECK(same.student_xy[i][1] == same.teacher_xy[i][1]);
  }
  CHECK(same.overlap == doctest::Approx(1.0).epsilon(1e-12));

  // Dimension mismatch and empty sets are rejected.
  CandidateSet bad = make_set(0.0, 2);
  bad.cands[1].traj.resize(kStepDim);
  CHECK_THROWS_AS(pca_candidates(bad, b), DnkError);
  CandidateSet empty;
  CHECK_THROWS_AS(pca_candidates(empty, b), DnkError);
}

TEST_CASE("mode coverage classifies detour sides around the blocking obstacle") {
  Scene scene;
  scene.goal = {1.0, 0.0};
  scene.obstacles.push_back({0.0, 0.0, 0.15});
  PointMassState start;
  start.p = {-1.0, 0.0};

  // A plan detouring at height y (phys): straight in x, bump to y near the
  // obstacle. Stored in model space as the generators produce it.
  auto plan = [&](double y) {
    Candidate c;
    const int H = 8;
    c.traj.assign(size_t(H) * kStepDim, 0.0);
    for (int t = 0; t < H; ++t) {
      const double x = -1.0 + 2.0 * t / (H - 1);
      const double bump = y * std::exp(-4.0 * x * x);
      c.traj[size_t(t) * kStepDim + 0] = x / kPosScale;
      c.traj[size_t(t) * kStepDim + 1] = bump / kPosScale;
    }
    return c;
  };

  CandidateSet up;  // all candidates pass above the obstacle
  for (int i = 0; i < 6; ++i) up.cands.push_back(plan(0.3 + 0.05 * i));
  auto [l1, r1] = mode_coverage(up, scene, start);
  CHECK(l1 == 1.0);
  CHECK(r1 == 0.0);

  CandidateSet mirrored;  // equal counts above and below
  for (int i = 0; i < 5; ++i) {
    mirrored.cands.push_back(plan(0.25 + 0.04 * i));
    mirrored.cands.push_back(plan(-(0.25 + 0.04 * i)));
  }
  auto [l2, r2] = mode_coverage(mirrored, scene, start);
  CHECK(l2 == 0.5);
  CHECK(r2 == 0.5);
  CHECK(l2 + r2 == 1.0);

  // Ineligible scenes: no/two obstacles, or an obstacle off the segment.
  Scene none = scene;
  none.obstacles.clear();
  CHECK_THROWS_AS(mode_coverage(up, none, start), DnkError);
  Scene two = scene;
  two.obstacles.push_back({0.5, 0.5, 0.1});
  CHECK_THROWS_AS(mode_coverage(up, two, start), DnkError);
  Scene off = scene;
  off.obstacles[0].cy = 1.0;
  CHECK_THROWS_AS(mode_coverage(up, off, start), DnkError);
}

TEST_CASE("emitted CSV reports parse back exactly and stay self-consistent") {
  RunSummary a;
  a.method = "student";
  a.seeds = {11, 12};
  a.per_seed_returns = {{0.913, 0.87, 1.002}, {0.77, 0.81}};
  a.per_seed_success = {{1, 1, 1}, {0, 1}};
  a.latencies_ms = {1.25, 1.5, 1.75, 9.0};

  RunSummary b;
  b.method = "teacher";
  b.seeds = {11};
  b.per_seed_returns = {{0.95, 0.99}};
  b.per_seed_success = {{1, 1}};
  b.latencies_ms = {20.0, 22.0};

  const std::string prefix = "stats_test_report";
  emit_report({a, b}, prefix);

  auto results = read_csv(prefix + "_results.csv");
  REQUIRE(results.size() == 6);  // header + 3 seed rows + 2 aggregate rows... wait
  // header, student seed 11, student seed 12, student all, teacher seed 11,
  // teacher all
  std::vector<std::string> header = {"method", "seed",       "episodes",
                                     "mean_return", "std_return", "success_rate"};
  CHECK(results[0] == header);

  // Row for student seed 11 parses back to the exact values.
  CHECK(results[1][0] == "student");
  CHECK(results[1][1] == "11");
  CHECK(std::stoul(results[1][2]) == 3);
  const double m11 = (0.913 + 0.87 + 1.002) / 3.0;
  CHECK(std::stod(results[1][3]) == m11);
  CHECK(std::stod(results[1][5]) == 1.0);

  // Aggregate row equals a recomputation from the per-seed rows.
  CHECK(results[3][0] == "student");
  CHECK(results[3][1] == "all");
  const double m12 = (0.77 + 0.81) / 2.0;
  CHECK(std::stod(results[3][3]) == (std::stod(results[1][3]) + std::stod(results[2][3])) / 2.0);
  CHECK(std::stod(results[3][3]) == doctest::Approx((m11 + m12) / 2.0).epsilon(1e-15));
  CHECK(std::stod(results[3][5]) == (1.0 + 0.5) / 2.0);

  auto pareto = read_csv(prefix + "_pareto.csv");
  REQUIRE(pareto.size() == 3);
  std::vector<std::string> pheader = {"method", "mean_latency_ms", "p95_latency_ms",
                                      "mean_return"};
  CHECK(pareto[0] == pheader);
  CHECK(pareto[1][0] == "student");
  CHECK(std::stod(pareto[1][1]) == (1.25 + 1.5 + 1.75 + 9.0) / 4.0);
  CHECK(std::stod(pareto[1][2]) == 9.0);
  CHECK(std::stod(pareto[2][1]) == 21.0);

  // PCA coordinate emission round-trips as well.
  PcaCompare pc;
  pc.student_xy = {{0.125, -3.5}, {1.0 / 3.0, 2.25}};
  pc.teacher_xy = {{-0.7071067811865476, 0.1}};
  pc.frac1 = 0.625;
  pc.frac2 = 0.125;
  pc.overlap = 0.25;
  emit_pca_csv(pc, prefix + "_pca.csv");
  auto coords = read_csv(prefix + "_pca.csv");
  REQUIRE(coords.size() == 4);
  CHECK(coords[0] == std::vector<std::string>{"set", "index", "x", "y"});
  CHECK(coords[1][0] == "student");
  CHECK(std::stod(coords[2][2]) == 1.0 / 3.0);
  CHECK(coords[3][0] == "teacher");
  CHECK(std::stod(coords[3][2]) == -0.7071067811865476);

  // Error paths: unwritable prefix, malformed summaries.
  CHECK_THROWS_AS(emit_report({a}, "no_such_dir/report"), DnkError);
  CHECK_THROWS_AS(emit_report({}, prefix), DnkError);
  RunSummary broken = a;
  broken.per_seed_returns[1].clear();
  CHECK_THROWS_AS(emit_report({broken}, prefix), DnkError);

  std::remove((prefix + "_results.csv").c_str());
  std::remove((prefix + "_pareto.csv").c_str());
  std::remove((prefix + "_pca.csv").c_str());
}
