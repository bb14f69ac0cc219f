#include <cstdio>
#include <map>
#include <vector>

#include "doctest.h"
#include "dnk/distill.hpp"
#include "dnk/encoding.hpp"
#include "dnk/rng.hpp"

using namespace dnk;

namespace {

// Fixed easy task: one offset obstacle, rest start, fixed goal.
SampledTask fixed_task(uint64_t seed) {
  Rng rng(seed);
  SampledTask t;
  t.start.p = {-1.0 + 0.05 * rng.normal(), 0.0};
  t.start.v = {0.0, 0.0};
  t.scene.goal = {1.0, 0.0};
  t.scene.obstacles = {{0.0, 0.45, 0.12}};
  return t;
}

Teacher small_teacher(uint64_t seed) {
  Teacher t = make_teacher(16, 64, seed);
  Rng rng(derive_seed(seed, 17));
  for (double& w : t.theta) w += 0.02 * rng.normal();
  return t;
}

DistillDataset tiny_dataset(int M, uint64_t seed) {
  Teacher t = small_teacher(3001);
  Scorer sc = make_scorer(16, 32, 41);
  NoiseSchedule sched = make_schedule(6, 0.05, 0.4);
  return generate_pairs(t, sc, sched, fixed_task, M, {0.3, 0.5, 0.7}, {0.25, 0.5, 0.25}, 1.0, seed,
                        1);
}

}  // namespace

TEST_CASE("pair generation mixes temperatures at the declared frequencies") {
  Teacher t = small_teacher(3001);
  Scorer sc = make_scorer(16, 32, 41);
  NoiseSchedule sched = make_schedule(4, 0.05, 0.4);
  const int M = 10000;
  DistillDataset ds =
      generate_pairs(t, sc, sched, fixed_task, M, {0.3, 0.5, 0.7}, {0.25, 0.5, 0.25}, 1.0, 7, 1);
  REQUIRE(static_cast<int>(ds.pairs.size()) == M);
  REQUIRE(static_cast<int>(ds.lambdas.size()) == M);
  std::map<double, int> counts;
  for (double l : ds.lambdas) ++counts[l];
  CHECK(std::abs(counts[0.3] / double(M) - 0.25) < 0.02);
  CHECK(std::abs(counts[0.5] / double(M) - 0.50) < 0.02);
  CHECK(std::abs(counts[0.7] / double(M) - 0.25) < 0.02);
}

TEST_CASE("every pair keeps the conditioned block and spans the weight range") {
  DistillDataset ds = tiny_dataset(400, 11);
  double wmin = 1e9, wmax = -1e9;
  for (const auto& p : ds.pairs) {
    for (int d = 0; d < kStateDim; ++d) {
      CHECK(p.prior.fixed_mask[d] == 1);
      CHECK(p.target[d] == p.prior.values[d]);
    }
    for (size_t d = kStateDim; d < p.prior.values.size(); ++d) CHECK(p.prior.fixed_mask[d] == 0);
    CHECK(p.weight >= 1.0);
    CHECK(p.weight <= 2.0);
    wmin = std::min(wmin, p.weight);
    wmax = std::max(wmax, p.weight);
  }
  CHECK(wmin == 1.0);
  CHECK(wmax == 2.0);

  // Pure function of the seed.
  DistillDataset ds2 = tiny_dataset(400, 11);
  for (size_t i = 0; i < ds.pairs.size(); ++i) {
    CHECK(ds.pairs[i].target == ds2.pairs[i].target);
    CHECK(ds.pairs[i].weight == ds2.pairs[i].weight);
  }
  DistillDataset ds3 = tiny_dataset(60, 12);
  bool differs = false;
  for (size_t i = 0; i < ds3.pairs.size(); ++i)
    differs |= (ds3.pairs[i].target != ds.pairs[i].target);
  CHECK(differs);
}

TEST_CASE("sampler failures are retried per record and capped") {
  Teacher t = small_teacher(3001);
  Scorer sc = make_scorer(16, 32, 41);
  NoiseSchedule sched = make_schedule(4, 0.05, 0.4);

  // Deterministically flaky: fails for odd seeds, succeeds for even.
  TaskSampler flaky = [](uint64_t seed) {
    if (seed & 1) throw DnkError("synthetic sampler failure");
    return fixed_task(seed);
  };
  DistillDataset ds =
      generate_pairs(t, sc, sched, flaky, 50, {0.5}, {1.0}, 1.0, 21, 1);
  CHECK(ds.pairs.size() == 50);

  TaskSampler always_fails = [](uint64_t) -> SampledTask {
    throw DnkError("synthetic sampler failure");
  };
  CHECK_THROWS_WITH_AS(
      generate_pairs(t, sc, sched, always_fails, 3, {0.5}, {1.0}, 1.0, 21, 1),
      doctest::Contains("failed after 10 retries"), DnkError);

  // Input validation.
  CHECK_THROWS_AS(generate_pairs(t, sc, sched, fixed_task, 0, {0.5}, {1.0}, 1.0, 1, 1), DnkError);
  CHECK_THROWS_AS(generate_pairs(t, sc, sched, fixed_task, 2, {0.5}, {0.9}, 1.0, 1, 1), DnkError);
  CHECK_THROWS_AS(generate_pairs(t, sc, sched, fixed_task, 2, {-0.5}, {1.0}, 1.0, 1, 1), DnkError);
}

TEST_CASE("dataset files round-trip bitwise and reject corruption") {
  DistillDataset ds = tiny_dataset(100, 5);
  ds.config_hash = 0xdeadbeefcafef00dULL;
  const char* path = "test_dataset.dnk";
  save_dataset(ds, path);
  DistillDataset back = load_dataset(path);

  REQUIRE(back.pairs.size() == ds.pairs.size());
  CHECK(back.H == ds.H);
  CHECK(back.N == ds.N);
  CHECK(back.beta == ds.beta);
  CHECK(back.config_hash == ds.config_hash);
  CHECK(back.seed == 5);
  for (size_t i = 0; i < ds.pairs.size(); ++i) {
    CHECK(back.pairs[i].prior.values == ds.pairs[i].prior.values);
    CHECK(back.pairs[i].prior.fixed_mask == ds.pairs[i].prior.fixed_mask);
    CHECK(back.pairs[i].prior.ctx == ds.pairs[i].prior.ctx);
    CHECK(back.pairs[i].target == ds.pairs[i].target);
    CHECK(back.pairs[i].score == ds.pairs[i].score);
    CHECK(back.pairs[i].weight == ds.pairs[i].weight);
  }

  // Second save of the loaded data is byte-identical.
  const char* path2 = "test_dataset2.dnk";
  save_dataset(back, path2);
  auto slurp = [](const char* p) {
    std::FILE* f = std::fopen(p, "rb");
    REQUIRE(f != nullptr);
    std::vector<unsigned char> bytes;
    int c;
    while ((c = std::fgetc(f)) != EOF) bytes.push_back(static_cast<unsigned char>(c));
    std::fclose(f);
    return bytes;
  };
  CHECK(slurp(path) == slurp(path2));

  // Corrupted magic is a format error, not a crash.
  {
    std::FILE* f = std::fopen(path2, "rb+");
    REQUIRE(f != nullptr);
    std::fputc('X', f);
    std::fclose(f);
    CHECK_THROWS_WITH_AS(load_dataset(path2), doctest::Contains("bad magic"), DnkError);
  }

  // Truncation mid-record is reported as such.
  {
    auto bytes = slurp(path);
    bytes.resize(bytes.size() / 2);
    const char* path3 = "test_dataset3.dnk";
    std::FILE* f = std::fopen(path3, "wb");
    REQUIRE(f != nullptr);
    std::fwrite(bytes.data(), 1, bytes.size(), f);
    std::fclose(f);
    CHECK_THROWS_WITH_AS(load_dataset(path3), doctest::Contains("truncated"), DnkError);
    std::remove(path3);
  }

  // Trailing garbage is caught too.
  {
    std::FILE* f = std::fopen(path2, "wb");
    REQUIRE(f != nullptr);
    auto bytes = slurp(path);
    std::fwrite(bytes.data(), 1, bytes.size(), f);
    std::fputc(0, f);
    std::fclose(f);
    CHECK_THROWS_WITH_AS(load_dataset(path2), doctest::Contains("trailing"), DnkError);
  }

  std::remove(path);
  std::remove(path2);
  CHECK_THROWS_AS(load_dataset("no_such_file.dnk"), DnkError);
}
