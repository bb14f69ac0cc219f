// Kernel benchmark: dense-product throughput (f64/f32) at the shapes the
// training and control loops actually use, plus serial vs OpenMP batched
// inference once per candidate-set. Prints a plain table; no pass/fail.
#include <chrono>
#include <cstdio>
#include <vector>

#include "dnk/encoding.hpp"
#include "dnk/matrix.hpp"
#include "dnk/mlp.hpp"
#include "dnk/parallel.hpp"
#include "dnk/rng.hpp"
#include "dnk/teacher.hpp"

using namespace dnk;
using Clock = std::chrono::steady_clock;

namespace {

double bench_gemm_f64(int M, int K, int N, int reps) {
  Rng rng(1);
  std::vector<double> A(size_t(M) * K), B(size_t(K) * N), C(size_t(M) * N);
  for (auto& v : A) v = rng.normal();
  for (auto& v : B) v = rng.normal();
  auto t0 = Clock::now();
  for (int r = 0; r < reps; ++r) gemm_nn(A.data(), M, K, B.data(), N, C.data(), false);
  double sec = std::chrono::duration<double>(Clock::now() - t0).count();
  return 2.0 * M * K * N * reps / sec / 1e9;
}

double bench_gemm_f32(int M, int K, int N, int reps) {
  Rng rng(1);
  std::vector<float> A(size_t(M) * K), B(size_t(K) * N), C(size_t(M) * N);
  for (auto& v : A) v = float(rng.normal());
  for (auto& v : B) v = float(rng.normal());
  auto t0 = Clock::now();
  for (int r = 0; r < reps; ++r) gemm_nn(A.data(), M, K, B.data(), N, C.data(), false);
  double sec = std::chrono::duration<double>(Clock::now() - t0).count();
  return 2.0 * M * K * N * reps / sec / 1e9;
}

}  // namespace

int main() {
  std::printf("kernel benchmark (single machine, wall clock)\n");
  std::printf("%-34s %10s\n", "case", "GFLOP/s");
  struct Shape {
    const char* name;
    int M, K, N, reps;
  };
  Shape shapes[] = {
      {"gemm f64 64x111x256 (enc fwd)", 64, 111, 256, 2000},
      {"gemm f64 64x256x256 (hidden)", 64, 256, 256, 1000},
      {"gemm f64 64x119x384 (teacher)", 64, 119, 384, 1000},
      {"gemm f64 64x384x384 (teacher)", 64, 384, 384, 500},
      {"gemm f64 256x256x256", 256, 256, 256, 300},
      {"gemm f64 1x256x256 (single row)", 1, 256, 256, 30000},
  };
  for (auto& s : shapes) std::printf("%-34s %10.2f\n", s.name, bench_gemm_f64(s.M, s.K, s.N, s.reps));
  std::printf("%-34s %10.2f\n", "gemm f32 64x256x256", bench_gemm_f32(64, 256, 256, 1000));
  std::printf("%-34s %10.2f\n", "gemm f32 256x256x256", bench_gemm_f32(256, 256, 256, 300));

  // MLP batched forward at student-encoder shape.
  {
    MlpSpec spec{{111, 256, 256, 64}, Act::Tanh};
    Rng rng(2);
    std::vector<double> theta(spec.param_count());
    init_mlp(spec, theta.data(), rng);
    Matrix X(64, 111), Y;
    for (auto& v : X.a) v = rng.normal();
    int reps = 500;
    auto t0 = Clock::now();
    for (int r = 0; r < reps; ++r) mlp_forward_batch(spec, theta.data(), X, Y, nullptr);
    double sec = std::chrono::duration<double>(Clock::now() - t0).count();
    double macs = 64.0 * (111.0 * 256 + 256.0 * 256 + 256.0 * 64);
    std::printf("%-34s %10.2f\n", "mlp f64 batch64 encoder fwd", 2.0 * macs * reps / sec / 1e9);
  }

  // Serial vs OpenMP on the kernel the control loop actually spends its
  // budget in: one candidate set of reverse-denoising chains. Outputs are
  // bitwise identical across thread counts; only wall clock changes.
  {
    Teacher t = make_teacher(16, 384, 4);
    Rng rng(5);
    for (double& w : t.theta) w += 0.02 * rng.normal();
    NoiseSchedule sched = make_schedule(20, 0.02, 0.35);
    const int B = 64;
    std::vector<ConditionedPrior> priors;
    std::vector<uint64_t> chains;
    for (int i = 0; i < B; ++i) {
      std::vector<double> ctx(kCtxDim);
      for (double& c : ctx) c = 0.3 * rng.normal();
      priors.push_back(make_conditioned_prior(ctx, 0.5, t.H, derive_seed(6, uint64_t(i))));
      chains.push_back(derive_seed(7, uint64_t(i)));
    }
    Matrix ref;
    for (int threads : {1, 2, 4}) {
      reverse_sample_batch(t, priors, sched, chains, threads);  // warm up
      auto t0 = Clock::now();
      int reps = 3;
      Matrix out;
      for (int r = 0; r < reps; ++r) out = reverse_sample_batch(t, priors, sched, chains, threads);
      double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count() / reps;
      if (threads == 1) ref = out;
      std::printf("reverse batch 64 chains, threads=%d %8.1f ms  bitwise=%s\n", threads, ms,
                  out.a == ref.a ? "ok" : "DIFFERS");
    }
  }

  // parallel_for scaling probe (honest: on a 1-core host this is ~1x).
  {
    int n = 64;
    std::vector<double> out(n);
    auto work = [&](int i) {
      Rng r(derive_seed(99, uint64_t(i)));
      double s = 0;
      for (int k = 0; k < 200000; ++k) s += r.normal();
      out[i] = s;
    };
    for (int threads : {1, 2, 4}) {
      auto t0 = Clock::now();
      parallel_for(n, threads, work);
      double sec = std::chrono::duration<double>(Clock::now() - t0).count();
      std::printf("parallel_for 64 tasks, threads=%d %9.3f s\n", threads, sec);
    }
  }
  return 0;
}
