#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "dnk/config.hpp"
#include "dnk/control.hpp"
#include "dnk/distill.hpp"
#include "dnk/stats.hpp"

namespace dnk {

// Every stage derives its randomness from the run seed through a fixed,
// documented stream index, so stages can be re-run independently and two
// runs at the same config are bitwise identical. Stream k of seed s is
// derive_seed(s, k); per-item seeds nest one more level.
namespace streams {
constexpr uint64_t kDemos = 1;         // demo i: derive(derive(seed, kDemos), i)
constexpr uint64_t kTeacherInit = 2;
constexpr uint64_t kTeacherTrain = 3;  // phase p: derive(derive(seed, kTeacherTrain), p)
constexpr uint64_t kScorerData = 4;    // record i: derive(derive(seed, kScorerData), i)
constexpr uint64_t kScorerInit = 5;
constexpr uint64_t kScorerTrain = 6;
constexpr uint64_t kDistill = 7;
constexpr uint64_t kStudentInit = 8;
constexpr uint64_t kStudentTrain = 9;
constexpr uint64_t kEvalScenes = 10;   // scene i: derive(derive(seed, kEvalScenes), i [+ 2^32 if bimodal])
constexpr uint64_t kEvalEpisodes = 11; // episode: derive(derive(seed, kEvalEpisodes), scene * n_seeds + seed_idx)
constexpr uint64_t kBench = 12;        // decision d: derive(derive(seed, kBench), d)
constexpr uint64_t kPca = 13;
constexpr uint64_t kValidation = 14;   // held-out distillation pairs
}  // namespace streams

// Config-to-module adapters.
EnvParams env_from_config(const RunConfig& cfg);
NoiseSchedule schedule_from_config(const RunConfig& cfg);
LossWeights loss_weights_from_config(const RunConfig& cfg);
SceneParams default_scene_params();

// Held-out evaluation task i (standard or bimodal family). Training stages
// draw from different seed streams, so these scenes never appear upstream.
SampledTask eval_task(const RunConfig& cfg, int index, bool bimodal);

// Scene source for dataset generation, honoring cfg.scene_family.
TaskSampler train_task_sampler(const RunConfig& cfg);

// Reference controllers for return normalization: the expert re-plans every
// tick (zero-action fallback if planning fails mid-episode), the null
// controller always emits zero action. Both produce one candidate per call.
TrajGenerator expert_generator(const RunConfig& cfg);
TrajGenerator null_generator(const RunConfig& cfg);

// Pipeline stages. Each reads only its declared upstream artifacts and
// writes its declared outputs; a missing input names the subcommand that
// produces it. All log a provenance line (stage, config hash, seed).
void run_gen_demos(const RunConfig& cfg);
void run_train_teacher(const RunConfig& cfg);
void run_train_scorer(const RunConfig& cfg);
void run_distill_data(const RunConfig& cfg);
void run_train_student(const RunConfig& cfg);

struct EvalOptions {
  std::string generator = "student";  // student | teacher | expert | null
  bool bimodal = false;               // evaluate on the bimodal scene family
  std::string label;                  // method name in outputs (default: generator)
  bool write_file = true;             // write <out_prefix>.<label>.run.csv
};

// Runs eval_scenes held-out scenes x eval_seeds episodes with the chosen
// generator and the configured selector. Returns raw (unnormalized) returns
// grouped by evaluation seed index; per-decision latencies are pooled.
RunSummary run_evaluate(const RunConfig& cfg, const EvalOptions& opts);

// Run-file round trip used by the report stage: episode and latency records
// in one CSV, provenance in '#' footers.
void save_run_file(const RunSummary& rs, const std::string& path, uint64_t config_hash,
                   uint64_t seed);
RunSummary load_run_file(const std::string& path);

// Aggregates previously written run files into <out_prefix>_results.csv and
// <out_prefix>_pareto.csv.
void run_report(const RunConfig& cfg, const std::vector<std::string>& run_files);

struct BenchResult {
  LatencyStats teacher;
  LatencyStats student;
  double student_deadline_fraction = 0.0;  // decisions within t_ctrl_ms
  double speedup = 0.0;                    // teacher mean / student mean
};

// Times bench_decisions full decisions (generate + select) per generator on
// a fixed scene stream and writes <out_prefix>_latency.csv.
BenchResult run_bench_latency(const RunConfig& cfg);

// Projects teacher and student candidate sets for one bimodal scene into a
// shared 2D PCA basis and writes <out_prefix>_pca.csv.
PcaCompare run_pca(const RunConfig& cfg);

// Fast invariant checks (gradients, latent algebra, serialization round
// trips). Prints one line per check; returns the number of failures.
int run_selftest(const RunConfig& cfg);

}  // namespace dnk
