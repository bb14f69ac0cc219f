#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "dnk/common.hpp"

namespace dnk {

// Every tunable of the pipeline, loadable from plain-text key=value files
// ('#' starts a comment). Unknown keys and out-of-range values are rejected
// by name. The canonical serialization (serialize_config) fixes the key
// order, and config_hash is the FNV-1a digest of that text, embedded in
// every artifact this configuration produces.
struct RunConfig {
  // global
  uint64_t seed = 1;
  int threads = 1;

  // diffusion schedule
  int n_steps = 20;
  double beta_min = 0.02;
  double beta_max = 0.5;

  // shapes
  int horizon = 16;
  int latent = 64;
  int teacher_hidden = 256;
  int scorer_hidden = 64;

  // expert demonstrations
  int n_demos = 2000;

  // teacher training (epochs split into phases of decaying learning rate)
  int teacher_epochs = 300;
  int teacher_batch = 64;
  double teacher_lr = 1e-3;
  int teacher_phases = 2;

  // scorer training (fit to geometric scores of teacher samples)
  int scorer_data = 1500;
  int scorer_epochs = 150;
  int scorer_batch = 64;
  double scorer_lr = 3e-3;
  double scorer_holdout = 0.2;

  // distillation data
  int m_pairs = 20000;
  std::string scene_family = "standard";  // standard | bimodal
  std::vector<double> temps{0.3, 0.5, 0.7};
  std::vector<double> probs{0.25, 0.5, 0.25};
  double weight_beta = 1.0;

  // student training
  std::string variant = "fdk";  // fdk | kdm
  int student_epochs = 200;
  int student_batch = 64;
  double student_lr = 3e-4;
  double a_pred = 1.0, a_rec = 0.8, a_lat = 0.2, a_act = 1.0, a_spec = 0.01, a_inv = 1.0;
  double act_w1 = 1.5, act_wtail = 0.6;

  // control and evaluation
  int n_cand = 64;
  double lambda_infer = 0.5;
  double r_goal = 0.1;
  double t_ctrl_ms = 50.0;
  int max_steps = 120;
  int eval_scenes = 200;
  int eval_seeds = 3;
  std::string selector = "geometry";  // geometry | learned-scorer
  double score_kc = 1.0, score_ku = 0.1, score_kg = 2.0, score_csat = 0.3;

  // environment
  double env_dt = 0.1, env_damping = 0.1, env_amax = 1.0, env_vmax = 2.0, env_ws = 2.0;

  // latency benchmark
  int bench_decisions = 200;

  // artifact paths
  std::string demos_path = "artifacts/demos.dnkdemo";
  std::string teacher_path = "artifacts/teacher.dnkmodel";
  std::string scorer_path = "artifacts/scorer.dnkmodel";
  std::string dataset_path = "artifacts/pairs.dnkdset";
  std::string student_path = "artifacts/student.dnkmodel";
  std::string out_prefix = "artifacts/report";
};

// Parses key=value text starting from the defaults; duplicate keys within
// one text are rejected. Validates before returning.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
// Applies one "key=value" assignment (command-line override).
void apply_override(RunConfig& cfg, const std::string& assignment);
void validate_config(const RunConfig& cfg);
// Canonical form: every key once, fixed order, 17-significant-digit floats.
std::string serialize_config(const RunConfig& cfg);
uint64_t config_hash(const RunConfig& cfg);
// 64-bit FNV-1a over arbitrary bytes (exposed for tests).
uint64_t fnv1a64(const std::string& bytes);

}  // namespace dnk
