#include "dnk/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "dnk/dataset_io.hpp"
#include "dnk/encoding.hpp"
#include "dnk/model_io.hpp"
#include "dnk/planner.hpp"

namespace dnk {
namespace {

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void log_stage(const char* stage, const RunConfig& cfg) {
  std::printf("[%s] config=%016llx seed=%llu threads=%d\n", stage,
              static_cast<unsigned long long>(config_hash(cfg)),
              static_cast<unsigned long long>(cfg.seed), cfg.threads);
}

void ensure_parent(const std::string& path) {
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

// Upstream artifacts must already exist; point the user at the stage that
// makes them instead of failing inside a file parser.
void need_artifact(const std::string& path, const char* producer) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(),
          "missing artifact '" + path + "' — run `dnk " + producer + "` first");
}

// Artifacts carry the config hash they were built under. A mismatch is
// legitimate when only downstream keys changed, so it is reported, not fatal.
void note_provenance(const std::string& path, uint64_t embedded, uint64_t current) {
  if (embedded != current)
    std::printf("note: %s was produced under config %016llx (this run: %016llx)\n", path.c_str(),
                static_cast<unsigned long long>(embedded),
                static_cast<unsigned long long>(current));
}

int draw_mixture_index(Rng& rng, const std::vector<double>& probs) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return int(i);
  }
  return int(probs.size()) - 1;
}

Variant variant_from(const std::string& name) {
  return name == "kdm" ? Variant::Kdm : Variant::Fdk;
}

Selector selector_from_config(const RunConfig& cfg, const Scorer* scorer) {
  if (cfg.selector == "learned-scorer") {
    require(scorer != nullptr, "selector: learned-scorer requires a trained scorer");
    return learned_selector(*scorer);
  }
  Selector sel = geometry_selector(cfg.score_kc, cfg.score_ku, cfg.score_kg, cfg.score_csat,
                                   env_from_config(cfg));
  return sel;
}

// Worst return an episode could legally accrue: every step pays the
// workspace diagonal plus maximal control effort. Aborted episodes are
// floored here so a fault can never outrank a finished episode.
double fault_floor(const RunConfig& cfg) {
  const double diag = 2.0 * cfg.env_ws * std::sqrt(2.0);
  return -double(cfg.max_steps) * (diag + 0.1 * cfg.env_amax * cfg.env_amax);
}

std::string default_label(const EvalOptions& opts) {
  return opts.label.empty() ? opts.generator : opts.label;
}

}  // namespace

EnvParams env_from_config(const RunConfig& cfg) {
  EnvParams ep;
  ep.dt = cfg.env_dt;
  ep.damping = cfg.env_damping;
  ep.a_max = cfg.env_amax;
  ep.v_max = cfg.env_vmax;
  ep.ws_lo = -cfg.env_ws;
  ep.ws_hi = cfg.env_ws;
  return ep;
}

NoiseSchedule schedule_from_config(const RunConfig& cfg) {
  return make_schedule(cfg.n_steps, cfg.beta_min, cfg.beta_max);
}

LossWeights loss_weights_from_config(const RunConfig& cfg) {
  LossWeights lw;
  lw.a_pred = cfg.a_pred;
  lw.a_rec = cfg.a_rec;
  lw.a_lat = cfg.a_lat;
  lw.a_act = cfg.a_act;
  lw.a_spec = cfg.a_spec;
  lw.a_inv = cfg.a_inv;
  lw.act_w1 = cfg.act_w1;
  lw.act_wtail = cfg.act_wtail;
  return lw;
}

SceneParams default_scene_params() { return SceneParams{}; }

SampledTask eval_task(const RunConfig& cfg, int index, bool bimodal) {
  const uint64_t base = derive_seed(cfg.seed, streams::kEvalScenes);
  const uint64_t sub = uint64_t(index) + (bimodal ? (uint64_t(1) << 32) : 0);
  Rng rng(derive_seed(base, sub));
  const SceneParams sp = default_scene_params();
  return bimodal ? sample_bimodal_scene(rng, sp) : sample_scene(rng, sp);
}

TaskSampler train_task_sampler(const RunConfig& cfg) {
  const bool bimodal = (cfg.scene_family == "bimodal");
  const SceneParams sp = default_scene_params();
  return [bimodal, sp](uint64_t seed) {
    Rng rng(seed);
    return bimodal ? sample_bimodal_scene(rng, sp) : sample_scene(rng, sp);
  };
}

TrajGenerator expert_generator(const RunConfig& cfg) {
  const EnvParams ep = env_from_config(cfg);
  const int H = cfg.horizon;
  return [ep, H](const PointMassState& s, const Scene& scene, int /*n_cand*/, double /*lambda*/,
                 uint64_t seed) {
    CandidateSet cs;
    const double t0 = now_ms();
    Rng rng(seed);
    Candidate c;
    c.prior.ctx = encode_context(s, scene);
    c.prior.lambda = 0.0;
    std::optional<Trajectory> plan = expert_plan(scene, s, H, rng, ep);
    if (plan) {
      c.traj = traj_to_model(*plan);
    } else {
      // Replanning from a disturbed mid-episode state can fail; coasting for
      // one tick keeps the reference controller defined everywhere.
      c.traj.assign(size_t(H) * kStepDim, 0.0);
      for (int t = 0; t < H; ++t) {
        double* step = c.traj.data() + size_t(t) * kStepDim;
        step[0] = s.p[0] / kPosScale;
        step[1] = s.p[1] / kPosScale;
        step[2] = s.v[0] / kVelScale;
        step[3] = s.v[1] / kVelScale;
      }
    }
    cs.cands.push_back(std::move(c));
    cs.gen_ms = now_ms() - t0;
    return cs;
  };
}

TrajGenerator null_generator(const RunConfig& cfg) {
  const int H = cfg.horizon;
  return [H](const PointMassState& s, const Scene& scene, int /*n_cand*/, double /*lambda*/,
             uint64_t /*seed*/) {
    CandidateSet cs;
    const double t0 = now_ms();
    Candidate c;
    c.prior.ctx = encode_context(s, scene);
    c.prior.lambda = 0.0;
    c.traj.assign(size_t(H) * kStepDim, 0.0);
    for (int t = 0; t < H; ++t) {
      double* step = c.traj.data() + size_t(t) * kStepDim;
      step[0] = s.p[0] / kPosScale;
      step[1] = s.p[1] / kPosScale;
      step[2] = s.v[0] / kVelScale;
      step[3] = s.v[1] / kVelScale;
    }
    cs.cands.push_back(std::move(c));
    cs.gen_ms = now_ms() - t0;
    return cs;
  };
}

void run_gen_demos(const RunConfig& cfg) {
  log_stage("gen-demos", cfg);
  const SceneParams sp = default_scene_params();
  const EnvParams ep = env_from_config(cfg);
  const uint64_t base = derive_seed(cfg.seed, streams::kDemos);

  DemoSet demos;
  demos.H = cfg.horizon;
  demos.traj.reserve(cfg.n_demos);
  demos.ctx.reserve(cfg.n_demos);
  int replans = 0;
  for (int i = 0; i < cfg.n_demos; ++i) {
    const uint64_t rec = derive_seed(base, uint64_t(i));
    bool ok = false;
    for (int attempt = 0; attempt < 64 && !ok; ++attempt) {
      Rng rng(derive_seed(rec, uint64_t(attempt)));
      SampledTask task = sample_scene(rng, sp);
      std::optional<Trajectory> plan = expert_plan(task.scene, task.start, cfg.horizon, rng, ep);
      if (!plan) {
        ++replans;
        continue;
      }
      std::vector<double> traj = traj_to_model(*plan);
      std::vector<double> ctx = encode_context(task.start, task.scene);
      for (double& v : traj) v = round_f32(v);
      for (double& v : ctx) v = round_f32(v);
      demos.traj.push_back(std::move(traj));
      demos.ctx.push_back(std::move(ctx));
      ok = true;
    }
    require(ok, "gen-demos: record " + std::to_string(i) + " found no plannable scene in 64 draws");
  }
  ensure_parent(cfg.demos_path);
  save_demos(demos, cfg.demos_path, config_hash(cfg), cfg.seed);
  std::printf("[gen-demos] wrote %d demonstrations to %s (%d rejected draws)\n", cfg.n_demos,
              cfg.demos_path.c_str(), replans);
}

void run_train_teacher(const RunConfig& cfg) {
  log_stage("train-teacher", cfg);
  need_artifact(cfg.demos_path, "gen-demos");
  uint64_t dhash = 0, dseed = 0;
  DemoSet demos = load_demos(cfg.demos_path, &dhash, &dseed);
  note_provenance(cfg.demos_path, dhash, config_hash(cfg));
  require(demos.H == cfg.horizon, "train-teacher: demo horizon differs from configured horizon");

  Teacher teacher =
      make_teacher(cfg.horizon, cfg.teacher_hidden, derive_seed(cfg.seed, streams::kTeacherInit));
  const NoiseSchedule sched = schedule_from_config(cfg);
  const uint64_t tbase = derive_seed(cfg.seed, streams::kTeacherTrain);

  // Phased schedule: equal slices of the epoch budget, learning rate divided
  // by ten between phases. Adam at a fixed rate stalls well above the noise
  // floor on this objective; the decay does the final digits.
  const int per = cfg.teacher_epochs / cfg.teacher_phases;
  const int extra = cfg.teacher_epochs % cfg.teacher_phases;
  double lr = cfg.teacher_lr;
  for (int p = 0; p < cfg.teacher_phases; ++p) {
    const int epochs_p = per + (p < extra ? 1 : 0);
    if (epochs_p > 0) {
      std::vector<double> curve = train_teacher(teacher, demos, sched, epochs_p,
                                                cfg.teacher_batch, lr, derive_seed(tbase, uint64_t(p)));
      std::printf("[train-teacher] phase %d: %d epochs @ lr %.3g, loss %.6f -> %.6f\n", p, epochs_p,
                  lr, curve.front(), curve.back());
    }
    lr *= 0.1;
  }
  ensure_parent(cfg.teacher_path);
  save_teacher_model(cfg.teacher_path, teacher, config_hash(cfg), cfg.seed);
  std::printf("[train-teacher] wrote %s\n", cfg.teacher_path.c_str());
}

void run_train_scorer(const RunConfig& cfg) {
  log_stage("train-scorer", cfg);
  need_artifact(cfg.teacher_path, "train-teacher");
  Teacher teacher = load_teacher_model(cfg.teacher_path, 0);
  const NoiseSchedule sched = schedule_from_config(cfg);
  const EnvParams ep = env_from_config(cfg);
  const TaskSampler sampler = train_task_sampler(cfg);
  const uint64_t base = derive_seed(cfg.seed, streams::kScorerData);

  // Scorer training pairs come from the teacher itself so the scorer sees
  // the same trajectory distribution it will rank at selection time. Record
  // i is a pure function of its own seed chain, like the distillation set.
  const int M = cfg.scorer_data;
  std::vector<ConditionedPrior> priors(M);
  std::vector<uint64_t> chain_seeds(M);
  std::vector<Scene> scenes(M);
  for (int i = 0; i < M; ++i) {
    const uint64_t rec = derive_seed(base, uint64_t(i));
    bool ok = false;
    std::string last_err;
    for (int attempt = 0; attempt < 10 && !ok; ++attempt) {
      const uint64_t att = derive_seed(rec, uint64_t(attempt));
      try {
        SampledTask task = sampler(derive_seed(att, 0));
        Rng trng(derive_seed(att, 1));
        const double lambda = cfg.temps[size_t(draw_mixture_index(trng, cfg.probs))];
        priors[i] = make_conditioned_prior(encode_context(task.start, task.scene), lambda,
                                           cfg.horizon, derive_seed(att, 2));
        chain_seeds[i] = derive_seed(att, 3);
        scenes[i] = task.scene;
        ok = true;
      } catch (const std::exception& e) {
        last_err = e.what();
      }
    }
    require(ok, "train-scorer: record " + std::to_string(i) + " failed after 10 retries: " + last_err);
  }
  Matrix samples = reverse_sample_batch(teacher, priors, sched, chain_seeds, cfg.threads);

  ScorerData data;
  data.traj.resize(M);
  data.ctx.resize(M);
  data.score.resize(M);
  for (int i = 0; i < M; ++i) {
    data.traj[i].assign(samples.row(i), samples.row(i) + teacher.flat_dim());
    data.ctx[i] = priors[i].ctx;
    data.score[i] = score_geometry(traj_to_phys(data.traj[i].data(), cfg.horizon), scenes[i],
                                   cfg.score_kc, cfg.score_ku, cfg.score_kg, cfg.score_csat, ep);
  }

  Scorer scorer =
      make_scorer(cfg.horizon, cfg.scorer_hidden, derive_seed(cfg.seed, streams::kScorerInit));
  ScorerReport rep = train_scorer(scorer, data, cfg.scorer_epochs, cfg.scorer_batch, cfg.scorer_lr,
                                  cfg.scorer_holdout, derive_seed(cfg.seed, streams::kScorerTrain));
  std::printf("[train-scorer] %d pairs, train MSE %.6f -> %.6f, holdout spearman %.3f%s\n", M,
              rep.curve.front(), rep.curve.back(), rep.holdout_spearman,
              rep.degenerate ? " (degenerate targets)" : "");
  ensure_parent(cfg.scorer_path);
  save_scorer_model(cfg.scorer_path, scorer, config_hash(cfg), cfg.seed);
  std::printf("[train-scorer] wrote %s\n", cfg.scorer_path.c_str());
}

void run_distill_data(const RunConfig& cfg) {
  log_stage("distill-data", cfg);
  need_artifact(cfg.teacher_path, "train-teacher");
  need_artifact(cfg.scorer_path, "train-scorer");
  Teacher teacher = load_teacher_model(cfg.teacher_path, 0);
  Scorer scorer = load_scorer_model(cfg.scorer_path, 0);
  const NoiseSchedule sched = schedule_from_config(cfg);

  DistillDataset ds = generate_pairs(teacher, scorer, sched, train_task_sampler(cfg), cfg.m_pairs,
                                     cfg.temps, cfg.probs, cfg.weight_beta,
                                     derive_seed(cfg.seed, streams::kDistill), cfg.threads);
  ds.config_hash = config_hash(cfg);
  ensure_parent(cfg.dataset_path);
  save_dataset(ds, cfg.dataset_path);
  std::printf("[distill-data] wrote %d pairs (%s scenes) to %s\n", cfg.m_pairs,
              cfg.scene_family.c_str(), cfg.dataset_path.c_str());
}

void run_train_student(const RunConfig& cfg) {
  log_stage("train-student", cfg);
  need_artifact(cfg.dataset_path, "distill-data");
  DistillDataset ds = load_dataset(cfg.dataset_path);
  note_provenance(cfg.dataset_path, ds.config_hash, config_hash(cfg));
  require(ds.H == cfg.horizon, "train-student: dataset horizon differs from configured horizon");

  StudentModel m = make_student(cfg.horizon, cfg.latent, variant_from(cfg.variant),
                                derive_seed(cfg.seed, streams::kStudentInit));
  const LossWeights lw = loss_weights_from_config(cfg);
  TrainResult tr = train_student(m, ds, lw, cfg.student_epochs, cfg.student_batch, cfg.student_lr,
                                 derive_seed(cfg.seed, streams::kStudentTrain));
  require(!tr.curve.empty(), "train-student: no epochs trained");
  std::printf("[train-student] %s: %d epochs, total loss %.6f -> %.6f (pred %.6f)%s\n",
              cfg.variant.c_str(), tr.epochs_done, tr.curve.front().total, tr.curve.back().total,
              tr.curve.back().pred, tr.diverged ? " [diverged; restored last good epoch]" : "");
  ensure_parent(cfg.student_path);
  save_student_model(cfg.student_path, m, config_hash(cfg), cfg.seed);
  std::printf("[train-student] wrote %s\n", cfg.student_path.c_str());
}

RunSummary run_evaluate(const RunConfig& cfg, const EvalOptions& opts) {
  log_stage("evaluate", cfg);
  require(opts.generator == "student" || opts.generator == "teacher" ||
              opts.generator == "expert" || opts.generator == "null",
          "evaluate: generator must be student, teacher, expert, or null");

  // Loaded models live here so the generator/selector closures stay valid.
  std::optional<StudentModel> student;
  std::optional<Teacher> teacher;
  std::optional<Scorer> scorer;
  const NoiseSchedule sched = schedule_from_config(cfg);

  TrajGenerator gen;
  if (opts.generator == "student") {
    need_artifact(cfg.student_path, "train-student");
    student = load_student_model(cfg.student_path, 0);
    gen = student_generator(*student);
  } else if (opts.generator == "teacher") {
    need_artifact(cfg.teacher_path, "train-teacher");
    teacher = load_teacher_model(cfg.teacher_path, 0);
    gen = teacher_generator(*teacher, sched, cfg.threads);
  } else if (opts.generator == "expert") {
    gen = expert_generator(cfg);
  } else {
    gen = null_generator(cfg);
  }
  if (cfg.selector == "learned-scorer") {
    need_artifact(cfg.scorer_path, "train-scorer");
    scorer = load_scorer_model(cfg.scorer_path, 0);
  }
  const Selector sel = selector_from_config(cfg, scorer ? &*scorer : nullptr);

  ControlConfig cc;
  cc.n_cand = cfg.n_cand;
  cc.lambda = cfg.lambda_infer;
  cc.max_steps = cfg.max_steps;
  cc.r_goal = cfg.r_goal;
  cc.ep = env_from_config(cfg);

  RunSummary rs;
  rs.method = default_label(opts);
  rs.seeds.resize(size_t(cfg.eval_seeds));
  for (int j = 0; j < cfg.eval_seeds; ++j) rs.seeds[size_t(j)] = uint64_t(j);
  rs.per_seed_returns.assign(size_t(cfg.eval_seeds), {});
  rs.per_seed_success.assign(size_t(cfg.eval_seeds), {});

  const uint64_t epbase = derive_seed(cfg.seed, streams::kEvalEpisodes);
  const double floor = fault_floor(cfg);
  int faults = 0, successes = 0;
  for (int i = 0; i < cfg.eval_scenes; ++i) {
    const SampledTask task = eval_task(cfg, i, opts.bimodal);
    for (int j = 0; j < cfg.eval_seeds; ++j) {
      const uint64_t es = derive_seed(epbase, uint64_t(i) * uint64_t(cfg.eval_seeds) + uint64_t(j));
      EpisodeResult r = receding_horizon_run(task.scene, task.start, gen, sel, cc, es);
      if (!r.note.empty()) {
        ++faults;
        r.raw_return = floor;
        if (faults <= 3) std::printf("[evaluate] %s\n", r.note.c_str());
      }
      rs.per_seed_returns[size_t(j)].push_back(r.raw_return);
      rs.per_seed_success[size_t(j)].push_back(r.success ? 1 : 0);
      rs.latencies_ms.insert(rs.latencies_ms.end(), r.latencies_ms.begin(), r.latencies_ms.end());
      successes += r.success ? 1 : 0;
    }
  }
  const EpisodeStats st = episode_stats(rs.per_seed_returns);
  std::printf("[evaluate] %s (%s scenes): mean return %.4f, worst seed %.4f, success %d/%d%s\n",
              rs.method.c_str(), opts.bimodal ? "bimodal" : "standard", st.mean, st.worst_case,
              successes, cfg.eval_scenes * cfg.eval_seeds,
              faults ? (" [" + std::to_string(faults) + " aborted]").c_str() : "");

  if (opts.write_file) {
    const std::string path = cfg.out_prefix + "." + rs.method + ".run.csv";
    ensure_parent(path);
    save_run_file(rs, path, config_hash(cfg), cfg.seed);
    std::printf("[evaluate] wrote %s\n", path.c_str());
  }
  return rs;
}

void save_run_file(const RunSummary& rs, const std::string& path, uint64_t config_hash,
                   uint64_t seed) {
  require(rs.per_seed_returns.size() == rs.seeds.size() &&
              rs.per_seed_success.size() == rs.seeds.size(),
          "run file: inconsistent summary");
  FILE* f = std::fopen(path.c_str(), "wb");
  require(f != nullptr, "run file: cannot write " + path);
  std::fputs("record,seed,episode,return,success\n", f);
  for (size_t j = 0; j < rs.seeds.size(); ++j) {
    require(rs.per_seed_returns[j].size() == rs.per_seed_success[j].size(),
            "run file: returns/success length mismatch");
    for (size_t i = 0; i < rs.per_seed_returns[j].size(); ++i)
      std::fprintf(f, "episode,%llu,%zu,%.17g,%d\n",
                   static_cast<unsigned long long>(rs.seeds[j]), i, rs.per_seed_returns[j][i],
                   rs.per_seed_success[j][i] ? 1 : 0);
  }
  for (double ms : rs.latencies_ms) std::fprintf(f, "latency,%.17g,,,\n", ms);
  std::fprintf(f, "# method=%s\n", rs.method.c_str());
  std::fprintf(f, "# config=%016llx seed=%llu\n", static_cast<unsigned long long>(config_hash),
               static_cast<unsigned long long>(seed));
  require(std::fclose(f) == 0, "run file: close failed for " + path);
}

RunSummary load_run_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "run file: cannot open " + path + " — run `dnk evaluate` first");
  std::string line;
  require(static_cast<bool>(std::getline(in, line)) && line == "record,seed,episode,return,success",
          "run file: bad header in " + path);

  RunSummary rs;
  bool have_method = false;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string tag = "# method=";
      if (line.rfind(tag, 0) == 0) {
        rs.method = line.substr(tag.size());
        have_method = true;
      }
      continue;
    }
    std::stringstream ss(line);
    std::string kind, a, b, c, d;
    std::getline(ss, kind, ',');
    std::getline(ss, a, ',');
    std::getline(ss, b, ',');
    std::getline(ss, c, ',');
    std::getline(ss, d, ',');
    const std::string where = path + ":" + std::to_string(lineno);
    if (kind == "episode") {
      size_t pos = 0;
      const uint64_t seed = std::stoull(a, &pos);
      require(pos == a.size(), "run file: bad seed at " + where);
      const double ret = std::stod(c, &pos);
      require(pos == c.size(), "run file: bad return at " + where);
      require(d == "0" || d == "1", "run file: bad success flag at " + where);
      size_t j = 0;
      for (; j < rs.seeds.size(); ++j)
        if (rs.seeds[j] == seed) break;
      if (j == rs.seeds.size()) {
        rs.seeds.push_back(seed);
        rs.per_seed_returns.emplace_back();
        rs.per_seed_success.emplace_back();
      }
      rs.per_seed_returns[j].push_back(ret);
      rs.per_seed_success[j].push_back(d == "1" ? 1 : 0);
    } else if (kind == "latency") {
      size_t pos = 0;
      const double ms = std::stod(a, &pos);
      require(pos == a.size(), "run file: bad latency at " + where);
      rs.latencies_ms.push_back(ms);
    } else {
      throw DnkError("run file: unknown record '" + kind + "' at " + where);
    }
  }
  require(have_method, "run file: missing method footer in " + path);
  require(!rs.seeds.empty(), "run file: no episodes in " + path);
  return rs;
}

void run_report(const RunConfig& cfg, const std::vector<std::string>& run_files) {
  log_stage("report", cfg);
  require(!run_files.empty(), "report: no run files given (pass --runs)");
  std::vector<RunSummary> sums;
  sums.reserve(run_files.size());
  for (const std::string& f : run_files) sums.push_back(load_run_file(f));
  ensure_parent(cfg.out_prefix);
  char prov[64];
  std::snprintf(prov, sizeof prov, "config=%016llx seed=%llu",
                static_cast<unsigned long long>(config_hash(cfg)),
                static_cast<unsigned long long>(cfg.seed));
  emit_report(sums, cfg.out_prefix, {std::string(prov)});
  std::printf("[report] wrote %s_results.csv and %s_pareto.csv (%zu methods)\n",
              cfg.out_prefix.c_str(), cfg.out_prefix.c_str(), sums.size());
}

BenchResult run_bench_latency(const RunConfig& cfg) {
  log_stage("bench-latency", cfg);
  need_artifact(cfg.teacher_path, "train-teacher");
  need_artifact(cfg.student_path, "train-student");
  Teacher teacher = load_teacher_model(cfg.teacher_path, 0);
  StudentModel student = load_student_model(cfg.student_path, 0);
  std::optional<Scorer> scorer;
  if (cfg.selector == "learned-scorer") {
    need_artifact(cfg.scorer_path, "train-scorer");
    scorer = load_scorer_model(cfg.scorer_path, 0);
  }
  const Selector sel = selector_from_config(cfg, scorer ? &*scorer : nullptr);
  const NoiseSchedule sched = schedule_from_config(cfg);
  const SceneParams sp = default_scene_params();
  const uint64_t base = derive_seed(cfg.seed, streams::kBench);

  auto bench_one = [&](const TrajGenerator& gen) {
    std::vector<double> lat;
    lat.reserve(size_t(cfg.bench_decisions));
    for (int d = -1; d < cfg.bench_decisions; ++d) {
      // d == -1 is an untimed warmup decision.
      const uint64_t ds = derive_seed(base, uint64_t(d + 1));
      Rng rng(derive_seed(ds, 0));
      const SampledTask task = sample_scene(rng, sp);
      const double t0 = now_ms();
      CandidateSet cs = gen(task.start, task.scene, cfg.n_cand, cfg.lambda_infer,
                            derive_seed(ds, 1));
      select(cs, sel);
      const double t1 = now_ms();
      if (d >= 0) lat.push_back(t1 - t0);
    }
    return lat;
  };

  const std::vector<double> tl = bench_one(teacher_generator(teacher, sched, cfg.threads));
  const std::vector<double> sl = bench_one(student_generator(student));

  BenchResult br;
  br.teacher = latency_stats(tl);
  br.student = latency_stats(sl);
  br.student_deadline_fraction = check_deadline(sl, cfg.t_ctrl_ms);
  br.speedup = br.teacher.mean / br.student.mean;

  const std::string path = cfg.out_prefix + "_latency.csv";
  ensure_parent(path);
  FILE* f = std::fopen(path.c_str(), "wb");
  require(f != nullptr, "bench-latency: cannot write " + path);
  std::fputs("method,decisions,mean_ms,std_ms,p95_ms,deadline_fraction\n", f);
  std::fprintf(f, "teacher,%d,%.17g,%.17g,%.17g,%.17g\n", cfg.bench_decisions, br.teacher.mean,
               br.teacher.stdev, br.teacher.p95, check_deadline(tl, cfg.t_ctrl_ms));
  std::fprintf(f, "student,%d,%.17g,%.17g,%.17g,%.17g\n", cfg.bench_decisions, br.student.mean,
               br.student.stdev, br.student.p95, br.student_deadline_fraction);
  std::fprintf(f, "# t_ctrl_ms=%.17g speedup_mean=%.17g\n", cfg.t_ctrl_ms, br.speedup);
  std::fprintf(f, "# config=%016llx seed=%llu\n",
               static_cast<unsigned long long>(config_hash(cfg)),
               static_cast<unsigned long long>(cfg.seed));
  require(std::fclose(f) == 0, "bench-latency: close failed for " + path);

  std::printf("[bench-latency] teacher %.3f ms, student %.3f ms, speedup %.2fx, "
              "deadline_fraction %.4f -> %s\n",
              br.teacher.mean, br.student.mean, br.speedup, br.student_deadline_fraction,
              path.c_str());
  return br;
}

PcaCompare run_pca(const RunConfig& cfg) {
  log_stage("pca", cfg);
  need_artifact(cfg.teacher_path, "train-teacher");
  need_artifact(cfg.student_path, "train-student");
  Teacher teacher = load_teacher_model(cfg.teacher_path, 0);
  StudentModel student = load_student_model(cfg.student_path, 0);
  const NoiseSchedule sched = schedule_from_config(cfg);

  const SampledTask task = eval_task(cfg, 0, /*bimodal=*/true);
  const uint64_t base = derive_seed(cfg.seed, streams::kPca);
  const TrajGenerator sgen = student_generator(student);
  const TrajGenerator tgen = teacher_generator(teacher, sched, cfg.threads);
  CandidateSet scs = sgen(task.start, task.scene, cfg.n_cand, cfg.lambda_infer,
                          derive_seed(base, 0));
  CandidateSet tcs = tgen(task.start, task.scene, cfg.n_cand, cfg.lambda_infer,
                          derive_seed(base, 1));
  const PcaCompare pc = pca_candidates(scs, tcs);

  const std::string path = cfg.out_prefix + "_pca.csv";
  ensure_parent(path);
  char prov[64];
  std::snprintf(prov, sizeof prov, "config=%016llx seed=%llu",
                static_cast<unsigned long long>(config_hash(cfg)),
                static_cast<unsigned long long>(cfg.seed));
  emit_pca_csv(pc, path, {std::string(prov)});
  std::printf("[pca] variance fractions %.3f/%.3f, hull overlap %.3f -> %s\n", pc.frac1, pc.frac2,
              pc.overlap, path.c_str());
  return pc;
}

}  // namespace dnk
