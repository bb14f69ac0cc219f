#include "dnk/control.hpp"

#include <chrono>
#include <cmath>

#include "dnk/rng.hpp"

namespace dnk {

namespace {
double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}
}  // namespace

TrajGenerator student_generator(const StudentModel& m) {
  const StudentModel* model = &m;
  return [model](const PointMassState& s, const Scene& scene, int n_cand, double lambda,
                 uint64_t seed) -> CandidateSet {
    require(n_cand >= 1, "student_generator: n_cand must be positive");
    const double t0 = now_ms();
    const int H = model->H;
    const int flat = model->flat_dim();
    const std::vector<double> ctx = encode_context(s, scene);

    CandidateSet cs;
    cs.cands.resize(n_cand);
    Matrix X(n_cand, model->in_dim());
    for (int i = 0; i < n_cand; ++i) {
      cs.cands[i].prior = make_conditioned_prior(ctx, lambda, H, derive_seed(seed, uint64_t(i)));
      double* xr = X.row(i);
      std::copy(cs.cands[i].prior.values.begin(), cs.cands[i].prior.values.end(), xr);
      std::copy(ctx.begin(), ctx.end(), xr + flat);
    }
    Matrix out;
    student_forward_batch(*model, X, out, &cs.counts);
    for (int i = 0; i < n_cand; ++i) {
      cs.cands[i].traj.assign(out.row(i), out.row(i) + flat);
      require(all_finite(cs.cands[i].traj), "student_generator: non-finite candidate");
    }
    cs.gen_ms = now_ms() - t0;
    return cs;
  };
}

TrajGenerator teacher_generator(const Teacher& t, const NoiseSchedule& sched, int threads) {
  const Teacher* teacher = &t;
  const NoiseSchedule* ns = &sched;
  return [teacher, ns, threads](const PointMassState& s, const Scene& scene, int n_cand,
                                double lambda, uint64_t seed) -> CandidateSet {
    require(n_cand >= 1, "teacher_generator: n_cand must be positive");
    const double t0 = now_ms();
    const int H = teacher->H;
    const int flat = teacher->flat_dim();
    const std::vector<double> ctx = encode_context(s, scene);

    CandidateSet cs;
    cs.cands.resize(n_cand);
    std::vector<ConditionedPrior> priors(n_cand);
    std::vector<uint64_t> chains(n_cand);
    for (int i = 0; i < n_cand; ++i) {
      priors[i] = make_conditioned_prior(ctx, lambda, H, derive_seed(seed, 2 * uint64_t(i)));
      chains[i] = derive_seed(seed, 2 * uint64_t(i) + 1);
    }
    Matrix out = reverse_sample_batch(*teacher, priors, *ns, chains, threads);
    for (int i = 0; i < n_cand; ++i) {
      cs.cands[i].prior = std::move(priors[i]);
      cs.cands[i].traj.assign(out.row(i), out.row(i) + flat);
    }
    cs.gen_ms = now_ms() - t0;
    return cs;
  };
}

Selector geometry_selector(double kc, double ku, double kg, double c_sat, const EnvParams& ep) {
  Selector sel;
  sel.kind = SelectorKind::Geometry;
  sel.kc = kc;
  sel.ku = ku;
  sel.kg = kg;
  sel.c_sat = c_sat;
  sel.ep = ep;
  return sel;
}

Selector learned_selector(const Scorer& scorer) {
  Selector sel;
  sel.kind = SelectorKind::Learned;
  sel.scorer = &scorer;
  return sel;
}

int argmax_lowest(const std::vector<double>& scores) {
  require(!scores.empty(), "argmax_lowest: empty score list");
  int best = 0;
  for (int i = 1; i < int(scores.size()); ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

int select(CandidateSet& cs, const Selector& sel) {
  require(!cs.cands.empty(), "select: empty candidate set");
  const int n = static_cast<int>(cs.cands.size());
  std::vector<double> scores(n);
  if (sel.kind == SelectorKind::Learned) {
    require(sel.scorer != nullptr, "select: learned selector without a scorer");
    std::vector<std::vector<double>> trajs(n), ctxs(n);
    for (int i = 0; i < n; ++i) {
      trajs[i] = cs.cands[i].traj;
      ctxs[i] = cs.cands[i].prior.ctx;
    }
    scores = scorer_predict_batch(*sel.scorer, trajs, ctxs);
  } else {
    for (int i = 0; i < n; ++i) {
      const Candidate& c = cs.cands[i];
      const int H = static_cast<int>(c.traj.size()) / kStepDim;
      const Trajectory phys = traj_to_phys(c.traj.data(), H);
      const Scene scene = scene_from_context(c.prior.ctx);
      scores[i] = score_geometry(phys, scene, sel.kc, sel.ku, sel.kg, sel.c_sat, sel.ep);
    }
  }
  require(all_finite(scores), "select: non-finite candidate score");
  for (int i = 0; i < n; ++i) cs.cands[i].score = scores[i];
  return argmax_lowest(scores);
}

Action first_action(const Candidate& c) {
  require(c.traj.size() >= size_t(kStepDim), "first_action: trajectory too short");
  Action a;
  a.a[0] = c.traj[kStateDim + 0] * kActScale;
  a.a[1] = c.traj[kStateDim + 1] * kActScale;
  return a;
}

EpisodeResult receding_horizon_run(const Scene& scene, const PointMassState& start,
                                   const TrajGenerator& gen, const Selector& sel,
                                   const ControlConfig& cc, uint64_t seed) {
  require(cc.n_cand >= 1 && cc.max_steps >= 1, "receding_horizon_run: bad config");
  Controller ctrl = [&](const PointMassState& s, int tick) -> Action {
    CandidateSet cs = gen(s, scene, cc.n_cand, cc.lambda, derive_seed(seed, uint64_t(tick)));
    require(!cs.cands.empty(), "receding_horizon_run: generator returned no candidates");
    const int best = select(cs, sel);
    return first_action(cs.cands[best]);
  };
  try {
    return rollout(scene, start, ctrl, cc.max_steps, cc.r_goal, cc.ep);
  } catch (const std::exception& e) {
    EpisodeResult r;
    r.success = false;
    r.note = std::string("episode aborted: ") + e.what();
    return r;
  }
}

double check_deadline(const std::vector<double>& latencies_ms, double t_ctrl_ms) {
  require(!latencies_ms.empty(), "check_deadline: no latency samples");
  int ok = 0;
  for (double v : latencies_ms) ok += (v <= t_ctrl_ms) ? 1 : 0;
  return double(ok) / double(latencies_ms.size());
}

}  // namespace dnk
