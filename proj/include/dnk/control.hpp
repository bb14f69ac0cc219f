#pragma once
#include <functional>
#include <vector>

#include "dnk/encoding.hpp"
#include "dnk/env.hpp"
#include "dnk/quality.hpp"
#include "dnk/student.hpp"
#include "dnk/teacher.hpp"

namespace dnk {

// One proposed plan: the conditioned prior that seeded it and the model-space
// trajectory decoded from it. `score` is filled in by select().
struct Candidate {
  ConditionedPrior prior;
  std::vector<double> traj;
  double score = 0.0;
};

struct CandidateSet {
  std::vector<Candidate> cands;
  double gen_ms = 0.0;  // wall time spent producing this set
  EvalCounts counts;    // student network passes (zero for other generators)
};

// Produces a candidate set from the measured state and the scene. Generators
// must be deterministic in the seed and must not share randomness across
// candidates, so that dropping or reordering candidates cannot change the
// remaining ones.
using TrajGenerator = std::function<CandidateSet(const PointMassState&, const Scene&, int n_cand,
                                                 double lambda, uint64_t seed)>;

// One-step generator: candidate i draws its prior from derive_seed(seed, i)
// and all candidates are decoded with a single batched forward pass. The
// model must outlive the returned closure.
TrajGenerator student_generator(const StudentModel& m);

// Reverse-diffusion generator behind the same interface; candidate i uses
// derive_seed(seed, 2i) for its prior and derive_seed(seed, 2i + 1) for its
// sampling chain. The net and schedule must outlive the closure.
TrajGenerator teacher_generator(const Teacher& t, const NoiseSchedule& sched, int threads = 1);

enum class SelectorKind { Geometry, Learned };

// Ranks candidates either by the closed-form geometry score (clearance,
// effort, terminal distance — evaluated in physical units against the scene
// recovered from the candidate's context) or by a learned scorer.
struct Selector {
  SelectorKind kind = SelectorKind::Geometry;
  double kc = 1.0, ku = 0.1, kg = 2.0, c_sat = 0.3;
  EnvParams ep{};
  const Scorer* scorer = nullptr;  // learned variant only
};

Selector geometry_selector(double kc, double ku, double kg = 2.0, double c_sat = 0.3,
                           const EnvParams& ep = {});
Selector learned_selector(const Scorer& scorer);

// Scores every candidate in place and returns the index of the best one.
int select(CandidateSet& cs, const Selector& sel);
// Argmax with exact ties resolving to the lowest index (select() reduces to
// this once scores are assigned).
int argmax_lowest(const std::vector<double>& scores);

// First action of a candidate's plan, in physical units.
Action first_action(const Candidate& c);

struct ControlConfig {
  int n_cand = 64;
  double lambda = 0.5;
  int max_steps = 120;
  double r_goal = 0.1;
  EnvParams ep{};
};

// Receding-horizon loop: every tick re-encodes the measured state into a
// fresh context, asks the generator for n_cand plans seeded with
// derive_seed(seed, tick), scores them, and applies the first action of the
// winner. Per-decision wall time (generation + selection) is recorded in
// latencies_ms. A generator or selector fault aborts the episode as a
// failure with the diagnostic in `note` instead of propagating.
EpisodeResult receding_horizon_run(const Scene& scene, const PointMassState& start,
                                   const TrajGenerator& gen, const Selector& sel,
                                   const ControlConfig& cc, uint64_t seed);

// Fraction of decisions whose latency is within the deadline. An empty
// sample list is an error, never a vacuous pass.
double check_deadline(const std::vector<double>& latencies_ms, double t_ctrl_ms);

}  // namespace dnk
