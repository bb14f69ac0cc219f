#include "dnk/distill.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>

#include "dnk/encoding.hpp"
#include "dnk/rng.hpp"

namespace dnk {

namespace {

// Stored precision: every persisted value passes through f32 exactly once,
// at generation time, so files and memory never disagree.
int draw_temp_index(Rng& rng, const std::vector<double>& probs) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace

DistillDataset generate_pairs(const Teacher& teacher, const Scorer& scorer,
                              const NoiseSchedule& sched, const TaskSampler& sampler, int M,
                              const std::vector<double>& temps, const std::vector<double>& probs,
                              double beta, uint64_t seed, int threads) {
  require(M >= 1, "generate_pairs: M must be positive");
  require(!temps.empty() && temps.size() == probs.size(), "generate_pairs: temps/probs mismatch");
  double psum = 0.0;
  for (double p : probs) {
    require(p >= 0.0, "generate_pairs: negative probability");
    psum += p;
  }
  require(std::abs(psum - 1.0) <= 1e-9, "generate_pairs: probabilities must sum to 1");
  for (double t : temps) require(t > 0.0, "generate_pairs: temperatures must be positive");
  require(beta >= 0.0, "generate_pairs: negative beta");

  const int H = teacher.H;
  const int flat = teacher.flat_dim();

  DistillDataset ds;
  ds.H = H;
  ds.N = sched.N;
  ds.beta = beta;
  ds.seed = seed;
  ds.pairs.resize(M);
  ds.lambdas.resize(M);

  // Scenes, temperatures, and priors first; each record retries its sampler
  // independently so the outcome depends only on the record's seed chain.
  std::vector<uint64_t> chain_seeds(M);
  for (int i = 0; i < M; ++i) {
    const uint64_t rec_seed = derive_seed(seed, static_cast<uint64_t>(i));
    bool ok = false;
    std::string last_err;
    for (int attempt = 0; attempt < 10 && !ok; ++attempt) {
      const uint64_t att = derive_seed(rec_seed, static_cast<uint64_t>(attempt));
      try {
        SampledTask task = sampler(derive_seed(att, 0));
        Rng trng(derive_seed(att, 1));
        const int ti = draw_temp_index(trng, probs);
        const double lambda = temps[ti];
        std::vector<double> ctx = encode_context(task.start, task.scene);
        for (double& c : ctx) c = round_f32(c);
        ConditionedPrior prior = make_conditioned_prior(ctx, lambda, H, derive_seed(att, 2));
        for (double& v : prior.values) v = round_f32(v);
        ds.pairs[i].prior = std::move(prior);
        ds.lambdas[i] = lambda;
        chain_seeds[i] = derive_seed(att, 3);
        ok = true;
      } catch (const std::exception& e) {
        last_err = e.what();
      }
    }
    if (!ok)
      throw DnkError("generate_pairs: record " + std::to_string(i) + " failed after 10 retries (seed " +
                     std::to_string(rec_seed) + "): " + last_err);
  }

  // One batched denoising pass over every record's chain.
  std::vector<ConditionedPrior> priors(M);
  for (int i = 0; i < M; ++i) priors[i] = ds.pairs[i].prior;
  Matrix targets = reverse_sample_batch(teacher, priors, sched, chain_seeds, threads);

  std::vector<std::vector<double>> traj(M), ctxs(M);
  for (int i = 0; i < M; ++i) {
    std::vector<double> t(targets.row(i), targets.row(i) + flat);
    for (double& v : t) v = round_f32(v);
    // Conditioned entries agreed before rounding, so they still agree after.
    traj[i] = t;
    ctxs[i] = ds.pairs[i].prior.ctx;
    ds.pairs[i].target = std::move(t);
  }

  std::vector<double> scores = scorer_predict_batch(scorer, traj, ctxs);
  for (double& s : scores) s = round_f32(s);
  std::vector<double> weights = quantile_weights(scores, beta);
  for (int i = 0; i < M; ++i) {
    ds.pairs[i].score = scores[i];
    ds.pairs[i].weight = round_f32(weights[i]);
  }
  return ds;
}

namespace {

constexpr char kMagic[8] = {'D', 'N', 'K', 'D', 'S', 'E', 'T', '1'};

struct FileCloser {
  std::FILE* f;
  ~FileCloser() {
    if (f) std::fclose(f);
  }
};

void write_f32(std::FILE* f, const std::vector<double>& v) {
  for (double x : v) {
    float y = static_cast<float>(x);
    require(std::fwrite(&y, sizeof(float), 1, f) == 1, "dataset write failed");
  }
}

std::vector<double> read_f32(std::FILE* f, int n, const char* what) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) {
    float y = 0.0f;
    if (std::fread(&y, sizeof(float), 1, f) != 1)
      throw DnkError(std::string("dataset truncated while reading ") + what);
    v[i] = static_cast<double>(y);
  }
  return v;
}

}  // namespace

void save_dataset(const DistillDataset& ds, const std::string& path) {
  require(!ds.pairs.empty(), "save_dataset: empty dataset");
  std::FILE* f = std::fopen(path.c_str(), "wb");
  require(f != nullptr, "save_dataset: cannot open " + path);
  FileCloser closer{f};
  require(std::fwrite(kMagic, 1, 8, f) == 8, "dataset write failed");
  char header[320];
  std::snprintf(header, sizeof(header),
                "version=1 M=%zu H=%d m=%d n=%d ctx=%d N=%d beta=%.17g config=%016llx seed=%llu\n",
                ds.pairs.size(), ds.H, ds.m, ds.n, ds.ctx_dim, ds.N, ds.beta,
                static_cast<unsigned long long>(ds.config_hash),
                static_cast<unsigned long long>(ds.seed));
  require(std::fwrite(header, 1, std::strlen(header), f) == std::strlen(header),
          "dataset write failed");
  const int flat = ds.H * kStepDim;
  for (const auto& p : ds.pairs) {
    require(static_cast<int>(p.prior.values.size()) == flat &&
                p.prior.fixed_mask.size() == p.prior.values.size() &&
                static_cast<int>(p.prior.ctx.size()) == ds.ctx_dim &&
                p.target.size() == p.prior.values.size(),
            "save_dataset: record shape mismatch");
    write_f32(f, p.prior.values);
    require(std::fwrite(p.prior.fixed_mask.data(), 1, p.prior.fixed_mask.size(), f) ==
                p.prior.fixed_mask.size(),
            "dataset write failed");
    write_f32(f, p.prior.ctx);
    write_f32(f, p.target);
    write_f32(f, {p.score});
    write_f32(f, {p.weight});
  }
}

DistillDataset load_dataset(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  require(f != nullptr, "load_dataset: cannot open " + path);
  FileCloser closer{f};

  char magic[8];
  if (std::fread(magic, 1, 8, f) != 8 || std::memcmp(magic, kMagic, 8) != 0)
    throw DnkError("load_dataset: bad magic, not a distill dataset: " + path);

  std::string header;
  for (;;) {
    int c = std::fgetc(f);
    if (c == EOF) throw DnkError("load_dataset: truncated header");
    if (c == '\n') break;
    header.push_back(static_cast<char>(c));
    if (header.size() > 4096) throw DnkError("load_dataset: oversized header");
  }
  size_t M = 0;
  DistillDataset ds;
  int version = 0;
  unsigned long long cfg = 0, sd = 0;
  if (std::sscanf(header.c_str(),
                  "version=%d M=%zu H=%d m=%d n=%d ctx=%d N=%d beta=%lg config=%llx seed=%llu",
                  &version, &M, &ds.H, &ds.m, &ds.n, &ds.ctx_dim, &ds.N, &ds.beta, &cfg,
                  &sd) != 10)
    throw DnkError("load_dataset: malformed header: " + header);
  ds.config_hash = cfg;
  ds.seed = sd;
  if (version != 1) throw DnkError("load_dataset: unsupported version " + std::to_string(version));
  if (ds.m != kStateDim || ds.n != kActionDim || ds.ctx_dim != kCtxDim || ds.H < 1 || M < 1)
    throw DnkError("load_dataset: header dimensions incompatible with this build: " + header);

  const int flat = ds.H * kStepDim;
  ds.pairs.resize(M);
  for (size_t i = 0; i < M; ++i) {
    DistillPair& p = ds.pairs[i];
    p.prior.values = read_f32(f, flat, "prior");
    p.prior.fixed_mask.resize(flat);
    if (std::fread(p.prior.fixed_mask.data(), 1, flat, f) != static_cast<size_t>(flat))
      throw DnkError("dataset truncated while reading mask");
    p.prior.ctx = read_f32(f, kCtxDim, "context");
    p.prior.lambda = 0.5;  // not persisted; unused after generation
    p.target = read_f32(f, flat, "target");
    p.score = read_f32(f, 1, "score")[0];
    p.weight = read_f32(f, 1, "weight")[0];
  }
  if (std::fgetc(f) != EOF) throw DnkError("load_dataset: trailing bytes after declared records");
  return ds;
}

}  // namespace dnk
