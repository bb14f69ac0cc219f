#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "dnk/dataset_io.hpp"
#include "dnk/gradcheck.hpp"
#include "dnk/model_io.hpp"
#include "dnk/pipeline.hpp"

namespace dnk {
namespace {

// Small models keep the finite-difference sweeps fast; the gamma head is
// biased away from the |gain| = 1 hinge kink so central differences are valid.
StudentModel selftest_model(Variant v, uint64_t seed) {
  StudentModel m = make_student(2, 4, v, seed);
  Rng rng(derive_seed(seed, 5));
  for (double& w : m.theta) w += 0.05 * rng.normal();
  if (v == Variant::Fdk) {
    double* g = m.theta.data() + m.gamma_off();
    const MlpSpec& gs = m.gamma_spec;
    const int last = gs.layers() - 1;
    double* W = g + gs.weight_offset(last);
    for (size_t i = 0; i < size_t(gs.dims[last]) * gs.dims[last + 1]; ++i)
      W[i] = 0.01 * rng.normal();
    double* b = g + gs.bias_offset(last);
    const double safe[4] = {1.3, 0.7, -1.4, 0.2};
    for (int j = 0; j < gs.dims[last + 1]; ++j) b[j] = safe[j % 4];
  }
  return m;
}

StudentBatch selftest_batch(const StudentModel& m, int B, uint64_t seed) {
  Rng rng(seed);
  StudentBatch b;
  b.X = Matrix(B, m.in_dim());
  b.Xt = Matrix(B, m.in_dim());
  b.T = Matrix(B, m.flat_dim());
  b.w.resize(size_t(B));
  for (double& x : b.X.a) x = 0.5 * rng.normal();
  for (double& x : b.Xt.a) x = 0.5 * rng.normal();
  for (int i = 0; i < B; ++i) {
    for (int d = 0; d < m.flat_dim(); ++d) b.T.at(i, d) = b.Xt.at(i, d);
    b.w[size_t(i)] = 1.0 + rng.uniform();
  }
  return b;
}

// The latent-consistency target is a stop-gradient branch; finite differences
// must treat it as the constant it is during optimization.
Matrix encoded_targets(const StudentModel& m, const StudentBatch& b) {
  Matrix Z(b.Xt.rows, m.latent);
  for (int i = 0; i < b.Xt.rows; ++i) {
    std::vector<double> xt(b.Xt.row(i), b.Xt.row(i) + m.in_dim());
    std::vector<double> z = student_encode(m, xt);
    std::copy(z.begin(), z.end(), Z.row(i));
  }
  return Z;
}

double full_loss_fd_error(Variant v, uint64_t seed) {
  StudentModel m = selftest_model(v, seed);
  StudentBatch b = selftest_batch(m, 3, derive_seed(seed, 1));
  const Matrix Zconst = encoded_targets(m, b);
  const LossWeights lw;
  StudentModel probe = m;
  auto f = [&](const std::vector<double>& params, std::vector<double>* g) {
    probe.theta = params;
    if (!g) return student_loss(probe, b, lw, nullptr, &Zconst).total;
    g->assign(probe.param_count(), 0.0);
    return student_loss(probe, b, lw, g->data(), &Zconst).total;
  };
  return grad_check(f, m.theta, 1e-5);
}

std::vector<double> rand_ctx(uint64_t seed) {
  Rng rng(seed);
  std::vector<double> ctx(kCtxDim);
  for (double& c : ctx) c = 0.3 * rng.normal();
  return ctx;
}

}  // namespace

int run_selftest(const RunConfig& cfg) {
  std::printf("[selftest] config=%016llx seed=%llu\n",
              static_cast<unsigned long long>(config_hash(cfg)),
              static_cast<unsigned long long>(cfg.seed));

  int fails = 0;
  auto check = [&fails](const char* name, const std::function<void()>& fn) {
    try {
      fn();
      std::printf("selftest: %-26s ok\n", name);
    } catch (const std::exception& e) {
      ++fails;
      std::printf("selftest: %-26s FAILED: %s\n", name, e.what());
    }
  };

  check("fdk gradients", [&] {
    const double err = full_loss_fd_error(Variant::Fdk, derive_seed(cfg.seed, 101));
    require(err < 1e-4, "relative error " + std::to_string(err));
  });

  check("kdm gradients", [&] {
    const double err = full_loss_fd_error(Variant::Kdm, derive_seed(cfg.seed, 102));
    require(err < 1e-4, "relative error " + std::to_string(err));
  });

  check("stop-gradient target", [&] {
    StudentModel m = selftest_model(Variant::Fdk, derive_seed(cfg.seed, 103));
    StudentBatch b = selftest_batch(m, 4, derive_seed(cfg.seed, 104));
    std::vector<double> g_full(m.param_count(), 0.0), g_const(m.param_count(), 0.0);
    const double l_full = student_loss(m, b, LossWeights{}, g_full.data()).total;
    const Matrix Zconst = encoded_targets(m, b);
    const double l_const = student_loss(m, b, LossWeights{}, g_const.data(), &Zconst).total;
    require(l_full == l_const && g_full == g_const,
            "supplying the encoded target as a constant changed gradients");
  });

  check("batched forward", [&] {
    StudentModel m = selftest_model(Variant::Fdk, derive_seed(cfg.seed, 105));
    Rng rng(derive_seed(cfg.seed, 106));
    Matrix X(5, m.in_dim());
    for (double& x : X.a) x = 0.4 * rng.normal();
    Matrix out;
    student_forward_batch(m, X, out);
    for (int i = 0; i < X.rows; ++i) {
      std::vector<double> xi(X.row(i), X.row(i) + m.in_dim());
      std::vector<double> z = student_decode(m, fdk_apply(m, student_encode(m, xi)));
      for (int d = 0; d < m.flat_dim(); ++d)
        require(z[size_t(d)] == out.at(i, d), "batched row differs from single forward");
    }
  });

  check("factor inverse at init", [&] {
    StudentModel m = make_student(2, 6, Variant::Fdk, derive_seed(cfg.seed, 107));
    const Matrix P = get_fdk_P(m), Q = get_fdk_Q(m);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        double pq = 0.0;
        for (int k = 0; k < 6; ++k) pq += P.at(i, k) * Q.at(k, j);
        require(std::abs(pq - (i == j ? 1.0 : 0.0)) < 1e-8, "P Q deviates from identity at init");
      }
  });

  check("prior inpainting", [&] {
    Teacher t = make_teacher(2, 8, derive_seed(cfg.seed, 108));
    Rng rng(derive_seed(cfg.seed, 109));
    for (double& w : t.theta) w += 0.02 * rng.normal();
    const std::vector<double> ctx = rand_ctx(derive_seed(cfg.seed, 110));
    const NoiseSchedule sched = schedule_from_config(cfg);
    const ConditionedPrior prior =
        make_conditioned_prior(ctx, cfg.lambda_infer, 2, derive_seed(cfg.seed, 111));
    const std::vector<double> s = reverse_sample(t, prior, sched, derive_seed(cfg.seed, 112));
    for (int d = 0; d < kStateDim; ++d) {
      require(prior.fixed_mask[size_t(d)] == 1, "first state block must be fixed");
      require(s[size_t(d)] == ctx[size_t(d)], "fixed entries drifted during denoising");
    }
  });

  check("noise schedule", [&] {
    const NoiseSchedule sched = schedule_from_config(cfg);
    for (int k = 1; k < sched.N; ++k)
      require(sched.alpha_bar[size_t(k)] < sched.alpha_bar[size_t(k - 1)],
              "alpha_bar must decrease");
    require(std::sqrt(sched.alpha_bar[size_t(sched.N - 1)]) < 0.2,
            "terminal signal level too high: the prior would stay informative");
  });

  check("config round trip", [&] {
    const std::string canon = serialize_config(cfg);
    const RunConfig back = parse_config(canon);
    require(serialize_config(back) == canon, "canonical text is not a parse fixed point");
    require(config_hash(back) == config_hash(cfg), "hash changed across round trip");
  });

  const std::filesystem::path tmp =
      std::filesystem::temp_directory_path() / ("dnk_selftest_" + std::to_string(cfg.seed));
  std::filesystem::create_directories(tmp);

  check("model file round trip", [&] {
    Teacher t = make_teacher(2, 8, derive_seed(cfg.seed, 113));
    const std::string tp = (tmp / "t.dnkmodel").string();
    save_teacher_model(tp, t, config_hash(cfg), cfg.seed);
    const Teacher t2 = load_teacher_model(tp, config_hash(cfg));
    require(t2.theta == t.theta, "teacher parameters changed across save/load");

    StudentModel m = make_student(2, 4, Variant::Kdm, derive_seed(cfg.seed, 114));
    const std::string mp = (tmp / "m.dnkmodel").string();
    save_student_model(mp, m, config_hash(cfg), cfg.seed);
    const StudentModel m2 = load_student_model(mp, config_hash(cfg));
    require(m2.theta == m.theta && m2.variant == m.variant,
            "student parameters changed across save/load");
  });

  check("dataset file round trip", [&] {
    DistillDataset ds;
    ds.H = 2;
    ds.N = 5;
    ds.beta = 1.0;
    ds.config_hash = config_hash(cfg);
    ds.seed = cfg.seed;
    Rng rng(derive_seed(cfg.seed, 115));
    for (int i = 0; i < 3; ++i) {
      DistillPair p;
      std::vector<double> ctx = rand_ctx(derive_seed(cfg.seed, 116 + uint64_t(i)));
      for (double& c : ctx) c = round_f32(c);  // quantize before the prior copies it
      p.prior = make_conditioned_prior(ctx, 0.5, 2, derive_seed(cfg.seed, 120 + uint64_t(i)));
      for (double& v : p.prior.values) v = round_f32(v);
      p.target.resize(p.prior.values.size());
      for (double& v : p.target) v = round_f32(0.3 * rng.normal());
      p.score = round_f32(rng.normal());
      p.weight = round_f32(1.0 + rng.uniform());
      ds.pairs.push_back(std::move(p));
    }
    const std::string dp = (tmp / "d.dnkdset").string();
    save_dataset(ds, dp);
    const DistillDataset back = load_dataset(dp);
    require(back.pairs.size() == ds.pairs.size() && back.config_hash == ds.config_hash,
            "dataset header changed");
    for (size_t i = 0; i < ds.pairs.size(); ++i) {
      require(back.pairs[i].prior.values == ds.pairs[i].prior.values,
              "pair " + std::to_string(i) + ": prior values changed across save/load");
      require(back.pairs[i].target == ds.pairs[i].target,
              "pair " + std::to_string(i) + ": target changed across save/load");
      require(back.pairs[i].weight == ds.pairs[i].weight,
              "pair " + std::to_string(i) + ": weight changed across save/load");
    }
  });

  check("statistic conventions", [&] {
    const std::vector<double> w = quantile_weights({10.0, 20.0, 30.0}, 1.0);
    require(w == std::vector<double>{1.0, 1.5, 2.0}, "quantile weights convention broken");
    std::vector<double> lat(100);
    for (int i = 0; i < 100; ++i) lat[size_t(i)] = double(100 - i);
    require(latency_stats(lat).p95 == 95.0, "nearest-rank P95 convention broken");
    const EpisodeStats st = episode_stats({{1.0, 1.0}, {0.5, 0.7}});
    require(std::abs(st.mean - 0.8) < 1e-15 && std::abs(st.worst_case - 0.6) < 1e-15 &&
                std::abs(st.sigma_ep - 0.05) < 1e-15,
            "episode statistic conventions broken");
  });

  std::error_code ec;
  std::filesystem::remove_all(tmp, ec);

  if (fails == 0)
    std::printf("selftest: all checks passed\n");
  else
    std::printf("selftest: %d check(s) FAILED\n", fails);
  return fails;
}

}  // namespace dnk
