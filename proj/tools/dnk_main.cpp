#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dnk/pipeline.hpp"

namespace {

dnk::RunConfig resolve_config(const std::string& config_path,
                              const std::vector<std::string>& overrides, int threads) {
  dnk::RunConfig cfg =
      config_path.empty() ? dnk::parse_config("") : dnk::load_config(config_path);
  for (const std::string& kv : overrides) dnk::apply_override(cfg, kv);
  if (threads > 0) cfg.threads = threads;
  dnk::validate_config(cfg);
  return cfg;
}

void print_config(const dnk::RunConfig& cfg) {
  std::printf("resolved configuration (hash %016llx, seed %llu):\n",
              static_cast<unsigned long long>(dnk::config_hash(cfg)),
              static_cast<unsigned long long>(cfg.seed));
  std::stringstream ss(dnk::serialize_config(cfg));
  std::string line;
  while (std::getline(ss, line)) std::printf("  %s\n", line.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"diffusion-teacher to one-step-student distillation pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  int threads = 0;
  app.add_option("-c,--config", config_path, "plain-text key=value configuration file");
  app.add_option("--set", overrides, "override one key=value (repeatable)")->type_size(1);
  app.add_option("--threads", threads, "worker threads for batched sampling");

  auto add = [&](const char* name, const char* desc) {
    CLI::App* sc = app.add_subcommand(name, desc);
    sc->fallthrough();
    return sc;
  };

  CLI::App* sc_demos = add("gen-demos", "sample scenes and plan expert demonstrations");
  CLI::App* sc_teacher = add("train-teacher", "train the denoising trajectory sampler");
  CLI::App* sc_scorer = add("train-scorer", "fit the quality scorer to geometric scores");
  CLI::App* sc_distill = add("distill-data", "sample the offline distillation dataset");
  CLI::App* sc_student = add("train-student", "train the one-step latent-transition student");

  std::string generator = "student", scenes = "standard", label;
  CLI::App* sc_eval = add("evaluate", "closed-loop receding-horizon evaluation");
  sc_eval->add_option("--generator", generator, "student | teacher | expert | null")
      ->check(CLI::IsMember({"student", "teacher", "expert", "null"}));
  sc_eval->add_option("--scenes", scenes, "scene family: standard | bimodal")
      ->check(CLI::IsMember({"standard", "bimodal"}));
  sc_eval->add_option("--label", label, "method name used in output files");

  CLI::App* sc_bench = add("bench-latency", "time per-decision latency of both generators");
  CLI::App* sc_pca = add("pca", "project candidate sets of one bimodal scene to 2D");

  std::vector<std::string> run_files;
  CLI::App* sc_report = add("report", "aggregate evaluation run files into result tables");
  sc_report->add_option("--runs", run_files, "run files written by evaluate (repeatable)")
      ->type_size(1);

  CLI::App* sc_selftest = add("selftest", "fast invariant checks; nonzero exit on failure");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const dnk::RunConfig cfg = resolve_config(config_path, overrides, threads);
    print_config(cfg);

    if (app.got_subcommand(sc_demos)) {
      dnk::run_gen_demos(cfg);
    } else if (app.got_subcommand(sc_teacher)) {
      dnk::run_train_teacher(cfg);
    } else if (app.got_subcommand(sc_scorer)) {
      dnk::run_train_scorer(cfg);
    } else if (app.got_subcommand(sc_distill)) {
      dnk::run_distill_data(cfg);
    } else if (app.got_subcommand(sc_student)) {
      dnk::run_train_student(cfg);
    } else if (app.got_subcommand(sc_eval)) {
      dnk::EvalOptions opts;
      opts.generator = generator;
      opts.bimodal = (scenes == "bimodal");
      opts.label = label;
      dnk::run_evaluate(cfg, opts);
    } else if (app.got_subcommand(sc_bench)) {
      dnk::run_bench_latency(cfg);
    } else if (app.got_subcommand(sc_pca)) {
      dnk::run_pca(cfg);
    } else if (app.got_subcommand(sc_report)) {
      dnk::run_report(cfg, run_files);
    } else if (app.got_subcommand(sc_selftest)) {
      return dnk::run_selftest(cfg) == 0 ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
