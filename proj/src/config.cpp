#include "dnk/config.hpp"

#include <climits>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace dnk {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_dlist(const std::vector<double>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt_double(v[i]);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& s) {
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw DnkError("config: value for '" + key + "' is not a number: " + s);
  }
  require(used == s.size(), "config: value for '" + key + "' is not a number: " + s);
  require(std::isfinite(v), "config: value for '" + key + "' must be finite");
  return v;
}

long long parse_int(const std::string& key, const std::string& s) {
  size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw DnkError("config: value for '" + key + "' is not an integer: " + s);
  }
  require(used == s.size(), "config: value for '" + key + "' is not an integer: " + s);
  return v;
}

uint64_t parse_u64(const std::string& key, const std::string& s) {
  size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    throw DnkError("config: value for '" + key + "' is not an unsigned integer: " + s);
  }
  require(used == s.size(), "config: value for '" + key + "' is not an unsigned integer: " + s);
  return v;
}

std::vector<double> parse_dlist(const std::string& key, const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(parse_double(key, cell));
  require(!out.empty(), "config: value for '" + key + "' is an empty list");
  return out;
}

struct Field {
  const char* name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

Field f_u64(const char* name, uint64_t RunConfig::*p) {
  return {name, [name, p](RunConfig& c, const std::string& s) { c.*p = parse_u64(name, s); },
          [p](const RunConfig& c) { return std::to_string(c.*p); }};
}
Field f_int(const char* name, int RunConfig::*p) {
  return {name,
          [name, p](RunConfig& c, const std::string& s) {
            const long long v = parse_int(name, s);
            require(v >= INT_MIN && v <= INT_MAX, std::string("config: '") + name +
                                                      "' out of integer range");
            c.*p = static_cast<int>(v);
          },
          [p](const RunConfig& c) { return std::to_string(c.*p); }};
}
Field f_dbl(const char* name, double RunConfig::*p) {
  return {name, [name, p](RunConfig& c, const std::string& s) { c.*p = parse_double(name, s); },
          [p](const RunConfig& c) { return fmt_double(c.*p); }};
}
Field f_str(const char* name, std::string RunConfig::*p) {
  return {name, [p](RunConfig& c, const std::string& s) { c.*p = s; },
          [p](const RunConfig& c) { return c.*p; }};
}
Field f_dlist(const char* name, std::vector<double> RunConfig::*p) {
  return {name, [name, p](RunConfig& c, const std::string& s) { c.*p = parse_dlist(name, s); },
          [p](const RunConfig& c) { return fmt_dlist(c.*p); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      f_u64("seed", &RunConfig::seed),
      f_int("threads", &RunConfig::threads),
      f_int("n_steps", &RunConfig::n_steps),
      f_dbl("beta_min", &RunConfig::beta_min),
      f_dbl("beta_max", &RunConfig::beta_max),
      f_int("horizon", &RunConfig::horizon),
      f_int("latent", &RunConfig::latent),
      f_int("teacher_hidden", &RunConfig::teacher_hidden),
      f_int("scorer_hidden", &RunConfig::scorer_hidden),
      f_int("n_demos", &RunConfig::n_demos),
      f_int("teacher_epochs", &RunConfig::teacher_epochs),
      f_int("teacher_batch", &RunConfig::teacher_batch),
      f_dbl("teacher_lr", &RunConfig::teacher_lr),
      f_int("teacher_phases", &RunConfig::teacher_phases),
      f_int("scorer_data", &RunConfig::scorer_data),
      f_int("scorer_epochs", &RunConfig::scorer_epochs),
      f_int("scorer_batch", &RunConfig::scorer_batch),
      f_dbl("scorer_lr", &RunConfig::scorer_lr),
      f_dbl("scorer_holdout", &RunConfig::scorer_holdout),
      f_int("m_pairs", &RunConfig::m_pairs),
      f_str("scene_family", &RunConfig::scene_family),
      f_dlist("temps", &RunConfig::temps),
      f_dlist("probs", &RunConfig::probs),
      f_dbl("weight_beta", &RunConfig::weight_beta),
      f_str("variant", &RunConfig::variant),
      f_int("student_epochs", &RunConfig::student_epochs),
      f_int("student_batch", &RunConfig::student_batch),
      f_dbl("student_lr", &RunConfig::student_lr),
      f_dbl("a_pred", &RunConfig::a_pred),
      f_dbl("a_rec", &RunConfig::a_rec),
      f_dbl("a_lat", &RunConfig::a_lat),
      f_dbl("a_act", &RunConfig::a_act),
      f_dbl("a_spec", &RunConfig::a_spec),
      f_dbl("a_inv", &RunConfig::a_inv),
      f_dbl("act_w1", &RunConfig::act_w1),
      f_dbl("act_wtail", &RunConfig::act_wtail),
      f_int("n_cand", &RunConfig::n_cand),
      f_dbl("lambda_infer", &RunConfig::lambda_infer),
      f_dbl("r_goal", &RunConfig::r_goal),
      f_dbl("t_ctrl_ms", &RunConfig::t_ctrl_ms),
      f_int("max_steps", &RunConfig::max_steps),
      f_int("eval_scenes", &RunConfig::eval_scenes),
      f_int("eval_seeds", &RunConfig::eval_seeds),
      f_str("selector", &RunConfig::selector),
      f_dbl("score_kc", &RunConfig::score_kc),
      f_dbl("score_ku", &RunConfig::score_ku),
      f_dbl("score_kg", &RunConfig::score_kg),
      f_dbl("score_csat", &RunConfig::score_csat),
      f_dbl("env_dt", &RunConfig::env_dt),
      f_dbl("env_damping", &RunConfig::env_damping),
      f_dbl("env_amax", &RunConfig::env_amax),
      f_dbl("env_vmax", &RunConfig::env_vmax),
      f_dbl("env_ws", &RunConfig::env_ws),
      f_int("bench_decisions", &RunConfig::bench_decisions),
      f_str("demos_path", &RunConfig::demos_path),
      f_str("teacher_path", &RunConfig::teacher_path),
      f_str("scorer_path", &RunConfig::scorer_path),
      f_str("dataset_path", &RunConfig::dataset_path),
      f_str("student_path", &RunConfig::student_path),
      f_str("out_prefix", &RunConfig::out_prefix),
  };
  return table;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

void assign(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const Field& f : fields()) {
    if (key == f.name) {
      f.set(cfg, value);
      return;
    }
  }
  throw DnkError("config: unknown key '" + key + "'");
}

}  // namespace

void validate_config(const RunConfig& cfg) {
  require(cfg.threads >= 1, "config: 'threads' must be >= 1");
  require(cfg.n_steps >= 1, "config: 'n_steps' must be >= 1");
  require(cfg.beta_min > 0.0 && cfg.beta_max < 1.0 && cfg.beta_min <= cfg.beta_max,
          "config: schedule needs 0 < beta_min <= beta_max < 1");
  require(cfg.horizon >= 2, "config: 'horizon' must be >= 2");
  require(cfg.latent >= 1, "config: 'latent' must be >= 1");
  require(cfg.teacher_hidden >= 1 && cfg.scorer_hidden >= 1,
          "config: hidden widths must be >= 1");
  require(cfg.n_demos >= 2, "config: 'n_demos' must be >= 2");
  require(cfg.teacher_epochs >= 0 && cfg.scorer_epochs >= 0 && cfg.student_epochs >= 0,
          "config: epoch counts must be >= 0");
  require(cfg.teacher_batch >= 1 && cfg.scorer_batch >= 1 && cfg.student_batch >= 1,
          "config: batch sizes must be >= 1");
  require(cfg.teacher_lr > 0.0 && cfg.scorer_lr > 0.0 && cfg.student_lr > 0.0,
          "config: learning rates must be positive");
  require(cfg.teacher_phases >= 1, "config: 'teacher_phases' must be >= 1");
  require(cfg.scorer_data >= 10, "config: 'scorer_data' must be >= 10");
  require(cfg.scorer_holdout > 0.0 && cfg.scorer_holdout < 1.0,
          "config: 'scorer_holdout' must be in (0, 1)");
  require(cfg.m_pairs >= 1, "config: 'm_pairs' must be >= 1");
  require(cfg.scene_family == "standard" || cfg.scene_family == "bimodal",
          "config: 'scene_family' must be standard or bimodal");
  require(cfg.temps.size() == cfg.probs.size(),
          "config: 'temps' and 'probs' must have equal length");
  double psum = 0.0;
  for (double t : cfg.temps) require(t > 0.0, "config: 'temps' entries must be positive");
  for (double p : cfg.probs) {
    require(p >= 0.0, "config: 'probs' entries must be >= 0");
    psum += p;
  }
  require(std::abs(psum - 1.0) <= 1e-9, "config: 'probs' must sum to 1");
  require(cfg.weight_beta >= 0.0, "config: 'weight_beta' must be >= 0");
  require(cfg.variant == "fdk" || cfg.variant == "kdm",
          "config: 'variant' must be fdk or kdm");
  require(cfg.a_pred >= 0.0 && cfg.a_rec >= 0.0 && cfg.a_lat >= 0.0 && cfg.a_act >= 0.0 &&
              cfg.a_spec >= 0.0 && cfg.a_inv >= 0.0,
          "config: loss weights must be >= 0");
  require(cfg.act_w1 > 0.0 && cfg.act_wtail > 0.0, "config: action weights must be positive");
  require(cfg.n_cand >= 1, "config: 'n_cand' must be >= 1");
  require(cfg.lambda_infer > 0.0, "config: 'lambda_infer' must be positive");
  require(cfg.r_goal > 0.0, "config: 'r_goal' must be positive");
  require(cfg.t_ctrl_ms > 0.0, "config: 't_ctrl_ms' must be positive");
  require(cfg.max_steps >= 1, "config: 'max_steps' must be >= 1");
  require(cfg.eval_scenes >= 1, "config: 'eval_scenes' must be >= 1");
  require(cfg.eval_seeds >= 1, "config: 'eval_seeds' must be >= 1");
  require(cfg.selector == "geometry" || cfg.selector == "learned-scorer",
          "config: 'selector' must be geometry or learned-scorer");
  require(cfg.score_kc >= 0.0 && cfg.score_ku >= 0.0 && cfg.score_kg >= 0.0 &&
              cfg.score_csat > 0.0,
          "config: selector coefficients out of range");
  require(cfg.env_dt > 0.0 && cfg.env_damping >= 0.0 && cfg.env_amax > 0.0 &&
              cfg.env_vmax > 0.0 && cfg.env_ws > 0.0,
          "config: environment parameters out of range");
  require(cfg.bench_decisions >= 1, "config: 'bench_decisions' must be >= 1");
  for (const auto* path :
       {&cfg.demos_path, &cfg.teacher_path, &cfg.scorer_path, &cfg.dataset_path,
        &cfg.student_path, &cfg.out_prefix})
    require(!path->empty(), "config: artifact paths must be nonempty");
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    require(eq != std::string::npos,
            "config: line " + std::to_string(lineno) + " is not key=value: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    require(!key.empty(), "config: line " + std::to_string(lineno) + " has an empty key");
    require(seen.insert(key).second, "config: duplicate key '" + key + "'");
    assign(cfg, key, value);
  }
  validate_config(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "config: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const size_t eq = assignment.find('=');
  require(eq != std::string::npos, "config: override is not key=value: " + assignment);
  assign(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  for (const Field& f : fields()) {
    out += f.name;
    out += '=';
    out += f.get(cfg);
    out += '\n';
  }
  return out;
}

uint64_t fnv1a64(const std::string& bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t config_hash(const RunConfig& cfg) { return fnv1a64(serialize_config(cfg)); }

}  // namespace dnk
