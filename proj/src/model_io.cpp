#include "dnk/model_io.hpp"

#include <cstdio>
#include <cstring>

namespace dnk {

namespace {

constexpr char kMagic[8] = {'D', 'N', 'K', 'M', 'O', 'D', 'L', '1'};

struct FileCloser {
  std::FILE* f;
  ~FileCloser() {
    if (f) std::fclose(f);
  }
};

void check_hash(const ModelMeta& meta, uint64_t expected, const std::string& path) {
  if (expected != 0 && meta.config_hash != expected) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "model %s was produced under config %016llx but this run uses %016llx",
                  path.c_str(), static_cast<unsigned long long>(meta.config_hash),
                  static_cast<unsigned long long>(expected));
    throw DnkError(buf);
  }
}

}  // namespace

void save_model_file(const std::string& path, const ModelMeta& meta,
                     const std::vector<double>& theta) {
  require(!meta.kind.empty() && meta.kind.find(' ') == std::string::npos,
          "save_model_file: bad kind");
  require(!theta.empty(), "save_model_file: empty parameter vector");
  require(all_finite(theta), "save_model_file: non-finite parameters");
  std::FILE* f = std::fopen(path.c_str(), "wb");
  require(f != nullptr, "save_model_file: cannot open " + path);
  FileCloser closer{f};
  require(std::fwrite(kMagic, 1, 8, f) == 8, "model write failed");
  char header[256];
  std::snprintf(header, sizeof header,
                "kind=%s H=%d hidden=%d latent=%d params=%zu config=%016llx seed=%llu\n",
                meta.kind.c_str(), meta.H, meta.hidden, meta.latent, theta.size(),
                static_cast<unsigned long long>(meta.config_hash),
                static_cast<unsigned long long>(meta.seed));
  require(std::fwrite(header, 1, std::strlen(header), f) == std::strlen(header),
          "model write failed");
  require(std::fwrite(theta.data(), sizeof(double), theta.size(), f) == theta.size(),
          "model write failed");
}

ModelMeta load_model_file(const std::string& path, std::vector<double>& theta) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  require(f != nullptr, "load_model_file: cannot open " + path);
  FileCloser closer{f};

  char magic[8];
  if (std::fread(magic, 1, 8, f) != 8 || std::memcmp(magic, kMagic, 8) != 0)
    throw DnkError("load_model_file: bad magic, not a model file: " + path);

  std::string header;
  for (;;) {
    const int c = std::fgetc(f);
    if (c == EOF) throw DnkError("load_model_file: truncated header in " + path);
    if (c == '\n') break;
    header.push_back(static_cast<char>(c));
    if (header.size() > 2048) throw DnkError("load_model_file: oversized header in " + path);
  }
  ModelMeta meta;
  char kind[64];
  size_t params = 0;
  unsigned long long cfg = 0, sd = 0;
  if (std::sscanf(header.c_str(), "kind=%63s H=%d hidden=%d latent=%d params=%zu config=%llx seed=%llu",
                  kind, &meta.H, &meta.hidden, &meta.latent, &params, &cfg, &sd) != 7)
    throw DnkError("load_model_file: malformed header: " + header);
  meta.kind = kind;
  meta.config_hash = cfg;
  meta.seed = sd;
  require(params >= 1, "load_model_file: header declares no parameters");

  theta.assign(params, 0.0);
  if (std::fread(theta.data(), sizeof(double), params, f) != params)
    throw DnkError("load_model_file: truncated parameter block in " + path);
  if (std::fgetc(f) != EOF)
    throw DnkError("load_model_file: trailing bytes after parameter block in " + path);
  require(all_finite(theta), "load_model_file: non-finite parameters in " + path);
  return meta;
}

void save_teacher_model(const std::string& path, const Teacher& t, uint64_t config_hash,
                        uint64_t seed) {
  ModelMeta meta;
  meta.kind = "teacher";
  meta.H = t.H;
  meta.hidden = t.spec.dims.at(1);
  meta.config_hash = config_hash;
  meta.seed = seed;
  save_model_file(path, meta, t.theta);
}

Teacher load_teacher_model(const std::string& path, uint64_t expected_config) {
  std::vector<double> theta;
  const ModelMeta meta = load_model_file(path, theta);
  require(meta.kind == "teacher",
          "load_teacher_model: " + path + " holds a '" + meta.kind + "' model");
  check_hash(meta, expected_config, path);
  Teacher t = make_teacher(meta.H, meta.hidden, 0);
  require(t.theta.size() == theta.size(),
          "load_teacher_model: parameter count does not match the declared architecture");
  t.theta = std::move(theta);
  return t;
}

void save_scorer_model(const std::string& path, const Scorer& s, uint64_t config_hash,
                       uint64_t seed) {
  ModelMeta meta;
  meta.kind = "scorer";
  meta.H = s.H;
  meta.hidden = s.spec.dims.at(1);
  meta.config_hash = config_hash;
  meta.seed = seed;
  save_model_file(path, meta, s.theta);
}

Scorer load_scorer_model(const std::string& path, uint64_t expected_config) {
  std::vector<double> theta;
  const ModelMeta meta = load_model_file(path, theta);
  require(meta.kind == "scorer",
          "load_scorer_model: " + path + " holds a '" + meta.kind + "' model");
  check_hash(meta, expected_config, path);
  Scorer s = make_scorer(meta.H, meta.hidden, 0);
  require(s.theta.size() == theta.size(),
          "load_scorer_model: parameter count does not match the declared architecture");
  s.theta = std::move(theta);
  return s;
}

void save_student_model(const std::string& path, const StudentModel& m, uint64_t config_hash,
                        uint64_t seed) {
  ModelMeta meta;
  meta.kind = (m.variant == Variant::Fdk) ? "student-fdk" : "student-kdm";
  meta.H = m.H;
  meta.latent = m.latent;
  meta.config_hash = config_hash;
  meta.seed = seed;
  save_model_file(path, meta, m.theta);
}

StudentModel load_student_model(const std::string& path, uint64_t expected_config) {
  std::vector<double> theta;
  const ModelMeta meta = load_model_file(path, theta);
  Variant variant;
  if (meta.kind == "student-fdk")
    variant = Variant::Fdk;
  else if (meta.kind == "student-kdm")
    variant = Variant::Kdm;
  else
    throw DnkError("load_student_model: " + path + " holds a '" + meta.kind + "' model");
  check_hash(meta, expected_config, path);
  StudentModel m = make_student(meta.H, meta.latent, variant, 0);
  require(m.theta.size() == theta.size(),
          "load_student_model: parameter count does not match the declared architecture");
  m.theta = std::move(theta);
  return m;
}

}  // namespace dnk
