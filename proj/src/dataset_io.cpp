#include "dnk/dataset_io.hpp"

#include <cstdio>
#include <cstring>

namespace dnk {

namespace {

constexpr char kMagic[8] = {'D', 'N', 'K', 'D', 'E', 'M', 'O', '1'};

struct FileCloser {
  std::FILE* f;
  ~FileCloser() {
    if (f) std::fclose(f);
  }
};

void write_f32(std::FILE* f, const std::vector<double>& v) {
  for (double x : v) {
    const float y = static_cast<float>(x);
    require(std::fwrite(&y, sizeof(float), 1, f) == 1, "demo write failed");
  }
}

std::vector<double> read_f32(std::FILE* f, int n, const char* what) {
  std::vector<double> v(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    float y = 0.0f;
    if (std::fread(&y, sizeof(float), 1, f) != 1)
      throw DnkError(std::string("demo file truncated while reading ") + what);
    v[size_t(i)] = static_cast<double>(y);
  }
  return v;
}

}  // namespace

void save_demos(const DemoSet& demos, const std::string& path, uint64_t config_hash,
                uint64_t seed) {
  require(!demos.traj.empty() && demos.traj.size() == demos.ctx.size(),
          "save_demos: empty or inconsistent demo set");
  const int flat = demos.H * kStepDim;
  std::FILE* f = std::fopen(path.c_str(), "wb");
  require(f != nullptr, "save_demos: cannot open " + path);
  FileCloser closer{f};
  require(std::fwrite(kMagic, 1, 8, f) == 8, "demo write failed");
  char header[192];
  std::snprintf(header, sizeof header, "version=1 M=%zu H=%d ctx=%d config=%016llx seed=%llu\n",
                demos.traj.size(), demos.H, kCtxDim,
                static_cast<unsigned long long>(config_hash),
                static_cast<unsigned long long>(seed));
  require(std::fwrite(header, 1, std::strlen(header), f) == std::strlen(header),
          "demo write failed");
  for (size_t i = 0; i < demos.traj.size(); ++i) {
    require(static_cast<int>(demos.traj[i].size()) == flat &&
                static_cast<int>(demos.ctx[i].size()) == kCtxDim,
            "save_demos: record shape mismatch");
    write_f32(f, demos.traj[i]);
    write_f32(f, demos.ctx[i]);
  }
}

DemoSet load_demos(const std::string& path, uint64_t* config_hash, uint64_t* seed) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  require(f != nullptr, "load_demos: cannot open " + path);
  FileCloser closer{f};

  char magic[8];
  if (std::fread(magic, 1, 8, f) != 8 || std::memcmp(magic, kMagic, 8) != 0)
    throw DnkError("load_demos: bad magic, not a demo file: " + path);

  std::string header;
  for (;;) {
    const int c = std::fgetc(f);
    if (c == EOF) throw DnkError("load_demos: truncated header in " + path);
    if (c == '\n') break;
    header.push_back(static_cast<char>(c));
    if (header.size() > 1024) throw DnkError("load_demos: oversized header in " + path);
  }
  int version = 0, ctx_dim = 0;
  size_t M = 0;
  DemoSet demos;
  unsigned long long cfg = 0, sd = 0;
  if (std::sscanf(header.c_str(), "version=%d M=%zu H=%d ctx=%d config=%llx seed=%llu", &version,
                  &M, &demos.H, &ctx_dim, &cfg, &sd) != 6)
    throw DnkError("load_demos: malformed header: " + header);
  if (version != 1) throw DnkError("load_demos: unsupported version " + std::to_string(version));
  if (ctx_dim != kCtxDim || demos.H < 1 || M < 1)
    throw DnkError("load_demos: header dimensions incompatible with this build: " + header);
  if (config_hash) *config_hash = cfg;
  if (seed) *seed = sd;

  const int flat = demos.H * kStepDim;
  demos.traj.resize(M);
  demos.ctx.resize(M);
  for (size_t i = 0; i < M; ++i) {
    demos.traj[i] = read_f32(f, flat, "trajectory");
    demos.ctx[i] = read_f32(f, kCtxDim, "context");
  }
  if (std::fgetc(f) != EOF) throw DnkError("load_demos: trailing bytes after declared records");
  return demos;
}

}  // namespace dnk
