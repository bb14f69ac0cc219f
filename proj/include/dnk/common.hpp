#pragma once
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dnk {

// Plant/task dimensions. The point-mass plant fixes the per-step layout
// (4 state entries then 2 action entries); horizons stay configurable.
constexpr int kStateDim = 4;
constexpr int kActionDim = 2;
constexpr int kStepDim = kStateDim + kActionDim;
constexpr int kMaxObstacles = 3;
constexpr int kCtxDim = kStateDim + 2 + 3 * kMaxObstacles;
constexpr int kTimeEmbedDim = 8;

struct DnkError : std::runtime_error {
  explicit DnkError(const std::string& msg) : std::runtime_error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw DnkError(msg);
}

inline bool all_finite(const double* v, size_t n) {
  for (size_t i = 0; i < n; ++i)
    if (!std::isfinite(v[i])) return false;
  return true;
}

inline bool all_finite(const std::vector<double>& v) {
  return all_finite(v.data(), v.size());
}

inline double clip(double x, double lo, double hi) {
  return x < lo ? lo : (x > hi ? hi : x);
}

// Rounds to the nearest value representable in 32-bit float. The volatile
// store forces a real narrowing: under the default fast excess-precision
// model, GCC may fold the bare cast pair (double)(float)x back to x.
inline double round_f32(double x) {
  volatile float f = static_cast<float>(x);
  return static_cast<double>(f);
}

}  // namespace dnk
