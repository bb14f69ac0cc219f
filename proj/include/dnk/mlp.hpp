#pragma once
#include <vector>

#include "dnk/matrix.hpp"
#include "dnk/rng.hpp"

namespace dnk {

enum class Act { Tanh, SmoothRelu };

// Fully-connected net: hidden layers share one activation, output is identity.
// Parameters live in one flat vector; weights are stored input-major
// (dims[l] x dims[l+1]) so a batched forward is a plain row-major product.
struct MlpSpec {
  std::vector<int> dims;
  Act hidden = Act::Tanh;

  int layers() const { return int(dims.size()) - 1; }
  int in_dim() const { return dims.front(); }
  int out_dim() const { return dims.back(); }
  size_t param_count() const;
  size_t weight_offset(int layer) const;
  size_t bias_offset(int layer) const;
};

struct MlpCache {
  // h[0] = input batch; h[l+1] = post-activation output of layer l.
  std::vector<Matrix> h;
};

// Y (B x out) = net(X (B x in)); cache optional (needed for backward).
void mlp_forward_batch(const MlpSpec& spec, const double* theta, const Matrix& X, Matrix& Y,
                       MlpCache* cache);

// Accumulates d(loss)/d(theta) into gtheta given dY = d(loss)/d(output);
// dX (optional) receives d(loss)/d(input), required when nets compose.
void mlp_backward_batch(const MlpSpec& spec, const double* theta, const MlpCache& cache,
                        const Matrix& dY, double* gtheta, Matrix* dX);

std::vector<double> mlp_forward(const MlpSpec& spec, const double* theta,
                                const std::vector<double>& x);

// N(0, 1/fan_in) weights, zero biases.
void init_mlp(const MlpSpec& spec, double* theta, Rng& rng);
void zero_final_layer(const MlpSpec& spec, double* theta);
void set_final_bias(const MlpSpec& spec, double* theta, double value);

// 32-bit forward-only path for the latency benchmark.
struct Mlp32 {
  MlpSpec spec;
  std::vector<float> theta;
};
Mlp32 to_f32(const MlpSpec& spec, const double* theta);
void mlp32_forward_batch(const Mlp32& net, const float* X, int B, float* Y);

}  // namespace dnk
