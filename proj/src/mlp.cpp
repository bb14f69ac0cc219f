#include "dnk/mlp.hpp"

#include <cmath>

namespace dnk {
namespace {

inline double act_apply(Act a, double z) {
  if (a == Act::Tanh) return std::tanh(z);
  // smooth-relu = softplus, numerically stable.
  if (z > 30.0) return z;
  if (z < -30.0) return std::exp(z);
  return std::log1p(std::exp(z));
}

// Derivative expressed through the post-activation value h.
inline double act_deriv_from_h(Act a, double h) {
  if (a == Act::Tanh) return 1.0 - h * h;
  return 1.0 - std::exp(-h);  // sigmoid(z) where h = softplus(z) >= 0
}

}  // namespace

size_t MlpSpec::param_count() const {
  size_t n = 0;
  for (int l = 0; l < layers(); ++l) n += size_t(dims[l]) * dims[l + 1] + dims[l + 1];
  return n;
}

size_t MlpSpec::weight_offset(int layer) const {
  size_t n = 0;
  for (int l = 0; l < layer; ++l) n += size_t(dims[l]) * dims[l + 1] + dims[l + 1];
  return n;
}

size_t MlpSpec::bias_offset(int layer) const {
  return weight_offset(layer) + size_t(dims[layer]) * dims[layer + 1];
}

void mlp_forward_batch(const MlpSpec& spec, const double* theta, const Matrix& X, Matrix& Y,
                       MlpCache* cache) {
  require(X.cols == spec.in_dim(), "mlp_forward: input width mismatch");
  int B = X.rows;
  int L = spec.layers();
  if (cache) {
    cache->h.assign(size_t(L) + 1, Matrix());
    cache->h[0] = X;
  }
  Matrix cur = X;
  for (int l = 0; l < L; ++l) {
    int din = spec.dims[l], dout = spec.dims[l + 1];
    Matrix next(B, dout);
    gemm_nn(cur.a.data(), B, din, theta + spec.weight_offset(l), dout, next.a.data(), false);
    const double* b = theta + spec.bias_offset(l);
    bool is_hidden = l < L - 1;
    for (int i = 0; i < B; ++i) {
      double* r = next.row(i);
      for (int j = 0; j < dout; ++j) {
        double z = r[j] + b[j];
        r[j] = is_hidden ? act_apply(spec.hidden, z) : z;
      }
    }
    if (cache) cache->h[l + 1] = next;
    cur = std::move(next);
  }
  require(all_finite(cur.a), "mlp_forward: non-finite output");
  Y = std::move(cur);
}

void mlp_backward_batch(const MlpSpec& spec, const double* theta, const MlpCache& cache,
                        const Matrix& dY, double* gtheta, Matrix* dX) {
  int L = spec.layers();
  require(int(cache.h.size()) == L + 1, "mlp_backward: cache mismatch");
  int B = cache.h[0].rows;
  require(dY.rows == B && dY.cols == spec.out_dim(), "mlp_backward: upstream shape mismatch");

  Matrix g = dY;  // gradient w.r.t. post-activation of current layer
  for (int l = L - 1; l >= 0; --l) {
    int din = spec.dims[l], dout = spec.dims[l + 1];
    if (l < L - 1) {  // fold in activation derivative
      const Matrix& h = cache.h[l + 1];
      for (int i = 0; i < B; ++i) {
        double* gi = g.row(i);
        const double* hi = h.row(i);
        for (int j = 0; j < dout; ++j) gi[j] *= act_deriv_from_h(spec.hidden, hi[j]);
      }
    }
    // dW (din x dout) += h[l]^T @ g ; db += column sums of g
    gemm_tn(cache.h[l].a.data(), B, din, g.a.data(), dout, gtheta + spec.weight_offset(l), true);
    double* gb = gtheta + spec.bias_offset(l);
    for (int i = 0; i < B; ++i) {
      const double* gi = g.row(i);
      for (int j = 0; j < dout; ++j) gb[j] += gi[j];
    }
    if (l > 0 || dX) {
      // d(input of layer) = g @ W^T
      Matrix Wt(dout, din);
      const double* W = theta + spec.weight_offset(l);
      for (int i = 0; i < din; ++i)
        for (int j = 0; j < dout; ++j) Wt.at(j, i) = W[size_t(i) * dout + j];
      Matrix gin(B, din);
      gemm_nn(g.a.data(), B, dout, Wt.a.data(), din, gin.a.data(), false);
      if (l == 0) {
        if (dX) *dX = std::move(gin);
      } else {
        g = std::move(gin);
      }
    }
  }
}

std::vector<double> mlp_forward(const MlpSpec& spec, const double* theta,
                                const std::vector<double>& x) {
  Matrix X(1, int(x.size()));
  X.a = x;
  Matrix Y;
  mlp_forward_batch(spec, theta, X, Y, nullptr);
  return Y.a;
}

void init_mlp(const MlpSpec& spec, double* theta, Rng& rng) {
  for (int l = 0; l < spec.layers(); ++l) {
    int din = spec.dims[l], dout = spec.dims[l + 1];
    double s = 1.0 / std::sqrt(double(din));
    double* W = theta + spec.weight_offset(l);
    for (size_t i = 0; i < size_t(din) * dout; ++i) W[i] = s * rng.normal();
    double* b = theta + spec.bias_offset(l);
    for (int j = 0; j < dout; ++j) b[j] = 0.0;
  }
}

void zero_final_layer(const MlpSpec& spec, double* theta) {
  int l = spec.layers() - 1;
  size_t nw = size_t(spec.dims[l]) * spec.dims[l + 1];
  double* W = theta + spec.weight_offset(l);
  for (size_t i = 0; i < nw; ++i) W[i] = 0.0;
  double* b = theta + spec.bias_offset(l);
  for (int j = 0; j < spec.dims[l + 1]; ++j) b[j] = 0.0;
}

void set_final_bias(const MlpSpec& spec, double* theta, double value) {
  int l = spec.layers() - 1;
  double* b = theta + spec.bias_offset(l);
  for (int j = 0; j < spec.dims[l + 1]; ++j) b[j] = value;
}

Mlp32 to_f32(const MlpSpec& spec, const double* theta) {
  Mlp32 net;
  net.spec = spec;
  net.theta.resize(spec.param_count());
  for (size_t i = 0; i < net.theta.size(); ++i) net.theta[i] = float(theta[i]);
  return net;
}

void mlp32_forward_batch(const Mlp32& net, const float* X, int B, float* Y) {
  const MlpSpec& spec = net.spec;
  int L = spec.layers();
  std::vector<float> cur(X, X + size_t(B) * spec.in_dim());
  std::vector<float> next;
  for (int l = 0; l < L; ++l) {
    int din = spec.dims[l], dout = spec.dims[l + 1];
    next.assign(size_t(B) * dout, 0.0f);
    gemm_nn(cur.data(), B, din, net.theta.data() + spec.weight_offset(l), dout, next.data(),
            false);
    const float* b = net.theta.data() + spec.bias_offset(l);
    bool is_hidden = l < L - 1;
    for (int i = 0; i < B; ++i) {
      float* r = next.data() + size_t(i) * dout;
      for (int j = 0; j < dout; ++j) {
        float z = r[j] + b[j];
        r[j] = is_hidden ? float(act_apply(spec.hidden, double(z))) : z;
      }
    }
    cur.swap(next);
  }
  std::copy(cur.begin(), cur.end(), Y);
}

}  // namespace dnk
