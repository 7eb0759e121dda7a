// Copyright 2026 The softsurf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SOFTSURF_NN_HPP_
#define SOFTSURF_NN_HPP_

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "softsurf/errors.hpp"
#include "softsurf/rng.hpp"

namespace softsurf {

// Dense feedforward network, tanh hidden activations, linear output.
// Everything is double precision and hand-backpropagated; gradients are
// verified against finite differences in the tests.
struct Layer {
  int in = 0;
  int out = 0;
  std::vector<double> w;  // row-major [out][in]
  std::vector<double> b;  // [out]
};

struct Mlp {
  std::vector<int> sizes;
  std::vector<Layer> layers;

  static Mlp make(const std::vector<int>& sizes, Rng& rng) {
    Mlp m;
    m.sizes = sizes;
    for (size_t l = 0; l + 1 < sizes.size(); ++l) {
      Layer layer;
      layer.in = sizes[l];
      layer.out = sizes[l + 1];
      layer.w.resize(static_cast<size_t>(layer.in) * layer.out);
      layer.b.assign(layer.out, 0.0);
      double scale = 1.0 / std::sqrt(static_cast<double>(layer.in));
      for (auto& v : layer.w) v = rng.uniform(-scale, scale);
      m.layers.push_back(std::move(layer));
    }
    return m;
  }

  int input_size() const { return sizes.front(); }
  int output_size() const { return sizes.back(); }

  size_t param_count() const {
    size_t n = 0;
    for (const auto& l : layers) n += l.w.size() + l.b.size();
    return n;
  }

  template <typename F>
  void visit_params(F&& f) {
    for (auto& l : layers) {
      for (auto& v : l.w) f(v);
      for (auto& v : l.b) f(v);
    }
  }
};

// Per-layer activations retained for the backward pass. acts[0] is the
// input; acts[l+1] is layer l's output (tanh-squashed on hidden layers).
struct MlpCache {
  std::vector<std::vector<double>> acts;
};

inline std::vector<double> mlp_forward(const Mlp& m,
                                       const std::vector<double>& input,
                                       MlpCache* cache = nullptr) {
  if (static_cast<int>(input.size()) != m.input_size())
    throw SimError("mlp_forward: input size mismatch");
  if (cache) {
    cache->acts.clear();
    cache->acts.push_back(input);
  }
  std::vector<double> x = input;
  for (size_t l = 0; l < m.layers.size(); ++l) {
    const Layer& layer = m.layers[l];
    std::vector<double> y(layer.out);
    for (int o = 0; o < layer.out; ++o) {
      double s = layer.b[o];
      const double* row = layer.w.data() + static_cast<size_t>(o) * layer.in;
      for (int i = 0; i < layer.in; ++i) s += row[i] * x[i];
      y[o] = s;
    }
    bool hidden = l + 1 < m.layers.size();
    if (hidden)
      for (auto& v : y) v = std::tanh(v);
    if (cache) cache->acts.push_back(y);
    x = std::move(y);
  }
  return x;
}

struct MlpGrads {
  std::vector<Layer> layers;  // same shapes as the network, zero-initialized

  static MlpGrads zeros_like(const Mlp& m) {
    MlpGrads g;
    for (const auto& l : m.layers) {
      Layer gl;
      gl.in = l.in;
      gl.out = l.out;
      gl.w.assign(l.w.size(), 0.0);
      gl.b.assign(l.b.size(), 0.0);
      g.layers.push_back(std::move(gl));
    }
    return g;
  }

  template <typename F>
  void visit_params(F&& f) {
    for (auto& l : layers) {
      for (auto& v : l.w) f(v);
      for (auto& v : l.b) f(v);
    }
  }
};

// Backpropagates dL/dy through the cached forward pass, accumulating
// parameter gradients; returns dL/dx.
inline std::vector<double> mlp_backward(const Mlp& m, const MlpCache& cache,
                                        const std::vector<double>& dLdy,
                                        MlpGrads& grads) {
  std::vector<double> delta = dLdy;
  for (int l = static_cast<int>(m.layers.size()) - 1; l >= 0; --l) {
    const Layer& layer = m.layers[l];
    Layer& g = grads.layers[l];
    const std::vector<double>& out = cache.acts[l + 1];
    const std::vector<double>& in = cache.acts[l];

    bool hidden = l + 1 < static_cast<int>(m.layers.size());
    if (hidden)
      for (int o = 0; o < layer.out; ++o)
        delta[o] *= 1.0 - out[o] * out[o];  // d tanh

    std::vector<double> prev(layer.in, 0.0);
    for (int o = 0; o < layer.out; ++o) {
      double d = delta[o];
      g.b[o] += d;
      double* grow = g.w.data() + static_cast<size_t>(o) * layer.in;
      const double* wrow = layer.w.data() + static_cast<size_t>(o) * layer.in;
      for (int i = 0; i < layer.in; ++i) {
        grow[i] += d * in[i];
        prev[i] += d * wrow[i];
      }
    }
    delta = std::move(prev);
  }
  return delta;
}

// Adam over one network's parameters (moments stored flat in visit order).
struct Adam {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long long t = 0;
  std::vector<double> m;
  std::vector<double> v;

  void step(Mlp& params, MlpGrads& grads) {
    if (m.empty()) {
      m.assign(params.param_count(), 0.0);
      v.assign(params.param_count(), 0.0);
    }
    ++t;
    double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    size_t i = 0;
    std::vector<double*> gptr;
    gptr.reserve(params.param_count());
    grads.visit_params([&](double& g) { gptr.push_back(&g); });
    params.visit_params([&](double& p) {
      double g = *gptr[i];
      m[i] = beta1 * m[i] + (1.0 - beta1) * g;
      v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
      double mhat = m[i] / c1;
      double vhat = v[i] / c2;
      p -= lr * mhat / (std::sqrt(vhat) + eps);
      ++i;
    });
  }
};

// Plain vector variant for free parameter blocks (the policy log-std).
struct AdamVec {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long long t = 0;
  std::vector<double> m;
  std::vector<double> v;

  void step(std::vector<double>& params, const std::vector<double>& grads) {
    if (m.empty()) {
      m.assign(params.size(), 0.0);
      v.assign(params.size(), 0.0);
    }
    ++t;
    double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (size_t i = 0; i < params.size(); ++i) {
      double g = grads[i];
      m[i] = beta1 * m[i] + (1.0 - beta1) * g;
      v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
      params[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    }
  }
};

}  // namespace softsurf

#endif  // SOFTSURF_NN_HPP_
