#pragma once
// Minimal dense network: ReLU hidden layers, logistic output, binary
// cross-entropy loss, Adam updates. Built directly on std::vector so the
// whole parameter state is trivially serializable.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgetwin/rng.hpp"

namespace edgetwin {

struct MlpParams {
  std::vector<int> layer_sizes;               // [input, hidden..., output]
  std::vector<std::vector<double>> weights;   // per layer, row-major out x in
  std::vector<std::vector<double>> biases;    // per layer
};

inline int num_layers(const MlpParams& p) {
  return static_cast<int>(p.layer_sizes.size()) - 1;
}

/// Fresh parameters with zero-mean normal entries scaled by sqrt(2/fan_in).
inline MlpParams make_mlp(std::vector<int> layer_sizes, std::mt19937_64& rng) {
  if (layer_sizes.size() < 2) {
    throw std::invalid_argument("make_mlp: need at least input and output layers");
  }
  MlpParams p;
  p.layer_sizes = std::move(layer_sizes);
  for (size_t l = 0; l + 1 < p.layer_sizes.size(); ++l) {
    const int in = p.layer_sizes[l];
    const int out = p.layer_sizes[l + 1];
    const double std_dev = std::sqrt(2.0 / in);
    std::vector<double> w(static_cast<size_t>(in) * out);
    std::vector<double> b(static_cast<size_t>(out));
    for (auto& v : w) v = rng_normal(rng, 0.0, std_dev);
    for (auto& v : b) v = rng_normal(rng, 0.0, std_dev);
    p.weights.push_back(std::move(w));
    p.biases.push_back(std::move(b));
  }
  return p;
}

inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

namespace detail {

/// Runs the network and optionally records every layer's activations
/// (index 0 = input, index L = output).
inline std::vector<double> forward_impl(const MlpParams& p, std::span<const double> x,
                                        std::vector<std::vector<double>>* trace) {
  if (static_cast<int>(x.size()) != p.layer_sizes.front()) {
    throw std::invalid_argument("forward: input size mismatch");
  }
  std::vector<double> act(x.begin(), x.end());
  if (trace) trace->push_back(act);
  const int layers = num_layers(p);
  for (int l = 0; l < layers; ++l) {
    const int in = p.layer_sizes[l];
    const int out = p.layer_sizes[l + 1];
    std::vector<double> next(static_cast<size_t>(out));
    const double* w = p.weights[l].data();
    for (int o = 0; o < out; ++o) {
      double z = p.biases[l][o];
      const double* row = w + static_cast<size_t>(o) * in;
      for (int i = 0; i < in; ++i) z += row[i] * act[i];
      next[o] = (l + 1 == layers) ? logistic(z) : std::max(0.0, z);
    }
    act = std::move(next);
    if (trace) trace->push_back(act);
  }
  return act;
}

}  // namespace detail

inline std::vector<double> forward(const MlpParams& p, std::span<const double> x) {
  return detail::forward_impl(p, x, nullptr);
}

/// Mean binary cross-entropy over a batch, with outputs clamped to
/// [1e-12, 1-1e-12] so binary targets stay finite.
inline double bce_loss(const std::vector<std::vector<double>>& outputs,
                       const std::vector<std::vector<double>>& targets) {
  if (outputs.size() != targets.size() || outputs.empty()) {
    throw std::invalid_argument("bce_loss: batch shape mismatch");
  }
  double total = 0.0;
  for (size_t n = 0; n < outputs.size(); ++n) {
    if (outputs[n].size() != targets[n].size()) {
      throw std::invalid_argument("bce_loss: sample shape mismatch");
    }
    for (size_t i = 0; i < outputs[n].size(); ++i) {
      const double y = std::clamp(outputs[n][i], 1e-12, 1.0 - 1e-12);
      total -= targets[n][i] * std::log(y) + (1.0 - targets[n][i]) * std::log(1.0 - y);
    }
  }
  return total / static_cast<double>(outputs.size());
}

struct MlpGradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
};

inline MlpGradients zero_gradients(const MlpParams& p) {
  MlpGradients g;
  for (size_t l = 0; l < p.weights.size(); ++l) {
    g.weights.emplace_back(p.weights[l].size(), 0.0);
    g.biases.emplace_back(p.biases[l].size(), 0.0);
  }
  return g;
}

struct BackwardResult {
  double loss = 0.0;
  MlpGradients grads;
};

/// Exact gradients of the mean batch BCE with respect to every parameter.
/// The logistic output pairs with the cross-entropy so the output-layer
/// delta is simply (prediction - target) / batch.
inline BackwardResult backward(const MlpParams& p,
                               const std::vector<std::vector<double>>& inputs,
                               const std::vector<std::vector<double>>& targets) {
  if (inputs.size() != targets.size() || inputs.empty()) {
    throw std::invalid_argument("backward: batch shape mismatch");
  }
  BackwardResult res;
  res.grads = zero_gradients(p);
  const int layers = num_layers(p);
  const double inv_batch = 1.0 / static_cast<double>(inputs.size());
  std::vector<std::vector<double>> outputs;
  outputs.reserve(inputs.size());
  for (size_t n = 0; n < inputs.size(); ++n) {
    std::vector<std::vector<double>> act;
    act.reserve(layers + 1);
    outputs.push_back(detail::forward_impl(p, inputs[n], &act));
    const auto& y = outputs.back();
    const auto& t = targets[n];
    if (t.size() != y.size()) throw std::invalid_argument("backward: target size mismatch");

    // delta holds dL/dz of the current layer, walking backwards. For the
    // logistic/BCE pair the output delta collapses to (prediction - target).
    std::vector<double> delta(y.size());
    for (size_t i = 0; i < y.size(); ++i) {
      delta[i] = (y[i] - t[i]) * inv_batch;
    }
    for (int l = layers - 1; l >= 0; --l) {
      const int in = p.layer_sizes[l];
      const int out = p.layer_sizes[l + 1];
      const auto& below = act[static_cast<size_t>(l)];
      auto& gw = res.grads.weights[l];
      auto& gb = res.grads.biases[l];
      for (int o = 0; o < out; ++o) {
        gb[o] += delta[o];
        double* grow = gw.data() + static_cast<size_t>(o) * in;
        for (int i = 0; i < in; ++i) grow[i] += delta[o] * below[i];
      }
      if (l == 0) break;
      std::vector<double> prev(static_cast<size_t>(in), 0.0);
      const double* w = p.weights[l].data();
      for (int o = 0; o < out; ++o) {
        const double* row = w + static_cast<size_t>(o) * in;
        for (int i = 0; i < in; ++i) prev[i] += row[i] * delta[o];
      }
      for (int i = 0; i < in; ++i) {
        if (act[static_cast<size_t>(l)][i] <= 0.0) prev[i] = 0.0;  // ReLU gate
      }
      delta = std::move(prev);
    }
  }
  res.loss = bce_loss(outputs, targets);
  return res;
}

struct AdamState {
  std::vector<std::vector<double>> m_w, v_w, m_b, v_b;
  std::int64_t step = 0;
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

inline AdamState make_adam(const MlpParams& p, double lr = 0.001) {
  AdamState s;
  s.lr = lr;
  for (size_t l = 0; l < p.weights.size(); ++l) {
    s.m_w.emplace_back(p.weights[l].size(), 0.0);
    s.v_w.emplace_back(p.weights[l].size(), 0.0);
    s.m_b.emplace_back(p.biases[l].size(), 0.0);
    s.v_b.emplace_back(p.biases[l].size(), 0.0);
  }
  return s;
}

inline void adam_step(MlpParams& p, AdamState& s, const MlpGradients& g) {
  ++s.step;
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  auto update = [&](std::vector<double>& theta, std::vector<double>& m,
                    std::vector<double>& v, const std::vector<double>& grad) {
    for (size_t i = 0; i < theta.size(); ++i) {
      m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * grad[i];
      v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * grad[i] * grad[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      theta[i] -= s.lr * mhat / (std::sqrt(vhat) + s.eps);
    }
  };
  for (size_t l = 0; l < p.weights.size(); ++l) {
    update(p.weights[l], s.m_w[l], s.v_w[l], g.weights[l]);
    update(p.biases[l], s.m_b[l], s.v_b[l], g.biases[l]);
  }
}

// ---------------------------------------------------------------------------
// Checkpointing: binary, versioned, bit-exact round trip.

struct Checkpoint {
  MlpParams params;
  AdamState adam;
  std::int64_t epoch = 0;
};

namespace detail {

inline void write_doubles(std::ofstream& os, const std::vector<double>& v) {
  const std::uint64_t n = v.size();
  os.write(reinterpret_cast<const char*>(&n), sizeof(n));
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(n * sizeof(double)));
}

inline std::vector<double> read_doubles(std::ifstream& is) {
  std::uint64_t n = 0;
  is.read(reinterpret_cast<char*>(&n), sizeof(n));
  std::vector<double> v(n);
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  return v;
}

}  // namespace detail

inline void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path);
  const char magic[8] = {'E', 'T', 'W', 'N', 'C', 'K', '0', '1'};
  os.write(magic, 8);
  const std::uint64_t nl = ck.params.layer_sizes.size();
  os.write(reinterpret_cast<const char*>(&nl), sizeof(nl));
  for (int s : ck.params.layer_sizes) {
    const std::int64_t v = s;
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
  }
  for (size_t l = 0; l + 1 < ck.params.layer_sizes.size(); ++l) {
    detail::write_doubles(os, ck.params.weights[l]);
    detail::write_doubles(os, ck.params.biases[l]);
    detail::write_doubles(os, ck.adam.m_w[l]);
    detail::write_doubles(os, ck.adam.v_w[l]);
    detail::write_doubles(os, ck.adam.m_b[l]);
    detail::write_doubles(os, ck.adam.v_b[l]);
  }
  os.write(reinterpret_cast<const char*>(&ck.adam.step), sizeof(ck.adam.step));
  os.write(reinterpret_cast<const char*>(&ck.adam.lr), sizeof(ck.adam.lr));
  os.write(reinterpret_cast<const char*>(&ck.adam.beta1), sizeof(ck.adam.beta1));
  os.write(reinterpret_cast<const char*>(&ck.adam.beta2), sizeof(ck.adam.beta2));
  os.write(reinterpret_cast<const char*>(&ck.adam.eps), sizeof(ck.adam.eps));
  os.write(reinterpret_cast<const char*>(&ck.epoch), sizeof(ck.epoch));
  if (!os) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::string(magic, 8) != "ETWNCK01") {
    throw std::runtime_error("load_checkpoint: bad magic in " + path);
  }
  Checkpoint ck;
  std::uint64_t nl = 0;
  is.read(reinterpret_cast<char*>(&nl), sizeof(nl));
  for (std::uint64_t i = 0; i < nl; ++i) {
    std::int64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    ck.params.layer_sizes.push_back(static_cast<int>(v));
  }
  for (std::uint64_t l = 0; l + 1 < nl; ++l) {
    ck.params.weights.push_back(detail::read_doubles(is));
    ck.params.biases.push_back(detail::read_doubles(is));
    ck.adam.m_w.push_back(detail::read_doubles(is));
    ck.adam.v_w.push_back(detail::read_doubles(is));
    ck.adam.m_b.push_back(detail::read_doubles(is));
    ck.adam.v_b.push_back(detail::read_doubles(is));
  }
  is.read(reinterpret_cast<char*>(&ck.adam.step), sizeof(ck.adam.step));
  is.read(reinterpret_cast<char*>(&ck.adam.lr), sizeof(ck.adam.lr));
  is.read(reinterpret_cast<char*>(&ck.adam.beta1), sizeof(ck.adam.beta1));
  is.read(reinterpret_cast<char*>(&ck.adam.beta2), sizeof(ck.adam.beta2));
  is.read(reinterpret_cast<char*>(&ck.adam.eps), sizeof(ck.adam.eps));
  is.read(reinterpret_cast<char*>(&ck.epoch), sizeof(ck.epoch));
  if (!is) throw std::runtime_error("load_checkpoint: truncated file " + path);
  return ck;
}

}  // namespace edgetwin
