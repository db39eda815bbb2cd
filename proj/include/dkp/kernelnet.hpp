#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dkp/kernel.hpp"

namespace dkp {

/// Weights (out x in, row-major) and biases of one dense layer. Also used
/// for the matching gradient blocks.
struct DenseLayer {
  int in = 0;
  int out = 0;
  std::vector<double> weights;
  std::vector<double> bias;
  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Kernel generator: fixed noise vector -> (dense, ReLU) x (depth - 1) ->
/// dense -> softmax over side^2 logits.
struct KernelNetParams {
  std::vector<int> layer_dims;  // input, hidden..., side^2
  std::uint64_t seed = 0;
  std::vector<double> input_noise;  // never trained
  std::vector<DenseLayer> layers;

  int side() const;
  std::size_t parameter_count() const;  // trainable weights + biases
  friend bool operator==(const KernelNetParams&, const KernelNetParams&) = default;
};

struct KernelNetGradient {
  std::vector<DenseLayer> layers;

  double squared_norm() const;
  bool all_finite() const;
};

/// He-normal weights N(0, 2 / fan_in), zero biases, input noise with std 0.25.
KernelNetParams init_kernel_net(std::uint64_t seed, const std::vector<int>& layer_dims);

/// Layer dims for a kernel side: input 200, two hidden layers of 1000, side^2 outputs.
std::vector<int> default_layer_dims(int side);

/// Intermediate values of a forward pass, reusable by backward_into().
struct ForwardCache {
  std::vector<std::vector<double>> pre_activations;  // per layer; last entry = logits
  std::vector<double> probabilities;                 // softmax of the logits
};

Kernel forward(const KernelNetParams& params);
Kernel forward(const KernelNetParams& params, ForwardCache& cache);

/// Reverse-mode gradient of <upstream, forward(params)> with respect to every
/// weight and bias.
KernelNetGradient backward(const KernelNetParams& params, const KernelGradient& upstream);

/// Same as backward() using a cache filled by forward(params, cache) on the
/// same params. Overwrites `out`, reusing its storage when shapes match.
void backward_into(const KernelNetParams& params, const ForwardCache& cache,
                   const KernelGradient& upstream, KernelNetGradient& out);

KernelNetGradient zeros_like(const KernelNetParams& params);

/// params += alpha * direction
void add_scaled(KernelNetParams& params, double alpha, const KernelNetGradient& direction);
/// acc += alpha * g
void add_scaled(KernelNetGradient& acc, double alpha, const KernelNetGradient& g);
double dot(const KernelNetGradient& a, const KernelNetGradient& b);

/// Binary checkpoint: "DKPNET01", u32 layer count + 1, u32 dims, u64 seed,
/// then float64 input noise and per-layer weights, biases (little endian).
std::string serialize(const KernelNetParams& params);
KernelNetParams deserialize_kernel_net(const std::string& blob);

}  // namespace dkp
