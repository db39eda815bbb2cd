#pragma once

#include <optional>
#include <vector>

#include "dkp/degradation.hpp"
#include "dkp/kernelnet.hpp"

namespace dkp {

enum class PkeOptimizer { PlainLangevin, AdamAssisted };

struct PkeConfig {
  double step_data = 0.5 * 0.1 * 0.1;  // delta^2 / 2 with delta = 0.1
  double step_prior = 0.1;             // delta
  int inner_steps = 1;
  PkeOptimizer optimizer = PkeOptimizer::AdamAssisted;
  // Adam only: the combined Langevin direction is fed in as the (negated)
  // gradient and rescaled per coordinate.
  double adam_lr = 3e-5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  // Evaluate the data and prior gradient norms separately (two extra
  // backward passes per step); otherwise they are reported as NaN.
  bool track_norms = false;
};

/// Adam moments; persists across pipeline iterations.
struct PkeState {
  std::optional<KernelNetGradient> first_moment;
  std::optional<KernelNetGradient> second_moment;
  long step = 0;
  // Scratch buffers reused across steps.
  ForwardCache cache;
  KernelNetGradient direction;
};

struct PriorLoss {
  double loss = 0.0;        // ||G(phi) - k_p||_F^2
  KernelGradient upstream;  // 2 (G(phi) - k_p)
};

PriorLoss prior_loss(const KernelNetParams& params, const Kernel& prior);

/// One Langevin direction evaluated at `params`. The ascent terms are the
/// gradients of the log-probabilities (negated losses) w.r.t. the params.
struct NldDirection {
  KernelNetGradient data_ascent;
  KernelNetGradient prior_ascent;  // zero when no prior is supplied
  KernelNetGradient combined;      // step_data * data_ascent + step_prior * prior_ascent
  double data_loss = 0.0;
  double prior_loss = 0.0;
};

NldDirection nld_direction(const KernelNetParams& params, const Image& x, const Image& y,
                           const std::optional<Kernel>& prior, const PkeConfig& cfg, int scale);

struct NldStepMetrics {
  double data_loss;
  double prior_loss;
  double data_grad_norm;
  double prior_grad_norm;
};

struct NldResult {
  KernelNetParams params;
  std::vector<NldStepMetrics> steps;
};

/// Runs `inner_steps` network-based Langevin updates. Passing no prior drops
/// the prior term (RKS disabled). Throws NumericalError on a non-finite direction.
NldResult nld_update(const KernelNetParams& params, const Image& x, const Image& y,
                     const std::optional<Kernel>& prior, const PkeConfig& cfg, int scale,
                     PkeState& state);

/// In-place form of nld_update(). On a throw, steps already taken stay applied.
std::vector<NldStepMetrics> nld_update_inplace(KernelNetParams& params, const Image& x, const Image& y,
                                               const std::optional<Kernel>& prior, const PkeConfig& cfg,
                                               int scale, PkeState& state);

/// The kernel currently represented by the network.
inline Kernel estimate_kernel(const KernelNetParams& params) { return forward(params); }

}  // namespace dkp
