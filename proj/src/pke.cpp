#include "dkp/pke.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "dkp/error.hpp"

namespace dkp {

PriorLoss prior_loss(const KernelNetParams& params, const Kernel& prior) {
  const Kernel k = forward(params);
  if (k.side() != prior.side()) throw ShapeError("prior_loss: kernel side mismatch");
  PriorLoss out{0.0, KernelGradient(k.side())};
  const auto kv = k.values();
  const auto pv = prior.values();
  auto uv = out.upstream.values();
  for (std::size_t i = 0; i < kv.size(); ++i) {
    const double d = kv[i] - pv[i];
    out.loss += d * d;
    uv[i] = 2.0 * d;
  }
  return out;
}

NldDirection nld_direction(const KernelNetParams& params, const Image& x, const Image& y,
                           const std::optional<Kernel>& prior, const PkeConfig& cfg, int scale) {
  const Kernel k = forward(params);
  const DegradeConfig dcfg{.scale = scale};

  NldDirection dir;
  dir.data_loss = data_loss(x, k, y, dcfg);
  KernelGradient data_up = grad_wrt_kernel(x, k, y, dcfg);
  for (double& v : data_up.values()) v = -v;
  dir.data_ascent = backward(params, data_up);

  if (prior) {
    PriorLoss pl = prior_loss(params, *prior);
    dir.prior_loss = pl.loss;
    for (double& v : pl.upstream.values()) v = -v;
    dir.prior_ascent = backward(params, pl.upstream);
  } else {
    dir.prior_ascent = zeros_like(params);
  }

  dir.combined = zeros_like(params);
  add_scaled(dir.combined, cfg.step_data, dir.data_ascent);
  add_scaled(dir.combined, cfg.step_prior, dir.prior_ascent);
  return dir;
}

namespace {

void adam_step(KernelNetParams& params, const KernelNetGradient& combined, const PkeConfig& cfg,
               PkeState& state) {
  if (!state.first_moment) {
    state.first_moment = zeros_like(params);
    state.second_moment = zeros_like(params);
  }
  state.step += 1;
  const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  auto update = [&](std::vector<double>& p, std::vector<double>& m, std::vector<double>& v,
                    const std::vector<double>& d) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double g = -d[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      p[i] -= cfg.adam_lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.adam_eps);
    }
  };
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& P = params.layers[l];
    auto& M = state.first_moment->layers[l];
    auto& V = state.second_moment->layers[l];
    const auto& D = combined.layers[l];
    update(P.weights, M.weights, V.weights, D.weights);
    update(P.bias, M.bias, V.bias, D.bias);
  }
}

}  // namespace

std::vector<NldStepMetrics> nld_update_inplace(KernelNetParams& params, const Image& x, const Image& y,
                                               const std::optional<Kernel>& prior, const PkeConfig& cfg,
                                               int scale, PkeState& state) {
  if (cfg.inner_steps < 1) throw ParameterError("inner_steps must be >= 1");
  if (cfg.step_data < 0.0 || cfg.step_prior < 0.0) throw ParameterError("PKE steps must be >= 0");
  if (prior && prior->side() != params.side()) throw ShapeError("nld_update: prior side mismatch");
  const DegradeConfig dcfg{.scale = scale};
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

  std::vector<NldStepMetrics> steps;
  for (int step = 0; step < cfg.inner_steps; ++step) {
    const Kernel k = forward(params, state.cache);
    NldStepMetrics m{kNaN, 0.0, kNaN, kNaN};

    // Upstream of the combined ascent direction in kernel space.
    KernelGradient data_up = grad_wrt_kernel(x, k, y, dcfg);
    for (double& v : data_up.values()) v = -v;
    KernelGradient prior_up(k.side());
    if (prior) {
      const auto kv = k.values();
      const auto pv = prior->values();
      auto uv = prior_up.values();
      for (std::size_t i = 0; i < kv.size(); ++i) {
        const double d = kv[i] - pv[i];
        m.prior_loss += d * d;
        uv[i] = -2.0 * d;
      }
    }
    KernelGradient up(k.side());
    {
      auto u = up.values();
      const auto dv = data_up.values();
      const auto pv = prior_up.values();
      for (std::size_t i = 0; i < u.size(); ++i) u[i] = cfg.step_data * dv[i] + cfg.step_prior * pv[i];
    }
    m.data_loss = data_loss(x, k, y, dcfg);
    backward_into(params, state.cache, up, state.direction);
    if (!state.direction.all_finite() || !std::isfinite(m.data_loss)) {
      throw NumericalError("nld_update: non-finite gradient at inner step " + std::to_string(step) +
                           " (data loss " + std::to_string(m.data_loss) + ")");
    }
    if (cfg.track_norms) {
      KernelNetGradient g;
      backward_into(params, state.cache, data_up, g);
      m.data_grad_norm = std::sqrt(g.squared_norm());
      if (prior) {
        backward_into(params, state.cache, prior_up, g);
        m.prior_grad_norm = std::sqrt(g.squared_norm());
      } else {
        m.prior_grad_norm = 0.0;
      }
    }
    steps.push_back(m);

    if (cfg.optimizer == PkeOptimizer::PlainLangevin) {
      add_scaled(params, 1.0, state.direction);
    } else {
      adam_step(params, state.direction, cfg, state);
    }
  }
  return steps;
}

NldResult nld_update(const KernelNetParams& params, const Image& x, const Image& y,
                     const std::optional<Kernel>& prior, const PkeConfig& cfg, int scale,
                     PkeState& state) {
  NldResult result{params, {}};
  result.steps = nld_update_inplace(result.params, x, y, prior, cfg, scale, state);
  return result;
}

}  // namespace dkp
