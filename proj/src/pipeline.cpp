#include "dkp/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "dkp/error.hpp"

namespace dkp {

namespace {

constexpr int kMaxRollbacks = 8;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 finalizer over (base, stream)
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void RunConfig::validate() const {
  if (scale < 1) throw ParameterError("scale must be >= 1");
  if (iterations < 1) throw ParameterError("iterations must be >= 1");
  if (side() % 2 == 0) throw ParameterError("kernel side must be odd");
  if (rks.num_samples < 0) throw ParameterError("rks.L must be >= 0");
  if (!(rks.delta_floor > 0.0)) throw ParameterError("rks.delta_floor must be > 0");
  if (!(rks.anneal > 0.0 && rks.anneal <= 1.0)) throw ParameterError("rks.anneal must be in (0, 1]");
  if (pke.inner_steps < 1) throw ParameterError("pke.inner_steps must be >= 1");
}

RunResult run(const Image& y, const RunConfig& cfg, const std::optional<GroundTruth>& truth,
              const ImageRestorer* restorer) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  const int s = cfg.scale;
  const int side = cfg.side();
  if (y.height() * s < side || y.width() * s < side) {
    throw ShapeError("LR image too small for kernel side " + std::to_string(side));
  }

  const GradientRestorer default_restorer(cfg.restorer);
  const ImageRestorer& ir = restorer ? *restorer : default_restorer;
  const LatentRanges ranges = LatentRanges::for_scale(s);
  const DegradeConfig dcfg{.scale = s};

  RunResult out;
  out.x = ir.init_image(y, s);
  out.params = init_kernel_net(derive_seed(cfg.seed, 1),
                               cfg.net_dims.empty() ? default_layer_dims(side) : cfg.net_dims);
  if (out.params.side() != side) throw ShapeError("net output side does not match kernel side");
  out.k = estimate_kernel(out.params);
  out.initial_data_loss = data_loss(out.x, out.k, y, dcfg);

  std::mt19937_64 rks_rng(derive_seed(cfg.seed, 2));
  RksState rks_state = RksState::initial(cfg.rks);
  PkeState pke_state;
  PkeConfig pke_cfg = cfg.pke;
  pke_cfg.track_norms = pke_cfg.track_norms || cfg.trace;
  KernelNetParams saved_params;
  PkeState saved_pke;

  for (int t = 1; t <= cfg.iterations; ++t) {
    // Checkpoint for rollback on non-finite updates.
    // Copy-assignment reuses the snapshot buffers.
    saved_params = out.params;
    saved_pke.first_moment = pke_state.first_moment;
    saved_pke.second_moment = pke_state.second_moment;
    saved_pke.step = pke_state.step;
    const RksState saved_rks = rks_state;
    const auto saved_rng = rks_rng;

    IterationRecord rec;
    rec.t = t;
    try {
      std::optional<Kernel> prior;
      if (cfg.rks.num_samples > 0) {
        const auto cands = sample_candidates(rks_state, cfg.rks, ranges, side, rks_rng);
        const auto weights = candidate_weights(cands, out.x, y, cfg.rks, s);
        prior = kernel_prior(cands, weights, cfg.rks, rks_state);
        rec.best_latent = rks_state.last_best_latent;
        if (cfg.trace) {
          rec.candidate_losses = weights.losses;
          rec.candidate_weights = weights.weights;
        }
      }

      const auto steps = nld_update_inplace(out.params, out.x, y, prior, pke_cfg, s, pke_state);
      Kernel k = forward(out.params, pke_state.cache);
      if (!on_simplex(k, 1e-6)) throw NumericalError("kernel left the simplex");
      Image x = ir.restore(out.x, y, k, s);
      const double loss = data_loss(x, k, y, dcfg);
      if (!std::isfinite(loss)) throw NumericalError("non-finite data loss");

      const auto& last = steps.back();
      rec.pke_data_loss = last.data_loss;
      rec.prior_loss = last.prior_loss;
      rec.data_grad_norm = last.data_grad_norm;
      rec.prior_grad_norm = last.prior_grad_norm;
      rec.data_loss = loss;

      out.k = std::move(k);
      out.x = std::move(x);
      out.prior = std::move(prior);
    } catch (const NumericalError&) {
      out.params = saved_params;
      pke_state.first_moment = saved_pke.first_moment;
      pke_state.second_moment = saved_pke.second_moment;
      pke_state.step = saved_pke.step;
      rks_state = saved_rks;
      rks_rng = saved_rng;
      pke_cfg.step_data *= 0.5;
      pke_cfg.step_prior *= 0.5;
      pke_cfg.adam_lr *= 0.5;
      rec.rolled_back = true;
      rec.data_loss = data_loss(out.x, out.k, y, dcfg);
      if (++out.rollbacks > kMaxRollbacks) {
        out.aborted = true;
        out.history.push_back(std::move(rec));
        break;
      }
    }

    rec.kernel_psnr = truth ? kernel_psnr(out.k, truth->kernel) : kNaN;
    rec.image_psnr = truth ? psnr(out.x, truth->hr) : kNaN;
    out.history.push_back(std::move(rec));
  }

  if (truth) {
    out.report.image_psnr = psnr(out.x, truth->hr);
    out.report.ssim = ssim(out.x, truth->hr);
    out.report.kernel_psnr = kernel_psnr(out.k, truth->kernel);
  } else {
    out.report.image_psnr = out.report.ssim = out.report.kernel_psnr = kNaN;
  }
  out.report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

SynthInstance synth_instance(const Image& hr, KernelFamily family, int scale, double noise_sigma,
                             std::uint64_t seed) {
  if (hr.height() % scale != 0 || hr.width() % scale != 0) {
    throw ShapeError("synth_instance: HR dims not divisible by scale");
  }
  std::mt19937_64 rng(seed);
  const LatentRanges ranges = LatentRanges::for_scale(scale);
  KernelLatent latent = sample_latent(family, ranges, rng);
  Kernel k = synthesize_kernel(latent, protocol_side(scale));
  Image y = degrade(hr, k, DegradeConfig{.scale = scale, .noise_sigma = noise_sigma}, rng);
  return {std::move(y), std::move(k), std::move(latent)};
}

std::vector<GaussianLatent> oracle_grid(int scale, int grid_resolution) {
  if (grid_resolution < 2) throw ParameterError("grid_resolution must be >= 2");
  const LatentRanges r = LatentRanges::for_scale(scale);
  const int n = grid_resolution;
  std::vector<GaussianLatent> grid;
  grid.reserve(static_cast<std::size_t>(n) * n * n);
  for (int a = 0; a < n; ++a) {
    const double s1 = r.sigma_min + (r.sigma_max - r.sigma_min) * a / (n - 1);
    for (int b = 0; b < n; ++b) {
      const double s2 = r.sigma_min + (r.sigma_max - r.sigma_min) * b / (n - 1);
      for (int c = 0; c < n; ++c) {
        grid.push_back({s1, s2, std::numbers::pi * c / n});
      }
    }
  }
  return grid;
}

OracleResult grid_search_oracle(const Image& y, const Image& x_ref, int scale, int grid_resolution) {
  const int side = protocol_side(scale);
  const DegradeConfig dcfg{.scale = scale};
  std::optional<OracleResult> best;
  for (const GaussianLatent& g : oracle_grid(scale, grid_resolution)) {
    Kernel k = gaussian_kernel(g, side);
    const double loss = data_loss(x_ref, k, y, dcfg);
    if (!best || loss < best->loss) best = OracleResult{std::move(k), g, loss};
  }
  return *best;
}

std::vector<BatchRow> run_batch(const std::vector<BatchItem>& items, const RunConfig& cfg,
                                KernelFamily family, int threads) {
  std::vector<BatchRow> rows(items.size());
  std::vector<std::exception_ptr> errors(items.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < items.size(); i = next++) {
      RunConfig local = cfg;
      local.seed = derive_seed(cfg.seed, i);
      try {
        rows[i] = BatchRow{items[i].name, std::string(to_string(family)),
                           run(items[i].y, local, items[i].truth)};
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(items.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < n; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

}  // namespace dkp
