#include "dkp/rks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dkp/error.hpp"

namespace dkp {

namespace {

double wrap_angle(double theta, double lo, double hi) {
  const double period = hi - lo;
  double t = std::fmod(theta - lo, period);
  if (t < 0.0) t += period;
  return lo + t;
}

KernelLatent walk_from(const KernelLatent& best, double walk_scale, const LatentRanges& ranges,
                       std::mt19937_64& rng) {
  std::normal_distribution<double> step(0.0, 1.0);
  auto move = [&](double v, double lo, double hi) {
    return std::clamp(v + walk_scale * (hi - lo) * step(rng), lo, hi);
  };
  if (const auto* g = std::get_if<GaussianLatent>(&best)) {
    GaussianLatent out;
    out.sigma1 = move(g->sigma1, ranges.sigma_min, ranges.sigma_max);
    out.sigma2 = move(g->sigma2, ranges.sigma_min, ranges.sigma_max);
    // Orientation is pi-periodic, so it wraps instead of clamping.
    out.theta = wrap_angle(g->theta + walk_scale * (ranges.theta_max - ranges.theta_min) * step(rng),
                           ranges.theta_min, ranges.theta_max);
    return out;
  }
  const auto& m = std::get<MotionLatent>(best);
  MotionLatent out = m;
  out.length_scale = move(m.length_scale, ranges.length_min, ranges.length_max);
  out.wiggle = move(m.wiggle, ranges.wiggle_min, ranges.wiggle_max);
  // The trajectory seed is discrete: it jumps to a fresh draw with
  // probability equal to the (capped) walk scale.
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < std::min(1.0, walk_scale)) out.seed = rng();
  return out;
}

}  // namespace

RksState RksState::initial(const RksConfig& cfg) {
  RksState s;
  s.walk_scale = cfg.walk_scale;
  return s;
}

std::vector<Candidate> sample_candidates(const RksState& state, const RksConfig& cfg,
                                         const LatentRanges& ranges, int side,
                                         std::mt19937_64& rng) {
  std::vector<Candidate> out;
  out.reserve(std::max(cfg.num_samples, 0));
  const bool walk = cfg.proposal == Proposal::RandomWalk && state.last_best_latent.has_value() &&
                    family_of(*state.last_best_latent) == cfg.family;
  for (int l = 0; l < cfg.num_samples; ++l) {
    KernelLatent latent = walk ? walk_from(*state.last_best_latent, state.walk_scale, ranges, rng)
                               : sample_latent(cfg.family, ranges, rng);
    Kernel k = synthesize_kernel(latent, side);
    out.push_back({std::move(latent), std::move(k)});
  }
  return out;
}

CandidateWeights candidate_weights(const std::vector<Candidate>& cands, const Image& x,
                                   const Image& y, const RksConfig& cfg, int scale) {
  if (!(cfg.delta_floor > 0.0)) throw ParameterError("delta_floor must be > 0");
  CandidateWeights out;
  out.weights.assign(cands.size(), 0.0);
  out.losses.assign(cands.size(), 0.0);
  const DegradeConfig dcfg{.scale = scale};
  double total = 0.0;
  std::size_t kept = 0;
  for (std::size_t l = 0; l < cands.size(); ++l) {
    const double loss = data_loss(x, cands[l].kernel, y, dcfg) + cfg.delta_floor;
    out.losses[l] = loss;
    if (!std::isfinite(loss)) {
      out.discarded.push_back(l);
      continue;
    }
    out.weights[l] = 1.0 / loss;
    total += out.weights[l];
    ++kept;
  }
  if (kept == 0) throw NumericalError("candidate_weights: every candidate loss is non-finite");
  const double mean = total / static_cast<double>(kept);
  for (double& w : out.weights) w /= mean;
  return out;
}

Kernel kernel_prior(const std::vector<Candidate>& cands, const CandidateWeights& weights,
                    const RksConfig& cfg, RksState& state) {
  if (cands.empty()) throw ParameterError("kernel_prior: no candidates");
  if (weights.weights.size() != cands.size()) throw ShapeError("kernel_prior: weight count mismatch");

  const std::size_t kept = cands.size() - weights.discarded.size();
  const int side = cands.front().kernel.side();
  Kernel prior(side);
  std::size_t best = 0;
  for (std::size_t l = 0; l < cands.size(); ++l) {
    const double w = weights.weights[l];
    if (w > weights.weights[best]) best = l;
    if (w == 0.0) continue;
    const auto kv = cands[l].kernel.values();
    auto pv = prior.values();
    for (std::size_t i = 0; i < pv.size(); ++i) pv[i] += w * kv[i];
  }
  for (double& v : prior.values()) v /= static_cast<double>(kept);
  normalize(prior);

  state.last_best_latent = cands[best].latent;
  state.iteration += 1;
  state.walk_scale *= cfg.anneal;
  return prior;
}

}  // namespace dkp
