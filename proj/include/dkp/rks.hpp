#pragma once

#include <optional>
#include <random>
#include <vector>

#include "dkp/degradation.hpp"
#include "dkp/kernelgen.hpp"

namespace dkp {

enum class Proposal { Independent, RandomWalk };

struct RksConfig {
  int num_samples = 5;  // L; 0 disables the prior entirely
  KernelFamily family = KernelFamily::Gaussian;
  double delta_floor = 1e-6;
  Proposal proposal = Proposal::RandomWalk;
  // Std of the walk per latent coordinate, as a fraction of that
  // coordinate's range width.
  double walk_scale = 0.15;
  double anneal = 0.99;  // walk_scale multiplier applied after every prior update
};

/// Markov-chain memory carried between pipeline iterations.
struct RksState {
  std::optional<KernelLatent> last_best_latent;
  int iteration = 0;
  double walk_scale = 0.15;

  static RksState initial(const RksConfig& cfg);
};

struct Candidate {
  KernelLatent latent;
  Kernel kernel;
};

struct CandidateWeights {
  std::vector<double> weights;  // mean 1 over kept candidates, 0 for discarded
  std::vector<double> losses;   // reconstruction loss + delta_floor
  std::vector<std::size_t> discarded;
};

/// Draws L latents (uniform box, or a clamped Gaussian walk around the last
/// best latent) and synthesizes their kernels.
std::vector<Candidate> sample_candidates(const RksState& state, const RksConfig& cfg,
                                         const LatentRanges& ranges, int side,
                                         std::mt19937_64& rng);

/// Reciprocal-loss weights: w = 1 / (||y - A(k) x||^2 + delta_floor),
/// rescaled to mean one. Non-finite losses are dropped.
CandidateWeights candidate_weights(const std::vector<Candidate>& cands, const Image& x,
                                   const Image& y, const RksConfig& cfg, int scale);

/// k_p = (1/L) sum w_l k_l, renormalized onto the simplex. Records the
/// max-weight latent and anneals the walk.
Kernel kernel_prior(const std::vector<Candidate>& cands, const CandidateWeights& weights,
                    const RksConfig& cfg, RksState& state);

}  // namespace dkp
