#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dkp/kernelgen.hpp"
#include "dkp/kernelnet.hpp"
#include "dkp/metrics.hpp"
#include "dkp/pke.hpp"
#include "dkp/restorer.hpp"
#include "dkp/rks.hpp"

namespace dkp {

struct RunConfig {
  int scale = 2;
  int iterations = 300;
  int kernel_side = 0;          // 0 selects 4 s + 3
  std::vector<int> net_dims;    // empty selects default_layer_dims(side)
  RksConfig rks;
  PkeConfig pke;
  RestorerConfig restorer;
  std::uint64_t seed = 0;
  bool trace = false;           // keep per-iteration RKS diagnostics

  int side() const { return kernel_side > 0 ? kernel_side : protocol_side(scale); }
  void validate() const;
};

struct GroundTruth {
  Image hr;
  Kernel kernel;
};

/// One alternating iteration. NaN marks metrics that need ground truth.
struct IterationRecord {
  int t = 0;
  double data_loss = 0.0;     // ||y - A(k^t) x^t||^2 after the image update
  double pke_data_loss = 0.0;
  double prior_loss = 0.0;
  double data_grad_norm = 0.0;
  double prior_grad_norm = 0.0;
  std::vector<double> candidate_losses;
  std::vector<double> candidate_weights;
  std::optional<KernelLatent> best_latent;
  double kernel_psnr = 0.0;
  double image_psnr = 0.0;
  bool rolled_back = false;
};

struct RunResult {
  Image x;
  Kernel k;
  std::optional<Kernel> prior;  // last k_p
  KernelNetParams params;
  MetricReport report;
  double initial_data_loss = 0.0;
  std::vector<IterationRecord> history;
  int rollbacks = 0;
  bool aborted = false;         // gave up after repeated non-finite steps; x/k are the last finite iterate
};

/// Alternates kernel-prior sampling, the Langevin kernel update and the image
/// restorer for cfg.iterations rounds. Uses GradientRestorer(cfg.restorer)
/// when no restorer is supplied.
RunResult run(const Image& y, const RunConfig& cfg, const std::optional<GroundTruth>& truth = {},
              const ImageRestorer* restorer = nullptr);

struct SynthInstance {
  Image y;
  Kernel k_true;
  KernelLatent latent;
};

/// Draws a latent uniformly from the family box, builds the (4s+3) kernel and
/// degrades `hr` with it.
SynthInstance synth_instance(const Image& hr, KernelFamily family, int scale, double noise_sigma,
                             std::uint64_t seed);

/// Grid axes of the oracle: widths linspace(sigma_min, sigma_max, n),
/// angles pi * i / n.
std::vector<GaussianLatent> oracle_grid(int scale, int grid_resolution);

struct OracleResult {
  Kernel kernel;
  GaussianLatent latent;
  double loss = 0.0;
};

/// Exhaustive minimizer of ||y - A(k) x_ref||^2 over the Gaussian grid.
OracleResult grid_search_oracle(const Image& y, const Image& x_ref, int scale, int grid_resolution);

struct BatchItem {
  std::string name;
  Image y;
  std::optional<GroundTruth> truth;
};

struct BatchRow {
  std::string instance;
  std::string family;
  RunResult result;
};

/// Runs independent instances on up to `threads` workers. Instance i uses
/// seed derive_seed(cfg.seed, i), so results do not depend on scheduling.
std::vector<BatchRow> run_batch(const std::vector<BatchItem>& items, const RunConfig& cfg,
                                KernelFamily family, int threads);

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace dkp
