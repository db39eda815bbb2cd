#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <variant>

#include "dkp/kernel.hpp"

namespace dkp {

/// Anisotropic Gaussian: widths along the two principal axes and the
/// rotation of the first axis, in radians.
struct GaussianLatent {
  double sigma1 = 1.0;
  double sigma2 = 1.0;
  double theta = 0.0;
  friend bool operator==(const GaussianLatent&, const GaussianLatent&) = default;
};

/// Random camera trajectory. `seed` fixes the random walk, `length_scale` is
/// the arc length in pixels and `wiggle` the std of the per-step turn (rad).
struct MotionLatent {
  std::uint64_t seed = 0;
  double length_scale = 4.0;
  double wiggle = 0.3;
  int num_steps = 32;
  friend bool operator==(const MotionLatent&, const MotionLatent&) = default;
};

using KernelLatent = std::variant<GaussianLatent, MotionLatent>;

enum class KernelFamily { Gaussian, Motion };

std::string_view to_string(KernelFamily family);
KernelFamily family_from_string(std::string_view name);
KernelFamily family_of(const KernelLatent& latent);

/// Latent-space box for a scale factor. Gaussian widths follow the
/// [0.175 s, 2.5 s] protocol with theta in [0, pi). Motion lengths span
/// [s, 4 s - 1] pixels so trajectories fit inside a (4s+3)-wide kernel.
struct LatentRanges {
  double sigma_min, sigma_max;
  double theta_min, theta_max;
  double length_min, length_max;
  double wiggle_min, wiggle_max;
  int motion_steps;

  static LatentRanges for_scale(int scale);
};

struct MotionKernel {
  Kernel kernel;
  bool degenerate = false;  // trajectory collapsed to a point; kernel is a delta
};

Kernel gaussian_kernel(const GaussianLatent& latent, int side);
MotionKernel motion_kernel(const MotionLatent& latent, int side);
Kernel delta_kernel(int side);

/// Dispatches on the latent's family. Degenerate motion kernels come back as deltas.
Kernel synthesize_kernel(const KernelLatent& latent, int side);

/// Uniform draw from the family's latent box.
KernelLatent sample_latent(KernelFamily family, const LatentRanges& ranges, std::mt19937_64& rng);

/// Intensity-weighted centroid (row, col). Throws ParameterError on an all-zero kernel.
std::pair<double, double> center_of_mass(const Kernel& k);

/// Integer translation; taps shifted past the border are dropped, vacated taps are 0.
Kernel shift_kernel(const Kernel& k, int drow, int dcol);

namespace detail {

/// Trajectory samples in kernel pixel coordinates before smoothing, exposed
/// for tests. Each sample carries equal mass; samples are centered on the
/// kernel center.
struct TrajectorySamples {
  std::vector<std::pair<double, double>> points;  // (row, col)
  std::pair<double, double> start;
  std::pair<double, double> end;
};

TrajectorySamples trace_trajectory(const MotionLatent& latent, int side);

/// Bilinear splat of equal-mass samples, no smoothing, not normalized.
Kernel splat_samples(const std::vector<std::pair<double, double>>& points, int side);

}  // namespace detail

}  // namespace dkp
