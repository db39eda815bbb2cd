#include "dkp/kernelgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dkp/error.hpp"

namespace dkp {

namespace {

void require_odd(int side, const char* who) {
  if (side < 1 || side % 2 == 0) {
    throw ParameterError(std::string(who) + ": kernel side must be odd and positive, got " +
                         std::to_string(side));
  }
}

// 3x3 truncation of an isotropic Gaussian with sigma 0.5 px.
constexpr double kSmoothSigma = 0.5;

Kernel smooth3x3(const Kernel& k) {
  double w[3][3];
  for (int dr = -1; dr <= 1; ++dr)
    for (int dc = -1; dc <= 1; ++dc)
      w[dr + 1][dc + 1] = std::exp(-(dr * dr + dc * dc) / (2.0 * kSmoothSigma * kSmoothSigma));
  const int n = k.side();
  Kernel out(n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      double acc = 0.0;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int rr = r + dr, cc = c + dc;
          if (rr < 0 || rr >= n || cc < 0 || cc >= n) continue;
          acc += w[dr + 1][dc + 1] * k.at(rr, cc);
        }
      }
      out.at(r, c) = acc;
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(KernelFamily family) {
  return family == KernelFamily::Gaussian ? "gaussian" : "motion";
}

KernelFamily family_from_string(std::string_view name) {
  if (name == "gaussian") return KernelFamily::Gaussian;
  if (name == "motion") return KernelFamily::Motion;
  throw ParameterError("unknown kernel family '" + std::string(name) + "'");
}

KernelFamily family_of(const KernelLatent& latent) {
  return std::holds_alternative<GaussianLatent>(latent) ? KernelFamily::Gaussian
                                                        : KernelFamily::Motion;
}

LatentRanges LatentRanges::for_scale(int scale) {
  if (scale < 1) throw ParameterError("scale must be >= 1");
  const double s = scale;
  return LatentRanges{
      .sigma_min = 0.175 * s,
      .sigma_max = 2.5 * s,
      .theta_min = 0.0,
      .theta_max = std::numbers::pi,
      .length_min = s,
      .length_max = 4.0 * s - 1.0,
      .wiggle_min = 0.0,
      .wiggle_max = 0.35,
      .motion_steps = 32,
  };
}

Kernel gaussian_kernel(const GaussianLatent& latent, int side) {
  require_odd(side, "gaussian_kernel");
  if (!(latent.sigma1 > 0.0) || !(latent.sigma2 > 0.0)) {
    throw ParameterError("gaussian_kernel: widths must be positive");
  }
  const double ct = std::cos(latent.theta);
  const double st = std::sin(latent.theta);
  const double inv1 = 1.0 / (latent.sigma1 * latent.sigma1);
  const double inv2 = 1.0 / (latent.sigma2 * latent.sigma2);
  const int c = side / 2;
  Kernel k(side);
  for (int r = 0; r < side; ++r) {
    for (int col = 0; col < side; ++col) {
      const double dx = col - c;
      const double dy = r - c;
      const double u = ct * dx + st * dy;
      const double v = -st * dx + ct * dy;
      k.at(r, col) = std::exp(-0.5 * (u * u * inv1 + v * v * inv2));
    }
  }
  normalize(k);
  return k;
}

namespace detail {

TrajectorySamples trace_trajectory(const MotionLatent& latent, int side) {
  if (!(latent.length_scale > 0.0)) throw ParameterError("motion_kernel: length_scale must be > 0");
  if (latent.num_steps < 2) throw ParameterError("motion_kernel: num_steps must be >= 2");

  std::mt19937_64 rng(latent.seed);
  std::uniform_real_distribution<double> uniform(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> turn(0.0, 1.0);

  // Polyline vertices from a velocity random walk with fixed speed.
  const int segments = latent.num_steps - 1;
  const double step = latent.length_scale / segments;
  double angle = uniform(rng);
  std::vector<std::pair<double, double>> vertices;
  vertices.reserve(latent.num_steps);
  vertices.emplace_back(0.0, 0.0);
  for (int i = 0; i < segments; ++i) {
    if (i > 0) angle += latent.wiggle * turn(rng);
    const auto [r, c] = vertices.back();
    vertices.emplace_back(r + step * std::sin(angle), c + step * std::cos(angle));
  }

  // Equal arc-length samples along the polyline.
  const int per_segment = std::max(4, static_cast<int>(std::ceil(step * 16.0)));
  std::vector<std::pair<double, double>> samples;
  samples.reserve(static_cast<std::size_t>(segments) * per_segment + 1);
  for (int i = 0; i < segments; ++i) {
    const auto [r0, c0] = vertices[i];
    const auto [r1, c1] = vertices[i + 1];
    for (int j = 0; j < per_segment; ++j) {
      const double t = static_cast<double>(j) / per_segment;
      samples.emplace_back(r0 + t * (r1 - r0), c0 + t * (c1 - c0));
    }
  }
  samples.push_back(vertices.back());

  double mr = 0.0, mc = 0.0;
  for (const auto& [r, c] : samples) {
    mr += r;
    mc += c;
  }
  mr /= samples.size();
  mc /= samples.size();
  const double center = side / 2;
  for (auto& [r, c] : samples) {
    r += center - mr;
    c += center - mc;
  }

  TrajectorySamples out;
  out.start = samples.front();
  out.end = samples.back();
  out.points = std::move(samples);
  return out;
}

Kernel splat_samples(const std::vector<std::pair<double, double>>& points, int side) {
  Kernel k(side);
  const double mass = 1.0 / static_cast<double>(points.size());
  for (const auto& [r, c] : points) {
    const int r0 = static_cast<int>(std::floor(r));
    const int c0 = static_cast<int>(std::floor(c));
    const double fr = r - r0;
    const double fc = c - c0;
    const double w[2][2] = {{(1 - fr) * (1 - fc), (1 - fr) * fc}, {fr * (1 - fc), fr * fc}};
    for (int dr = 0; dr < 2; ++dr) {
      for (int dc = 0; dc < 2; ++dc) {
        const int rr = r0 + dr, cc = c0 + dc;
        if (rr < 0 || rr >= side || cc < 0 || cc >= side || w[dr][dc] == 0.0) continue;
        k.at(rr, cc) += mass * w[dr][dc];
      }
    }
  }
  return k;
}

}  // namespace detail

MotionKernel motion_kernel(const MotionLatent& latent, int side) {
  require_odd(side, "motion_kernel");
  const auto traj = detail::trace_trajectory(latent, side);

  double spread = 0.0;
  for (const auto& [r, c] : traj.points) {
    spread = std::max(spread, std::hypot(r - traj.start.first, c - traj.start.second));
  }
  if (spread < 1e-9) return {delta_kernel(side), true};

  Kernel raw = detail::splat_samples(traj.points, side);
  if (raw.sum() <= 0.0) return {delta_kernel(side), true};
  Kernel k = smooth3x3(raw);
  normalize(k);
  return {std::move(k), false};
}

Kernel delta_kernel(int side) {
  require_odd(side, "delta_kernel");
  Kernel k(side);
  k.at(side / 2, side / 2) = 1.0;
  return k;
}

Kernel synthesize_kernel(const KernelLatent& latent, int side) {
  if (const auto* g = std::get_if<GaussianLatent>(&latent)) return gaussian_kernel(*g, side);
  return motion_kernel(std::get<MotionLatent>(latent), side).kernel;
}

KernelLatent sample_latent(KernelFamily family, const LatentRanges& ranges, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  if (family == KernelFamily::Gaussian) {
    GaussianLatent g;
    g.sigma1 = draw(ranges.sigma_min, ranges.sigma_max);
    g.sigma2 = draw(ranges.sigma_min, ranges.sigma_max);
    g.theta = draw(ranges.theta_min, ranges.theta_max);
    return g;
  }
  MotionLatent m;
  m.seed = rng();
  m.length_scale = draw(ranges.length_min, ranges.length_max);
  m.wiggle = draw(ranges.wiggle_min, ranges.wiggle_max);
  m.num_steps = ranges.motion_steps;
  return m;
}

std::pair<double, double> center_of_mass(const Kernel& k) {
  double total = 0.0, mr = 0.0, mc = 0.0;
  for (int r = 0; r < k.side(); ++r) {
    for (int c = 0; c < k.side(); ++c) {
      const double v = k.at(r, c);
      total += v;
      mr += v * r;
      mc += v * c;
    }
  }
  if (total == 0.0) throw ParameterError("center_of_mass: kernel is all zero");
  return {mr / total, mc / total};
}

Kernel shift_kernel(const Kernel& k, int drow, int dcol) {
  const int n = k.side();
  Kernel out(n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const int rr = r + drow, cc = c + dcol;
      if (rr < 0 || rr >= n || cc < 0 || cc >= n) continue;
      out.at(rr, cc) = k.at(r, c);
    }
  }
  return out;
}

}  // namespace dkp
