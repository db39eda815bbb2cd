#pragma once

#include "dkp/degradation.hpp"
#include "dkp/image.hpp"
#include "dkp/kernel.hpp"

namespace dkp {

enum class UpsampleMode { Nearest, Bilinear };

/// Nearest replication or bilinear interpolation on the offset-0 lattice:
/// LR pixel (m, n) lands on HR pixel (s m, s n); the last rows/cols beyond the
/// final LR sample are extrapolated flat.
Image upsample(const Image& lr, int scale, UpsampleMode mode);

/// Image-restoration stage of the alternating loop. Implementations must not
/// keep state between calls other than configuration, so the pipeline can
/// swap them freely.
class ImageRestorer {
 public:
  virtual ~ImageRestorer() = default;
  virtual Image init_image(const Image& y, int scale) const = 0;
  virtual Image restore(const Image& x, const Image& y, const Kernel& k, int scale) const = 0;
};

struct RestorerConfig {
  double step_image = 0.5;  // gamma_x
  int steps_per_iter = 1;
  double tv_weight = 1e-3;
  UpsampleMode init = UpsampleMode::Bilinear;
  bool halve_on_increase = true;
};

/// Smoothed isotropic total variation sum sqrt(dx^2 + dy^2 + eps^2) with
/// forward differences (zero across the last row/column).
double tv_energy(const Image& x, double eps = 1e-3);
Image tv_subgradient(const Image& x, double eps = 1e-3);

/// Data-consistency gradient descent with optional TV smoothing.
class GradientRestorer final : public ImageRestorer {
 public:
  explicit GradientRestorer(RestorerConfig cfg = {});

  Image init_image(const Image& y, int scale) const override;
  Image restore(const Image& x, const Image& y, const Kernel& k, int scale) const override;

  const RestorerConfig& config() const { return cfg_; }

 private:
  RestorerConfig cfg_;
};

}  // namespace dkp
