#pragma once

#include <random>

#include "dkp/image.hpp"
#include "dkp/kernel.hpp"

namespace dkp {

enum class Boundary { Reflect };

/// Forward model y = (x conv k) subsampled by `scale`, plus Gaussian noise.
struct DegradeConfig {
  int scale = 1;
  double noise_sigma = 0.0;
  Boundary boundary = Boundary::Reflect;
};

/// Mirror index into [0, n) without repeating the edge sample (-1 -> 1).
int reflect_index(int i, int n);

/// Blur (true convolution, reflect boundary), keep every `scale`-th row and
/// column starting at 0, then add i.i.d. N(0, noise_sigma^2) noise.
/// Channels share the kernel.
Image degrade(const Image& x, const Kernel& k, const DegradeConfig& cfg, std::mt19937_64& rng);

/// degrade() without the noise term. This is the linear operator A(k) x.
Image degrade_noiseless(const Image& x, const Kernel& k, int scale);

/// Adjoint A(k)^T applied to an LR image, producing an HR-shaped image.
Image apply_adjoint(const Image& lr, const Kernel& k, int scale, int hr_height, int hr_width);

struct Residual {
  double loss = 0.0;  // squared Frobenius norm summed over channels
  Image r;            // y - A(k) x
};

Residual residual(const Image& x, const Kernel& k, const Image& y, const DegradeConfig& cfg);

/// Loss only; skips materializing the residual image.
double data_loss(const Image& x, const Kernel& k, const Image& y, const DegradeConfig& cfg);

/// d loss / d k for loss = ||y - A(k) x||_F^2.
KernelGradient grad_wrt_kernel(const Image& x, const Kernel& k, const Image& y,
                               const DegradeConfig& cfg);

/// d loss / d x = A(k)^T (-2 r).
Image grad_wrt_image(const Image& x, const Kernel& k, const Image& y, const DegradeConfig& cfg);

}  // namespace dkp
