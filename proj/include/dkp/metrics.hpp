#pragma once

#include "dkp/image.hpp"
#include "dkp/kernel.hpp"

namespace dkp {

/// Scores are capped here so identical inputs stay finite in reports.
inline constexpr double kPsnrCap = 100.0;

struct MetricReport {
  double image_psnr = 0.0;
  double ssim = 0.0;
  double kernel_psnr = 0.0;
  double runtime_seconds = 0.0;
};

/// 10 log10(peak^2 / MSE), MSE over every pixel and channel.
double psnr(const Image& a, const Image& b, double peak = 1.0);

/// Mean SSIM over all fully-contained 11x11 Gaussian windows (sigma 1.5,
/// K1 = 0.01, K2 = 0.03, dynamic range 1), averaged over channels.
double ssim(const Image& a, const Image& b);

/// Moves k_est by the integer shift that best aligns its center of mass with
/// k_true's, then PSNR with peak = max(k_true).
double kernel_psnr(const Kernel& k_est, const Kernel& k_true);

}  // namespace dkp
