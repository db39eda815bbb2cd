#include "dkp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "dkp/error.hpp"
#include "dkp/kernelgen.hpp"

namespace dkp {

namespace {

constexpr int kWindow = 11;
constexpr double kWindowSigma = 1.5;
constexpr double kC1 = (0.01 * 1.0) * (0.01 * 1.0);
constexpr double kC2 = (0.03 * 1.0) * (0.03 * 1.0);

double psnr_from_mse(double mse, double peak) {
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

std::vector<double> gaussian_window() {
  std::vector<double> w(kWindow * kWindow);
  const int h = kWindow / 2;
  double total = 0.0;
  for (int r = 0; r < kWindow; ++r) {
    for (int c = 0; c < kWindow; ++c) {
      const double d2 = (r - h) * (r - h) + (c - h) * (c - h);
      w[r * kWindow + c] = std::exp(-d2 / (2.0 * kWindowSigma * kWindowSigma));
      total += w[r * kWindow + c];
    }
  }
  for (double& v : w) v /= total;
  return w;
}

}  // namespace

double psnr(const Image& a, const Image& b, double peak) {
  if (!a.same_shape(b)) throw ShapeError("psnr: image shapes differ");
  double acc = 0.0;
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) acc += (av[i] - bv[i]) * (av[i] - bv[i]);
  return psnr_from_mse(acc / static_cast<double>(av.size()), peak);
}

double ssim(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw ShapeError("ssim: image shapes differ");
  if (a.height() < kWindow || a.width() < kWindow) {
    throw ShapeError("ssim: images must be at least 11x11");
  }
  const std::vector<double> w = gaussian_window();
  double total = 0.0;
  for (int c = 0; c < a.channels(); ++c) {
    double channel_sum = 0.0;
    int count = 0;
    for (int i = 0; i + kWindow <= a.height(); ++i) {
      for (int j = 0; j + kWindow <= a.width(); ++j) {
        double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
        for (int r = 0; r < kWindow; ++r) {
          for (int q = 0; q < kWindow; ++q) {
            const double wt = w[r * kWindow + q];
            const double va = a.at(c, i + r, j + q);
            const double vb = b.at(c, i + r, j + q);
            ma += wt * va;
            mb += wt * vb;
            saa += wt * va * va;
            sbb += wt * vb * vb;
            sab += wt * va * vb;
          }
        }
        const double var_a = saa - ma * ma;
        const double var_b = sbb - mb * mb;
        const double cov = sab - ma * mb;
        channel_sum += ((2 * ma * mb + kC1) * (2 * cov + kC2)) /
                       ((ma * ma + mb * mb + kC1) * (var_a + var_b + kC2));
        ++count;
      }
    }
    total += channel_sum / count;
  }
  return total / a.channels();
}

double kernel_psnr(const Kernel& k_est, const Kernel& k_true) {
  if (k_est.side() != k_true.side()) throw ShapeError("kernel_psnr: kernel sides differ");
  const auto [er, ec] = center_of_mass(k_est);
  const auto [tr, tc] = center_of_mass(k_true);
  const Kernel aligned = shift_kernel(k_est, static_cast<int>(std::lround(tr - er)),
                                      static_cast<int>(std::lround(tc - ec)));
  const auto av = aligned.values();
  const auto tv = k_true.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) acc += (av[i] - tv[i]) * (av[i] - tv[i]);
  const double peak = *std::max_element(tv.begin(), tv.end());
  return psnr_from_mse(acc / static_cast<double>(av.size()), peak);
}

}  // namespace dkp
