#include "dkp/degradation.hpp"

#include <algorithm>
#include <string>

#include "dkp/error.hpp"

namespace dkp {

namespace {

void check_operands(const Image& x, const Kernel& k, int scale) {
  if (scale < 1) throw ParameterError("scale must be >= 1");
  if (k.side() < 1 || k.side() % 2 == 0) throw ParameterError("kernel side must be odd");
  if (k.side() > x.height() || k.side() > x.width()) {
    throw ShapeError("kernel side " + std::to_string(k.side()) + " exceeds image " +
                     std::to_string(x.height()) + "x" + std::to_string(x.width()));
  }
  if (x.height() % scale != 0 || x.width() % scale != 0) {
    throw ShapeError("HR dimensions " + std::to_string(x.height()) + "x" +
                     std::to_string(x.width()) + " not divisible by scale " +
                     std::to_string(scale));
  }
}

void check_lr(const Image& x, const Image& y, int scale) {
  if (y.height() != x.height() / scale || y.width() != x.width() / scale ||
      y.channels() != x.channels()) {
    throw ShapeError("LR image shape does not match HR image / scale");
  }
}

// Reflect-padded copy of one channel: P(a, b) = x(a - pad, b - pad) mirrored.
struct Padded {
  int pad, height, width;
  std::vector<double> data;
  double at(int a, int b) const { return data[static_cast<std::size_t>(a) * width + b]; }
};

Padded pad_plane(const Image& x, int c, int pad) {
  Padded p{pad, x.height() + 2 * pad, x.width() + 2 * pad, {}};
  p.data.resize(static_cast<std::size_t>(p.height) * p.width);
  for (int a = 0; a < p.height; ++a) {
    const int row = reflect_index(a - pad, x.height());
    for (int b = 0; b < p.width; ++b) {
      p.data[static_cast<std::size_t>(a) * p.width + b] = x.at(c, row, reflect_index(b - pad, x.width()));
    }
  }
  return p;
}

// Kernel rotated by 180 degrees, so convolution becomes a forward correlation
// over the padded plane: out(i, j) = sum kf(u, v) P(i + u, j + v).
Kernel flipped(const Kernel& k) {
  const int n = k.side();
  Kernel f(n);
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v) f.at(u, v) = k.at(n - 1 - u, n - 1 - v);
  return f;
}

}  // namespace

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

Image degrade_noiseless(const Image& x, const Kernel& k, int scale) {
  check_operands(x, k, scale);
  const int pad = k.radius();
  const int n = k.side();
  const Kernel kf = flipped(k);
  Image y(x.height() / scale, x.width() / scale, x.channels());
  for (int c = 0; c < x.channels(); ++c) {
    const Padded p = pad_plane(x, c, pad);
    for (int m = 0; m < y.height(); ++m) {
      for (int q = 0; q < y.width(); ++q) {
        const int i = m * scale, j = q * scale;
        double acc = 0.0;
        for (int u = 0; u < n; ++u) {
          const double* prow = &p.data[static_cast<std::size_t>(i + u) * p.width + j];
          for (int v = 0; v < n; ++v) acc += kf.at(u, v) * prow[v];
        }
        y.at(c, m, q) = acc;
      }
    }
  }
  return y;
}

Image degrade(const Image& x, const Kernel& k, const DegradeConfig& cfg, std::mt19937_64& rng) {
  Image y = degrade_noiseless(x, k, cfg.scale);
  if (cfg.noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
    for (double& v : y.values()) v += noise(rng);
  } else if (cfg.noise_sigma < 0.0) {
    throw ParameterError("noise_sigma must be >= 0");
  }
  return y;
}

Image apply_adjoint(const Image& lr, const Kernel& k, int scale, int hr_height, int hr_width) {
  if (lr.height() * scale != hr_height || lr.width() * scale != hr_width) {
    throw ShapeError("apply_adjoint: LR shape does not match HR shape / scale");
  }
  if (k.side() > hr_height || k.side() > hr_width) throw ShapeError("kernel larger than image");
  const int n = k.side();
  const int pad = k.radius();
  const Kernel kf = flipped(k);
  const int ph = hr_height + 2 * pad, pw = hr_width + 2 * pad;
  Image out(hr_height, hr_width, lr.channels());
  std::vector<double> acc(static_cast<std::size_t>(ph) * pw);
  for (int c = 0; c < lr.channels(); ++c) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int m = 0; m < lr.height(); ++m) {
      for (int q = 0; q < lr.width(); ++q) {
        const double rv = lr.at(c, m, q);
        if (rv == 0.0) continue;
        const int i = m * scale, j = q * scale;
        for (int u = 0; u < n; ++u) {
          double* arow = &acc[static_cast<std::size_t>(i + u) * pw + j];
          for (int v = 0; v < n; ++v) arow[v] += rv * kf.at(u, v);
        }
      }
    }
    // Fold the padding back onto the pixels it mirrors.
    for (int a = 0; a < ph; ++a) {
      const int row = reflect_index(a - pad, hr_height);
      for (int b = 0; b < pw; ++b) {
        out.at(c, row, reflect_index(b - pad, hr_width)) += acc[static_cast<std::size_t>(a) * pw + b];
      }
    }
  }
  return out;
}

Residual residual(const Image& x, const Kernel& k, const Image& y, const DegradeConfig& cfg) {
  check_operands(x, k, cfg.scale);
  check_lr(x, y, cfg.scale);
  Residual res{0.0, degrade_noiseless(x, k, cfg.scale)};
  auto rv = res.r.values();
  auto yv = y.values();
  for (std::size_t i = 0; i < rv.size(); ++i) {
    rv[i] = yv[i] - rv[i];
    res.loss += rv[i] * rv[i];
  }
  return res;
}

double data_loss(const Image& x, const Kernel& k, const Image& y, const DegradeConfig& cfg) {
  return residual(x, k, y, cfg).loss;
}

KernelGradient grad_wrt_kernel(const Image& x, const Kernel& k, const Image& y,
                               const DegradeConfig& cfg) {
  const Residual res = residual(x, k, y, cfg);
  const int n = k.side();
  const int s = cfg.scale;
  // Accumulate against the flipped layout, then rotate back.
  KernelGradient gf(n);
  for (int c = 0; c < x.channels(); ++c) {
    const Padded p = pad_plane(x, c, k.radius());
    for (int m = 0; m < y.height(); ++m) {
      for (int q = 0; q < y.width(); ++q) {
        const double w = -2.0 * res.r.at(c, m, q);
        if (w == 0.0) continue;
        const int i = m * s, j = q * s;
        for (int u = 0; u < n; ++u) {
          const double* prow = &p.data[static_cast<std::size_t>(i + u) * p.width + j];
          for (int v = 0; v < n; ++v) gf.at(u, v) += w * prow[v];
        }
      }
    }
  }
  KernelGradient g(n);
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v) g.at(u, v) = gf.at(n - 1 - u, n - 1 - v);
  return g;
}

Image grad_wrt_image(const Image& x, const Kernel& k, const Image& y, const DegradeConfig& cfg) {
  Residual res = residual(x, k, y, cfg);
  for (double& v : res.r.values()) v *= -2.0;
  return apply_adjoint(res.r, k, cfg.scale, x.height(), x.width());
}

}  // namespace dkp
