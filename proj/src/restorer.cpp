#include "dkp/restorer.hpp"

#include <algorithm>
#include <cmath>

#include "dkp/error.hpp"

namespace dkp {

Image upsample(const Image& lr, int scale, UpsampleMode mode) {
  if (scale < 1) throw ParameterError("upsample: scale must be >= 1");
  Image hr(lr.height() * scale, lr.width() * scale, lr.channels());
  for (int c = 0; c < lr.channels(); ++c) {
    for (int i = 0; i < hr.height(); ++i) {
      for (int j = 0; j < hr.width(); ++j) {
        if (mode == UpsampleMode::Nearest) {
          hr.at(c, i, j) = lr.at(c, i / scale, j / scale);
          continue;
        }
        const double fr = std::min(static_cast<double>(i) / scale, lr.height() - 1.0);
        const double fc = std::min(static_cast<double>(j) / scale, lr.width() - 1.0);
        const int r0 = static_cast<int>(fr), c0 = static_cast<int>(fc);
        const int r1 = std::min(r0 + 1, lr.height() - 1), c1 = std::min(c0 + 1, lr.width() - 1);
        const double ar = fr - r0, ac = fc - c0;
        hr.at(c, i, j) = (1 - ar) * ((1 - ac) * lr.at(c, r0, c0) + ac * lr.at(c, r0, c1)) +
                         ar * ((1 - ac) * lr.at(c, r1, c0) + ac * lr.at(c, r1, c1));
      }
    }
  }
  return hr;
}

double tv_energy(const Image& x, double eps) {
  double e = 0.0;
  for (int c = 0; c < x.channels(); ++c) {
    for (int i = 0; i < x.height(); ++i) {
      for (int j = 0; j < x.width(); ++j) {
        const double v = x.at(c, i, j);
        const double dx = j + 1 < x.width() ? x.at(c, i, j + 1) - v : 0.0;
        const double dy = i + 1 < x.height() ? x.at(c, i + 1, j) - v : 0.0;
        e += std::sqrt(dx * dx + dy * dy + eps * eps);
      }
    }
  }
  return e;
}

Image tv_subgradient(const Image& x, double eps) {
  Image g(x.height(), x.width(), x.channels());
  for (int c = 0; c < x.channels(); ++c) {
    for (int i = 0; i < x.height(); ++i) {
      for (int j = 0; j < x.width(); ++j) {
        const double v = x.at(c, i, j);
        const bool has_right = j + 1 < x.width();
        const bool has_down = i + 1 < x.height();
        const double dx = has_right ? x.at(c, i, j + 1) - v : 0.0;
        const double dy = has_down ? x.at(c, i + 1, j) - v : 0.0;
        const double norm = std::sqrt(dx * dx + dy * dy + eps * eps);
        const double a = dx / norm, b = dy / norm;
        g.at(c, i, j) -= a + b;
        if (has_right) g.at(c, i, j + 1) += a;
        if (has_down) g.at(c, i + 1, j) += b;
      }
    }
  }
  return g;
}

GradientRestorer::GradientRestorer(RestorerConfig cfg) : cfg_(cfg) {
  if (!(cfg_.step_image > 0.0)) throw ParameterError("step_image must be > 0");
  if (cfg_.steps_per_iter < 0) throw ParameterError("steps_per_iter must be >= 0");
  if (cfg_.tv_weight < 0.0) throw ParameterError("tv_weight must be >= 0");
}

Image GradientRestorer::init_image(const Image& y, int scale) const {
  return upsample(y, scale, cfg_.init);
}

Image GradientRestorer::restore(const Image& x, const Image& y, const Kernel& k, int scale) const {
  if (!x.all_finite() || !y.all_finite()) throw NumericalError("restore: non-finite input image");
  const DegradeConfig dcfg{.scale = scale};
  auto objective = [&](const Image& img) {
    double f = data_loss(img, k, y, dcfg);
    if (cfg_.tv_weight > 0.0) f += cfg_.tv_weight * tv_energy(img);
    return f;
  };

  Image cur = x;
  double step = cfg_.step_image;
  double f_cur = cfg_.halve_on_increase ? objective(cur) : 0.0;
  for (int it = 0; it < cfg_.steps_per_iter; ++it) {
    Image grad = grad_wrt_image(cur, k, y, dcfg);
    if (cfg_.tv_weight > 0.0) axpy(cfg_.tv_weight, tv_subgradient(cur), grad);

    for (int attempt = 0;; ++attempt) {
      Image next = cur;
      axpy(-step, grad, next);
      clamp_unit(next);
      if (!next.all_finite()) throw NumericalError("restore: non-finite image update");
      if (!cfg_.halve_on_increase) {
        cur = std::move(next);
        break;
      }
      const double f_next = objective(next);
      if (f_next <= f_cur) {
        cur = std::move(next);
        f_cur = f_next;
        break;
      }
      if (attempt >= 8) break;  // no descent at any tried step: keep cur
      step *= 0.5;
    }
  }
  return cur;
}

}  // namespace dkp
