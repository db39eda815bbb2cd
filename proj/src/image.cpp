#include "dkp/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dkp/error.hpp"

namespace dkp {

Image::Image(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
  if (height < 1 || width < 1) {
    throw ParameterError("image dimensions must be >= 1, got " + std::to_string(height) + "x" +
                         std::to_string(width));
  }
  if (channels != 1 && channels != 3) {
    throw ParameterError("image must have 1 or 3 channels, got " + std::to_string(channels));
  }
  data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

bool Image::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double dot(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw ShapeError("dot: image shapes differ");
  double acc = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) acc += av[i] * bv[i];
  return acc;
}

double squared_norm(const Image& a) { return dot(a, a); }

void axpy(double alpha, const Image& x, Image& y) {
  if (!x.same_shape(y)) throw ShapeError("axpy: image shapes differ");
  auto xv = x.values();
  auto yv = y.values();
  for (std::size_t i = 0; i < xv.size(); ++i) yv[i] += alpha * xv[i];
}

void clamp_unit(Image& img) {
  for (double& v : img.values()) v = std::clamp(v, 0.0, 1.0);
}

}  // namespace dkp
