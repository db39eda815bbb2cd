#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dkp {

/// Dense planar raster with 1 or 3 channels. Values are nominally in [0, 1].
/// Storage order is channel-major, then row-major: (c, row, col).
class Image {
 public:
  Image() = default;
  Image(int height, int width, int channels = 1, double fill = 0.0);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t plane_size() const { return static_cast<std::size_t>(height_) * width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(int c, int row, int col) { return data_[index(c, row, col)]; }
  double at(int c, int row, int col) const { return data_[index(c, row, col)]; }

  std::span<double> plane(int c) { return {data_.data() + c * plane_size(), plane_size()}; }
  std::span<const double> plane(int c) const {
    return {data_.data() + c * plane_size(), plane_size()};
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool same_shape(const Image& other) const {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }

  bool all_finite() const;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int c, int row, int col) const {
    return (static_cast<std::size_t>(c) * height_ + row) * width_ + col;
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

/// Elementwise helpers used by the solvers and tests.
double dot(const Image& a, const Image& b);
double squared_norm(const Image& a);
void axpy(double alpha, const Image& x, Image& y);  // y += alpha * x
void clamp_unit(Image& img);

}  // namespace dkp
