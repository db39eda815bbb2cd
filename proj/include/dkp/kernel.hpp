#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dkp {

/// Square side x side array stored row-major. The tag keeps blur kernels and
/// gradients with respect to kernel taps from being mixed up.
template <class Tag>
class SquareGrid {
 public:
  SquareGrid() = default;
  explicit SquareGrid(int side, double fill = 0.0)
      : side_(side), values_(static_cast<std::size_t>(side) * side, fill) {}
  SquareGrid(int side, std::vector<double> values) : side_(side), values_(std::move(values)) {}

  int side() const { return side_; }
  int radius() const { return side_ / 2; }
  std::size_t size() const { return values_.size(); }

  double& at(int row, int col) { return values_[static_cast<std::size_t>(row) * side_ + col]; }
  double at(int row, int col) const { return values_[static_cast<std::size_t>(row) * side_ + col]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  double sum() const {
    double acc = 0.0;
    for (double v : values_) acc += v;
    return acc;
  }

  friend bool operator==(const SquareGrid&, const SquareGrid&) = default;

 private:
  int side_ = 0;
  std::vector<double> values_;
};

struct KernelTag {};
struct KernelGradientTag {};

/// Blur kernel. Emitted kernels live on the probability simplex.
using Kernel = SquareGrid<KernelTag>;
/// Derivative of a scalar with respect to each kernel tap.
using KernelGradient = SquareGrid<KernelGradientTag>;

/// True when every tap is >= 0 and the taps sum to one within `tol`.
bool on_simplex(const Kernel& k, double tol = 1e-9);

/// Divides by the sum. Throws ParameterError for a zero or non-finite sum.
void normalize(Kernel& k);

/// Kernel side of the standard protocol for scale factor s: 4s + 3.
constexpr int protocol_side(int scale) { return 4 * scale + 3; }

}  // namespace dkp
