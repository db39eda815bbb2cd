#include "dkp/kernel.hpp"

#include <cmath>
#include <string>

#include "dkp/error.hpp"

namespace dkp {

bool on_simplex(const Kernel& k, double tol) {
  double acc = 0.0;
  for (double v : k.values()) {
    if (!(v >= 0.0)) return false;
    acc += v;
  }
  return std::abs(acc - 1.0) <= tol;
}

void normalize(Kernel& k) {
  const double s = k.sum();
  if (!std::isfinite(s) || s == 0.0) throw ParameterError("cannot normalize kernel with sum " + std::to_string(s));
  for (double& v : k.values()) v /= s;
}

}  // namespace dkp
