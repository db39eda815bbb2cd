#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dkp/error.hpp"
#include "dkp/kernelnet.hpp"
#include "oracles.hpp"

using namespace dkp;

namespace {

double inner(const KernelGradient& up, const Kernel& k) {
  double acc = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) acc += up.values()[i] * k.values()[i];
  return acc;
}

KernelGradient random_upstream(int side, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  KernelGradient g(side);
  for (double& v : g.values()) v = n(rng);
  return g;
}

// Visits every trainable scalar of params alongside its gradient entry.
template <class F>
void for_each_param(KernelNetParams& p, const KernelNetGradient& g, F f) {
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    for (std::size_t i = 0; i < p.layers[l].weights.size(); ++i) f(p.layers[l].weights[i], g.layers[l].weights[i]);
    for (std::size_t i = 0; i < p.layers[l].bias.size(); ++i) f(p.layers[l].bias[i], g.layers[l].bias[i]);
  }
}

}  // namespace

TEST(KernelNetForward, OutputOnSimplexStrictlyPositive) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Kernel k = forward(init_kernel_net(seed, {16, 32, 49}));
    EXPECT_TRUE(on_simplex(k, 1e-9));
    for (double v : k.values()) EXPECT_GT(v, 0.0);
  }
}

TEST(KernelNetForward, ZeroParamsGiveUniform) {
  KernelNetParams p = init_kernel_net(1, {8, 10, 25});
  for (auto& L : p.layers) {
    std::fill(L.weights.begin(), L.weights.end(), 0.0);
    std::fill(L.bias.begin(), L.bias.end(), 0.0);
  }
  const Kernel k = forward(p);
  for (double v : k.values()) EXPECT_NEAR(v, 1.0 / 25.0, 1e-15);
}

TEST(KernelNetForward, CachedOverloadIsBitIdentical) {
  const KernelNetParams p = init_kernel_net(2, {12, 20, 20, 9});
  ForwardCache cache;
  EXPECT_EQ(forward(p), forward(p, cache));
  EXPECT_EQ(forward(p, cache), forward(p));
}

TEST(KernelNetForward, DefaultDimsWithinWellPerformingBand) {
  const auto dims = default_layer_dims(19);
  ASSERT_EQ(dims.size(), 4u);  // three dense layers
  EXPECT_EQ(dims.back(), 361);
  for (std::size_t i = 1; i + 1 < dims.size(); ++i) {
    EXPECT_GE(dims[i], 100);
    EXPECT_LE(dims[i], 1000);
  }
}

TEST(KernelNetForward, RejectsMismatchedDims) {
  EXPECT_THROW(init_kernel_net(0, {4, 6, 8}), ShapeError);  // 8 is not a square of an odd side
  KernelNetParams p = init_kernel_net(0, {4, 6, 9});
  p.input_noise.pop_back();
  EXPECT_THROW(forward(p), ShapeError);
}

TEST(KernelNetInit, SameSeedSameParams) {
  EXPECT_EQ(init_kernel_net(42, {10, 20, 9}), init_kernel_net(42, {10, 20, 9}));
  EXPECT_NE(init_kernel_net(42, {10, 20, 9}), init_kernel_net(43, {10, 20, 9}));
}

TEST(KernelNetInit, HeScaledWeightsZeroBias) {
  const KernelNetParams p = init_kernel_net(7, {200, 1000, 121});
  const auto& w = p.layers[0].weights;
  double var = 0.0;
  for (double v : w) var += v * v;
  var /= w.size();
  EXPECT_NEAR(var, 2.0 / 200.0, 0.05 * 2.0 / 200.0);
  for (const auto& L : p.layers)
    for (double b : L.bias) EXPECT_EQ(b, 0.0);
  double nvar = 0.0;
  for (double v : p.input_noise) nvar += v * v;
  EXPECT_NEAR(std::sqrt(nvar / p.input_noise.size()), 0.25, 0.04);
}

TEST(KernelNetInit, NearUniformOutput) {
  const int side = 11;
  const double uniform = 1.0 / (side * side);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Kernel k = forward(init_kernel_net(seed, {200, 100, 100, side * side}));
    double mx = 0.0;
    for (double v : k.values()) mx = std::max(mx, v);
    EXPECT_LE(mx, 5.0 * uniform) << "seed " << seed;
  }
}

TEST(KernelNetInit, ParameterCount) {
  const KernelNetParams small = init_kernel_net(0, {4, 6, 9});
  EXPECT_EQ(small.parameter_count(), 4u * 6 + 6 + 6 * 9 + 9);
  const std::size_t big = 200 * 1000 + 1000 + 1000 * 1000 + 1000 + 1000 * 361 + 361;
  EXPECT_EQ(init_kernel_net(0, default_layer_dims(19)).parameter_count(), big);
  RecordProperty("default_param_count_side19", std::to_string(big));
}

TEST(KernelNetBackward, ZeroUpstreamGivesZero) {
  const KernelNetParams p = init_kernel_net(3, {4, 6, 9});
  EXPECT_EQ(backward(p, KernelGradient(3)).squared_norm(), 0.0);
}

TEST(KernelNetBackward, ConstantUpstreamGivesZero) {
  // Softmax outputs always sum to one, so <1, forward> is constant.
  const KernelNetParams p = init_kernel_net(4, {6, 8, 25});
  EXPECT_LT(backward(p, KernelGradient(5, 1.0)).squared_norm(), 1e-28);
}

TEST(KernelNetBackward, MatchesFiniteDifferencesPerParameter) {
  std::mt19937_64 rng(5);
  KernelNetParams p = init_kernel_net(5, {4, 6, 9});
  // Nonzero biases so every ReLU branch is exercised away from its kink.
  std::normal_distribution<double> n(0.0, 0.3);
  for (auto& L : p.layers)
    for (double& b : L.bias) b = n(rng);
  const KernelGradient up = random_upstream(3, rng);
  const KernelNetGradient g = backward(p, up);
  for_each_param(p, g, [&](double& param, double analytic) {
    const double fd = dkp::testing::central_difference([&] { return inner(up, forward(p)); }, param, 1e-6);
    EXPECT_LE(dkp::testing::rel_err(analytic, fd, 1e-7), 1e-5);
  });
}

TEST(KernelNetBackward, DirectionalDerivative) {
  std::mt19937_64 rng(6);
  const KernelNetParams p = init_kernel_net(6, {16, 24, 24, 25});
  const KernelGradient up = random_upstream(5, rng);
  const KernelNetGradient g = backward(p, up);
  KernelNetGradient d = zeros_like(p);
  std::normal_distribution<double> n(0.0, 1.0);
  for (auto& L : d.layers) {
    for (double& v : L.weights) v = n(rng);
    for (double& v : L.bias) v = n(rng);
  }
  const double eps = 1e-6;
  KernelNetParams plus = p, minus = p;
  add_scaled(plus, eps, d);
  add_scaled(minus, -eps, d);
  const double fd = (inner(up, forward(plus)) - inner(up, forward(minus))) / (2 * eps);
  EXPECT_LE(dkp::testing::rel_err(dot(g, d), fd), 1e-4);
}

TEST(KernelNetBackward, BackwardIntoReusesStorage) {
  std::mt19937_64 rng(7);
  const KernelNetParams p = init_kernel_net(7, {8, 12, 9});
  ForwardCache cache;
  forward(p, cache);
  KernelNetGradient out;
  backward_into(p, cache, random_upstream(3, rng), out);
  const KernelGradient up = random_upstream(3, rng);
  backward_into(p, cache, up, out);
  const KernelNetGradient fresh = backward(p, up);
  for (std::size_t l = 0; l < out.layers.size(); ++l) EXPECT_EQ(out.layers[l], fresh.layers[l]);
  EXPECT_THROW(backward(p, KernelGradient(5)), ShapeError);
}

TEST(KernelNetSerialize, RoundTrip) {
  const KernelNetParams p = init_kernel_net(9, {6, 10, 9});
  const std::string blob = serialize(p);
  EXPECT_EQ(blob.substr(0, 8), "DKPNET01");
  EXPECT_EQ(deserialize_kernel_net(blob), p);
  EXPECT_THROW(deserialize_kernel_net(blob.substr(0, blob.size() - 3)), std::exception);
  EXPECT_THROW(deserialize_kernel_net("garbage!"), std::exception);
}
