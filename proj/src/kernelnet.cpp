#include "dkp/kernelnet.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <random>

#include "dkp/error.hpp"

namespace dkp {

static_assert(std::endian::native == std::endian::little, "checkpoint format assumes little endian");

namespace {

constexpr char kMagic[8] = {'D', 'K', 'P', 'N', 'E', 'T', '0', '1'};
constexpr double kInputNoiseStd = 0.25;

void check_params(const KernelNetParams& p) {
  if (p.layer_dims.size() < 2 || p.layers.size() != p.layer_dims.size() - 1) {
    throw ShapeError("kernel net: layer list does not match dims");
  }
  if (p.input_noise.size() != static_cast<std::size_t>(p.layer_dims.front())) {
    throw ShapeError("kernel net: input noise length does not match input dim");
  }
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const DenseLayer& L = p.layers[l];
    if (L.in != p.layer_dims[l] || L.out != p.layer_dims[l + 1] ||
        L.weights.size() != static_cast<std::size_t>(L.in) * L.out ||
        L.bias.size() != static_cast<std::size_t>(L.out)) {
      throw ShapeError("kernel net: layer " + std::to_string(l) + " has inconsistent shapes");
    }
  }
  p.side();
}

// Layer l reads the input noise (l = 0) or relu(z[l - 1]).
void fill_pre_activations(const KernelNetParams& p, std::vector<std::vector<double>>& z) {
  z.resize(p.layers.size());
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const DenseLayer& L = p.layers[l];
    const double* in = l == 0 ? p.input_noise.data() : z[l - 1].data();
    const bool relu = l > 0;
    std::vector<double>& zl = z[l];
    zl.assign(L.bias.begin(), L.bias.end());
    for (int o = 0; o < L.out; ++o) {
      const double* w = &L.weights[static_cast<std::size_t>(o) * L.in];
      double acc = 0.0;
      if (relu) {
        for (int i = 0; i < L.in; ++i) acc += w[i] * std::max(in[i], 0.0);
      } else {
        for (int i = 0; i < L.in; ++i) acc += w[i] * in[i];
      }
      zl[o] += acc;
    }
  }
}

void softmax_into(const std::vector<double>& logits, std::vector<double>& p) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  p.resize(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    total += p[i];
  }
  for (double& v : p) v /= total;
}

template <class T>
void put(std::string& out, const T& value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T take(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw IoError("kernel net checkpoint truncated");
  T value;
  std::memcpy(&value, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

void put_doubles(std::string& out, const std::vector<double>& v) {
  out.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
}

void take_doubles(const std::string& in, std::size_t& pos, std::vector<double>& v) {
  const std::size_t bytes = v.size() * sizeof(double);
  if (pos + bytes > in.size()) throw IoError("kernel net checkpoint truncated");
  std::memcpy(v.data(), in.data() + pos, bytes);
  pos += bytes;
}

}  // namespace

int KernelNetParams::side() const {
  if (layer_dims.empty()) throw ShapeError("kernel net has no layers");
  const int out = layer_dims.back();
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(out))));
  if (side * side != out || side % 2 == 0) {
    throw ShapeError("kernel net output dim " + std::to_string(out) + " is not an odd square");
  }
  return side;
}

std::size_t KernelNetParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& L : layers) n += L.weights.size() + L.bias.size();
  return n;
}

double KernelNetGradient::squared_norm() const { return dot(*this, *this); }

bool KernelNetGradient::all_finite() const {
  for (const auto& L : layers) {
    for (double v : L.weights)
      if (!std::isfinite(v)) return false;
    for (double v : L.bias)
      if (!std::isfinite(v)) return false;
  }
  return true;
}

std::vector<int> default_layer_dims(int side) { return {200, 1000, 1000, side * side}; }

KernelNetParams init_kernel_net(std::uint64_t seed, const std::vector<int>& layer_dims) {
  if (layer_dims.size() < 2) throw ParameterError("kernel net needs at least input and output dims");
  for (int d : layer_dims)
    if (d < 1) throw ParameterError("kernel net dims must be positive");

  KernelNetParams p;
  p.layer_dims = layer_dims;
  p.seed = seed;
  p.side();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, kInputNoiseStd);
  p.input_noise.resize(layer_dims.front());
  for (double& v : p.input_noise) v = noise(rng);

  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    DenseLayer L;
    L.in = layer_dims[l];
    L.out = layer_dims[l + 1];
    std::normal_distribution<double> he(0.0, std::sqrt(2.0 / L.in));
    L.weights.resize(static_cast<std::size_t>(L.in) * L.out);
    for (double& w : L.weights) w = he(rng);
    L.bias.assign(L.out, 0.0);
    p.layers.push_back(std::move(L));
  }
  return p;
}

Kernel forward(const KernelNetParams& params) {
  ForwardCache cache;
  return forward(params, cache);
}

Kernel forward(const KernelNetParams& params, ForwardCache& cache) {
  check_params(params);
  fill_pre_activations(params, cache.pre_activations);
  softmax_into(cache.pre_activations.back(), cache.probabilities);
  return Kernel(params.side(), cache.probabilities);
}

KernelNetGradient backward(const KernelNetParams& params, const KernelGradient& upstream) {
  ForwardCache cache;
  forward(params, cache);
  KernelNetGradient grad;
  backward_into(params, cache, upstream, grad);
  return grad;
}

void backward_into(const KernelNetParams& params, const ForwardCache& cache,
                   const KernelGradient& upstream, KernelNetGradient& out) {
  if (upstream.side() != params.side()) {
    throw ShapeError("backward: upstream side does not match net output");
  }
  const auto& z = cache.pre_activations;
  const auto& prob = cache.probabilities;
  if (z.size() != params.layers.size() || prob.size() != upstream.size()) {
    throw ShapeError("backward: forward cache does not match params");
  }
  if (out.layers.size() != params.layers.size()) out = zeros_like(params);

  // Softmax Jacobian: dz = p * (g - <g, p>).
  const auto g = upstream.values();
  double gp = 0.0;
  for (std::size_t i = 0; i < prob.size(); ++i) gp += g[i] * prob[i];
  std::vector<double> delta(prob.size());
  for (std::size_t i = 0; i < prob.size(); ++i) delta[i] = prob[i] * (g[i] - gp);

  std::vector<double> a, prev;
  for (std::size_t l = params.layers.size(); l-- > 0;) {
    const DenseLayer& L = params.layers[l];
    DenseLayer& G = out.layers[l];

    if (l == 0) {
      a = params.input_noise;
    } else {
      a.resize(L.in);
      for (int i = 0; i < L.in; ++i) a[i] = std::max(z[l - 1][i], 0.0);
    }

    for (int o = 0; o < L.out; ++o) {
      const double d = delta[o];
      G.bias[o] = d;
      double* gw = &G.weights[static_cast<std::size_t>(o) * L.in];
      for (int i = 0; i < L.in; ++i) gw[i] = d * a[i];
    }
    if (l == 0) break;

    prev.assign(L.in, 0.0);
    for (int o = 0; o < L.out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      const double* w = &L.weights[static_cast<std::size_t>(o) * L.in];
      for (int i = 0; i < L.in; ++i) prev[i] += w[i] * d;
    }
    for (int i = 0; i < L.in; ++i)
      if (z[l - 1][i] <= 0.0) prev[i] = 0.0;
    delta.swap(prev);
  }
}

KernelNetGradient zeros_like(const KernelNetParams& params) {
  KernelNetGradient g;
  g.layers.reserve(params.layers.size());
  for (const auto& L : params.layers) {
    g.layers.push_back(DenseLayer{L.in, L.out, std::vector<double>(L.weights.size(), 0.0),
                                  std::vector<double>(L.bias.size(), 0.0)});
  }
  return g;
}

void add_scaled(KernelNetParams& params, double alpha, const KernelNetGradient& direction) {
  if (direction.layers.size() != params.layers.size()) throw ShapeError("add_scaled: layer count mismatch");
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& P = params.layers[l];
    const auto& D = direction.layers[l];
    if (P.weights.size() != D.weights.size() || P.bias.size() != D.bias.size()) {
      throw ShapeError("add_scaled: layer shape mismatch");
    }
    for (std::size_t i = 0; i < P.weights.size(); ++i) P.weights[i] += alpha * D.weights[i];
    for (std::size_t i = 0; i < P.bias.size(); ++i) P.bias[i] += alpha * D.bias[i];
  }
}

void add_scaled(KernelNetGradient& acc, double alpha, const KernelNetGradient& g) {
  if (acc.layers.size() != g.layers.size()) throw ShapeError("add_scaled: layer count mismatch");
  for (std::size_t l = 0; l < acc.layers.size(); ++l) {
    auto& A = acc.layers[l];
    const auto& B = g.layers[l];
    for (std::size_t i = 0; i < A.weights.size(); ++i) A.weights[i] += alpha * B.weights[i];
    for (std::size_t i = 0; i < A.bias.size(); ++i) A.bias[i] += alpha * B.bias[i];
  }
}

double dot(const KernelNetGradient& a, const KernelNetGradient& b) {
  if (a.layers.size() != b.layers.size()) throw ShapeError("dot: layer count mismatch");
  double acc = 0.0;
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    const auto& A = a.layers[l];
    const auto& B = b.layers[l];
    for (std::size_t i = 0; i < A.weights.size(); ++i) acc += A.weights[i] * B.weights[i];
    for (std::size_t i = 0; i < A.bias.size(); ++i) acc += A.bias[i] * B.bias[i];
  }
  return acc;
}

std::string serialize(const KernelNetParams& params) {
  check_params(params);
  std::string out(kMagic, sizeof(kMagic));
  put(out, static_cast<std::uint32_t>(params.layer_dims.size()));
  for (int d : params.layer_dims) put(out, static_cast<std::uint32_t>(d));
  put(out, params.seed);
  put_doubles(out, params.input_noise);
  for (const auto& L : params.layers) {
    put_doubles(out, L.weights);
    put_doubles(out, L.bias);
  }
  return out;
}

KernelNetParams deserialize_kernel_net(const std::string& blob) {
  if (blob.size() < sizeof(kMagic) || std::memcmp(blob.data(), kMagic, sizeof(kMagic)) != 0) {
    throw IoError("not a kernel net checkpoint");
  }
  std::size_t pos = sizeof(kMagic);
  const auto count = take<std::uint32_t>(blob, pos);
  if (count < 2 || count > 64) throw IoError("kernel net checkpoint has bad layer count");
  KernelNetParams p;
  for (std::uint32_t i = 0; i < count; ++i) p.layer_dims.push_back(static_cast<int>(take<std::uint32_t>(blob, pos)));
  p.seed = take<std::uint64_t>(blob, pos);
  p.input_noise.resize(p.layer_dims.front());
  take_doubles(blob, pos, p.input_noise);
  for (std::size_t l = 0; l + 1 < p.layer_dims.size(); ++l) {
    DenseLayer L;
    L.in = p.layer_dims[l];
    L.out = p.layer_dims[l + 1];
    L.weights.resize(static_cast<std::size_t>(L.in) * L.out);
    L.bias.resize(L.out);
    take_doubles(blob, pos, L.weights);
    take_doubles(blob, pos, L.bias);
    p.layers.push_back(std::move(L));
  }
  if (pos != blob.size()) throw IoError("kernel net checkpoint has trailing bytes");
  check_params(p);
  return p;
}

}  // namespace dkp
