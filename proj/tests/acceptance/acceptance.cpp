// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances and seed counts are fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dkp/io.hpp"
#include "dkp/pipeline.hpp"
#include "oracles.hpp"

using namespace dkp;
namespace fs = std::filesystem;
using dkp::testing::random_image;
using dkp::testing::random_simplex_kernel;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Normwise relative error ||a - b|| / max(||b||, floor).
double normwise(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
}

std::vector<double> fd_gradient(const std::function<double()>& f, std::vector<double*> coords, double h) {
  std::vector<double> out;
  out.reserve(coords.size());
  for (double* c : coords) out.push_back(dkp::testing::central_difference(f, *c, h));
  return out;
}

template <class Grid>
std::vector<double*> coords_of(Grid& g) {
  std::vector<double*> out;
  for (double& v : g.values()) out.push_back(&v);
  return out;
}

template <class Span>
std::vector<double> to_vec(const Span& s) {
  return {s.begin(), s.end()};
}

// ---------------------------------------------------------------------------

Outcome degradation_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int s = std::array{1, 2, 4}[i % 3];
    const int h = s * (1 + static_cast<int>(rng() % (16 / s)));
    const int w = s * (1 + static_cast<int>(rng() % (16 / s)));
    int side = 1 + 2 * static_cast<int>(rng() % 4);
    while (side > std::min(h, w)) side -= 2;
    const Image x = random_image(h, w, i % 5 == 0 ? 3 : 1, rng);
    const Kernel k = random_simplex_kernel(side, rng);
    const Image fast = degrade_noiseless(x, k, s);
    const Image ref = dkp::testing::naive_degrade(x, k, s);
    for (std::size_t j = 0; j < fast.size(); ++j) worst = std::max(worst, std::abs(fast.values()[j] - ref.values()[j]));
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-12 && t < 5.0, fmt("100 instances, max |diff| %.2e (tol 1e-12), %.2f s (limit 5 s)", worst, t)};
}

Outcome gradient_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(202);
  double e_k = 0, e_x = 0, e_net = 0, e_tv = 0;
  const double h = 1e-6;
  for (int i = 0; i < 20; ++i) {
    const int s = 1 + i % 2;
    const DegradeConfig cfg{.scale = s};
    Image x = random_image(8, 8, 1, rng);
    Kernel k = random_simplex_kernel(i % 2 ? 3 : 5, rng);
    const Image y = random_image(8 / s, 8 / s, 1, rng);
    auto loss = [&] { return data_loss(x, k, y, cfg); };

    e_k = std::max(e_k, normwise(to_vec(grad_wrt_kernel(x, k, y, cfg).values()), fd_gradient(loss, coords_of(k), h)));
    e_x = std::max(e_x, normwise(to_vec(grad_wrt_image(x, k, y, cfg).values()), fd_gradient(loss, coords_of(x), h)));
    e_tv = std::max(e_tv, normwise(to_vec(tv_subgradient(x).values()), fd_gradient([&] { return tv_energy(x); }, coords_of(x), h)));

    KernelNetParams p = init_kernel_net(300 + i, {4, 6, 9});
    std::normal_distribution<double> n(0.0, 0.3);
    for (auto& L : p.layers)
      for (double& b : L.bias) b = n(rng);
    KernelGradient up(3);
    for (double& v : up.values()) v = n(rng);
    const KernelNetGradient g = backward(p, up);
    std::vector<double> analytic;
    std::vector<double*> params;
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
      for (std::size_t j = 0; j < p.layers[l].weights.size(); ++j) {
        analytic.push_back(g.layers[l].weights[j]);
        params.push_back(&p.layers[l].weights[j]);
      }
      for (std::size_t j = 0; j < p.layers[l].bias.size(); ++j) {
        analytic.push_back(g.layers[l].bias[j]);
        params.push_back(&p.layers[l].bias[j]);
      }
    }
    auto net_loss = [&] {
      const Kernel out = forward(p);
      double acc = 0.0;
      for (std::size_t j = 0; j < out.size(); ++j) acc += up.values()[j] * out.values()[j];
      return acc;
    };
    e_net = std::max(e_net, normwise(analytic, fd_gradient(net_loss, params, h)));
  }
  const double t = seconds_since(t0);
  const double worst = std::max({e_k, e_x, e_net, e_tv});
  return {worst <= 1e-4 && t < 30.0,
          fmt("20 instances, max rel err kernel %.1e image %.1e net %.1e tv %.1e (tol 1e-4), %.2f s (limit 30 s)", e_k,
              e_x, e_net, e_tv, t)};
}

Outcome adjoint_identity() {
  std::mt19937_64 rng(303);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const int s = std::array{1, 2, 3, 4}[i % 4];
    const int hl = 2 + static_cast<int>(rng() % 6), wl = 2 + static_cast<int>(rng() % 6);
    int side = 1 + 2 * static_cast<int>(rng() % 5);
    while (side > std::min(hl, wl) * s) side -= 2;
    const Image x = random_image(hl * s, wl * s, i % 3 == 0 ? 3 : 1, rng);
    const Image r = random_image(hl, wl, x.channels(), rng);
    const Kernel k = random_simplex_kernel(side, rng);
    const double lhs = dot(degrade_noiseless(x, k, s), r);
    const double rhs = dot(x, apply_adjoint(r, k, s, x.height(), x.width()));
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return {worst <= 1e-10, fmt("50 tuples, max |<Ax,r> - <x,A^T r>| %.2e (tol 1e-10)", worst)};
}

Outcome rks_weighting_law() {
  std::mt19937_64 rng(404);
  const auto ranges = LatentRanges::for_scale(2);
  RksConfig cfg;
  cfg.proposal = Proposal::Independent;
  int order_ok = 0, planted_ok = 0;
  const int n = 50;
  for (int seed = 0; seed < n; ++seed) {
    const Image hr = dkp::testing::fixture_crop(seed, 32);
    auto cands = sample_candidates(RksState::initial(cfg), cfg, ranges, 11, rng);
    const std::size_t j = static_cast<std::size_t>(seed) % cands.size();
    const Image y = degrade_noiseless(hr, cands[j].kernel, 2);
    const auto w = candidate_weights(cands, hr, y, cfg, 2);
    bool ordered = true;
    for (std::size_t a = 0; a < cands.size(); ++a)
      for (std::size_t b = 0; b < cands.size(); ++b)
        if (w.losses[a] < w.losses[b] && !(w.weights[a] > w.weights[b])) ordered = false;
    order_ok += ordered;
    planted_ok += std::max_element(w.weights.begin(), w.weights.end()) - w.weights.begin() == static_cast<long>(j);
  }
  return {order_ok == n && planted_ok == n,
          fmt("weight order reverses loss order %d/%d, planted kernel max weight %d/%d (need 50/50)", order_ok, n,
              planted_ok, n)};
}

Outcome prior_pull() {
  const KernelNetParams p0 = init_kernel_net(505, default_layer_dims(11));
  const Kernel target = gaussian_kernel({1.8, 0.8, 0.9}, 11);
  const Image x(22, 22, 1, 0.5), y(11, 11, 1, 0.5);
  auto dist = [&](const Kernel& k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) acc += (k.values()[i] - target.values()[i]) * (k.values()[i] - target.values()[i]);
    return std::sqrt(acc);
  };
  PkeConfig cfg;
  cfg.step_data = 0.0;
  cfg.adam_lr = 1e-4;
  PkeState state;
  KernelNetParams p = p0;
  const double d0 = dist(forward(p0));
  int reached = -1;
  double d = d0;
  for (int step = 1; step <= 200; ++step) {
    nld_update_inplace(p, x, y, target, cfg, 2, state);
    d = dist(forward(p));
    if (d < 0.05 * d0) {
      reached = step;
      break;
    }
  }
  return {reached > 0, fmt("distance %.3g -> %.3g (%.2f%% of initial, need < 5%%) after %d inner steps (limit 200)", d0,
                           d, 100.0 * d / d0, reached > 0 ? reached : 200)};
}

// 64x64 Gaussian instances shared by the end-to-end criteria.
struct Instance {
  Image hr;
  SynthInstance synth;
};

Instance gaussian_instance(int seed) {
  Image hr = dkp::testing::fixture_crop(seed, 64);
  auto synth = synth_instance(hr, KernelFamily::Gaussian, 2, 0.0, 1000 + static_cast<std::uint64_t>(seed));
  return {std::move(hr), std::move(synth)};
}

RunResult run_instance(const Instance& inst, int seed, int L, KernelFamily family = KernelFamily::Gaussian) {
  RunConfig cfg;
  cfg.scale = 2;
  cfg.iterations = 300;
  cfg.rks.num_samples = L;
  cfg.rks.family = family;
  cfg.seed = static_cast<std::uint64_t>(seed);
  return run(inst.synth.y, cfg, GroundTruth{inst.hr, inst.synth.k_true});
}

std::map<int, std::vector<double>> l5_kernel_psnr_cache;

Outcome end_to_end_gaussian() {
  const int n = 20;
  int kernel_ok = 0, image_ok = 0;
  double worst_runtime = 0.0, gap_sum = 0.0, gain_sum = 0.0;
  for (int seed = 0; seed < n; ++seed) {
    const Instance inst = gaussian_instance(seed);
    const RunResult res = run_instance(inst, seed, 5);
    l5_kernel_psnr_cache[5].push_back(res.report.kernel_psnr);
    const OracleResult oracle = grid_search_oracle(inst.synth.y, inst.hr, 2, 16);
    const double ceiling = kernel_psnr(oracle.kernel, inst.synth.k_true);
    const double bilinear = psnr(upsample(inst.synth.y, 2, UpsampleMode::Bilinear), inst.hr);
    kernel_ok += res.report.kernel_psnr >= ceiling - 3.0;
    image_ok += res.report.image_psnr >= bilinear + 1.0;
    gap_sum += ceiling - res.report.kernel_psnr;
    gain_sum += res.report.image_psnr - bilinear;
    worst_runtime = std::max(worst_runtime, res.report.runtime_seconds);
    std::printf("      seed %2d  kernel %6.2f dB  oracle %6.2f dB  image %6.2f dB  bilinear %6.2f dB  %.1f s\n", seed,
                res.report.kernel_psnr, ceiling, res.report.image_psnr, bilinear, res.report.runtime_seconds);
  }
  const bool pass = kernel_ok >= 14 && image_ok >= 14 && worst_runtime < 120.0;
  return {pass, fmt("kernel within 3 dB of oracle %d/%d (need 14), image >= bilinear + 1 dB %d/%d (need 14); "
                    "mean oracle gap %.2f dB, mean image gain %.2f dB; max runtime %.1f s (limit 120 s)",
                    kernel_ok, n, image_ok, n, gap_sum / n, gain_sum / n, worst_runtime)};
}

Outcome ablation_direction() {
  const int n = 10;
  const std::vector<int> sweep = {0, 2, 5, 8, 15};
  std::map<int, std::vector<double>> kp;
  for (int L : sweep) {
    for (int seed = 0; seed < n; ++seed) {
      if (L == 5 && seed < static_cast<int>(l5_kernel_psnr_cache[5].size())) {
        kp[L].push_back(l5_kernel_psnr_cache[5][seed]);
        continue;
      }
      kp[L].push_back(run_instance(gaussian_instance(seed), seed, L).report.kernel_psnr);
    }
  }
  int wins = 0;
  for (int seed = 0; seed < n; ++seed) wins += kp[5][seed] > kp[0][seed];
  std::map<int, double> mean;
  std::string means;
  for (int L : sweep) {
    double m = 0.0;
    for (double v : kp[L]) m += v;
    mean[L] = m / n;
    means += fmt(" L=%d %.2f", L, mean[L]);
  }
  bool zero_worst = true;
  for (int L : sweep)
    if (L != 0 && !(mean[0] < mean[L])) zero_worst = false;
  return {wins >= 8 && zero_worst, fmt("L=5 beats L=0 on %d/%d (need 8); mean kernel PSNR dB:%s; L=0 strictly worst: %s",
                                       wins, n, means.c_str(), zero_worst ? "yes" : "no")};
}

Outcome motion_sanity() {
  const int n = 10;
  int wins = 0;
  double margin = 0.0;
  for (int seed = 0; seed < n; ++seed) {
    const Image hr = dkp::testing::fixture_crop(seed, 64);
    const Instance inst{hr, synth_instance(hr, KernelFamily::Motion, 2, 0.0, 2000 + static_cast<std::uint64_t>(seed))};
    const double k = run_instance(inst, seed, 5, KernelFamily::Motion).report.kernel_psnr;
    const double d = kernel_psnr(delta_kernel(11), inst.synth.k_true);
    wins += k > d;
    margin += k - d;
  }
  return {wins >= 7, fmt("pipeline beats delta kernel on %d/%d motion instances (need 7), mean margin %.2f dB", wins, n,
                         margin / n)};
}

Outcome metrics_ground_truth() {
  const double p = psnr(Image(32, 32, 1, 0.5), Image(32, 32, 1, 0.6));
  std::mt19937_64 rng(909);
  const Image a = random_image(32, 32, 1, rng);
  const double s_same = ssim(a, a);
  const double c1 = 1e-4;
  const double closed = (2 * 0.5 * 0.6 + c1) / (0.5 * 0.5 + 0.6 * 0.6 + c1);
  const double s_const = ssim(Image(32, 32, 1, 0.5), Image(32, 32, 1, 0.6));
  const bool pass = std::abs(p - 20.0) <= 1e-9 && std::abs(s_same - 1.0) <= 1e-12 && std::abs(s_const - closed) <= 1e-6;
  return {pass, fmt("PSNR uniform 0.1 = %.12f dB, SSIM identical = %.12f, SSIM 0.5/0.6 = %.9f vs closed form %.9f "
                    "(tol 1e-6)",
                    p, s_same, s_const, closed)};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// CSV row without its last column (wall-clock runtime).
std::string row_without_runtime(const fs::path& csv) {
  std::istringstream in(read_file(csv));
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  return row.substr(0, row.rfind(','));
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "dkp_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const Instance inst = gaussian_instance(3);
  io::save_raw(dir / "y.raw", inst.synth.y);
  io::save_raw(dir / "hr.raw", inst.hr);
  io::save_kernel_text(dir / "k_true.txt", inst.synth.k_true);
  std::vector<std::string> rows;
  for (const char* name : {"a", "b"}) {
    const std::string cmd = std::string("\"") + DKP_CLI_PATH + "\" run --y \"" + (dir / "y.raw").string() +
                            "\" --hr \"" + (dir / "hr.raw").string() + "\" --kernel \"" +
                            (dir / "k_true.txt").string() + "\" --out-dir \"" + (dir / name).string() +
                            "\" --name det --seed 7 --trace > /dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "dkp run exited with an error"};
    rows.push_back(row_without_runtime(dir / name / "metrics.csv"));
  }
  bool files_equal = true;
  for (const char* f : {"x.raw", "x.png", "k.txt", "kernel_net.bin", "trace.jsonl"})
    files_equal = files_equal && read_file(dir / "a" / f) == read_file(dir / "b" / f);
  const bool pass = rows[0] == rows[1] && files_equal;
  return {pass, fmt("two `dkp run` invocations: CSV metric columns %s, x/k/net/trace files %s (row: %s)",
                    rows[0] == rows[1] ? "identical" : "DIFFER", files_equal ? "identical" : "DIFFER", rows[0].c_str())};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    Outcome (*check)();
  };
  const Criterion criteria[] = {
      {1, "degradation oracle equivalence", degradation_oracle},
      {2, "gradient correctness", gradient_correctness},
      {3, "adjoint identity", adjoint_identity},
      {4, "RKS weighting law", rks_weighting_law},
      {5, "prior pull", prior_pull},
      {6, "end-to-end Gaussian recovery", end_to_end_gaussian},
      {7, "ablation direction", ablation_direction},
      {8, "motion-kernel sanity", motion_sanity},
      {9, "metrics ground truth", metrics_ground_truth},
      {10, "determinism", determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s [%2d] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
