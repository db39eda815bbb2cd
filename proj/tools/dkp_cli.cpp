// Command-line front end: synth / run / bench / oracle.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "dkp/config.hpp"
#include "dkp/error.hpp"
#include "dkp/io.hpp"
#include "dkp/pipeline.hpp"
#include "dkp/report.hpp"

namespace fs = std::filesystem;

namespace {

dkp::Image load_image(const fs::path& path) {
  return path.extension() == ".raw" ? dkp::io::load_raw(path) : dkp::io::load_png(path);
}

// Crops to the largest top-left region divisible by `scale`.
dkp::Image crop_divisible(const dkp::Image& img, int scale) {
  const int h = img.height() / scale * scale;
  const int w = img.width() / scale * scale;
  if (h == img.height() && w == img.width()) return img;
  dkp::Image out(h, w, img.channels());
  for (int c = 0; c < img.channels(); ++c)
    for (int r = 0; r < h; ++r)
      for (int q = 0; q < w; ++q) out.at(c, r, q) = img.at(c, r, q);
  return out;
}

struct CommonRunOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  bool trace = false;

  void add_to(CLI::App* app) {
    app->add_option("--config", config_path, "key = value run configuration file");
    app->add_option("--set", overrides, "config override key=value (repeatable)");
    app->add_option("--seed", seed, "RNG seed");
    app->add_flag("--trace", trace, "write per-iteration JSON-lines trace");
  }

  dkp::RunConfig build() const {
    dkp::RunConfig cfg;
    if (!config_path.empty()) dkp::apply_key_values(cfg, dkp::load_key_values(config_path));
    dkp::apply_overrides(cfg, overrides);
    if (seed) cfg.seed = *seed;
    if (trace) cfg.trace = true;
    cfg.validate();
    return cfg;
  }
};

void write_outputs(const fs::path& dir, const dkp::RunResult& res, const dkp::RunConfig& cfg) {
  fs::create_directories(dir);
  dkp::io::save_png(dir / "x.png", res.x);
  dkp::io::save_raw(dir / "x.raw", res.x);
  dkp::io::save_kernel_text(dir / "k.txt", res.k);
  dkp::io::save_kernel_png(dir / "k.png", res.k, 8);
  dkp::io::save_kernel_net(dir / "kernel_net.bin", res.params);
  std::ofstream(dir / "config.txt") << dkp::dump_config(cfg);
  if (cfg.trace) dkp::report::write_trace_jsonl(dir / "trace.jsonl", res.history);
}

int cmd_synth(const fs::path& hr_dir, const fs::path& out_dir, const std::string& family_name,
              int scale, double noise, std::uint64_t seed) {
  const dkp::KernelFamily family = dkp::family_from_string(family_name);
  std::vector<fs::path> inputs;
  for (const auto& e : fs::directory_iterator(hr_dir)) {
    const auto ext = e.path().extension();
    if (ext == ".png" || ext == ".raw") inputs.push_back(e.path());
  }
  std::sort(inputs.begin(), inputs.end());
  if (inputs.empty()) throw dkp::IoError("no .png/.raw images in " + hr_dir.string());

  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const dkp::Image hr = crop_divisible(load_image(inputs[i]), scale);
    const auto inst = dkp::synth_instance(hr, family, scale, noise, dkp::derive_seed(seed, i));
    const fs::path dir = out_dir / inputs[i].stem();
    fs::create_directories(dir);
    dkp::io::save_raw(dir / "hr.raw", hr);
    dkp::io::save_png(dir / "hr.png", hr);
    dkp::io::save_raw(dir / "y.raw", inst.y);
    dkp::io::save_png(dir / "y.png", inst.y);
    dkp::io::save_kernel_text(dir / "k_true.txt", inst.k_true);
    dkp::io::save_kernel_png(dir / "k_true.png", inst.k_true, 8);
    std::ofstream(dir / "latent.json") << dkp::report::latent_json(inst.latent) << '\n';
    std::cout << dir.string() << '\n';
  }
  return 0;
}

int cmd_run(const fs::path& y_path, const std::optional<fs::path>& hr_path,
            const std::optional<fs::path>& kernel_path, const fs::path& out_dir,
            const std::string& name, const CommonRunOptions& opts) {
  const dkp::RunConfig cfg = opts.build();
  const dkp::Image y = load_image(y_path);
  std::optional<dkp::GroundTruth> truth;
  if (hr_path && kernel_path) {
    truth = dkp::GroundTruth{load_image(*hr_path), dkp::io::load_kernel_text(*kernel_path)};
  } else if (hr_path || kernel_path) {
    throw dkp::ParameterError("--hr and --kernel must be given together");
  }
  const dkp::RunResult res = dkp::run(y, cfg, truth);
  write_outputs(out_dir, res, cfg);
  const std::string row = dkp::report::csv_row(name, std::string(dkp::to_string(cfg.rks.family)), res.report);
  std::ofstream(out_dir / "metrics.csv") << dkp::report::kCsvHeader << '\n' << row << '\n';
  std::cout << dkp::report::kCsvHeader << '\n' << row << '\n';
  if (res.aborted) {
    std::cerr << "run aborted after " << res.rollbacks << " rollbacks; outputs hold the last finite iterate\n";
    return 2;
  }
  return 0;
}

int cmd_bench(const fs::path& data_dir, const fs::path& out_dir, int threads, const CommonRunOptions& opts) {
  const dkp::RunConfig cfg = opts.build();
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(data_dir))
    if (e.is_directory() && fs::exists(e.path() / "y.raw")) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw dkp::IoError("no instances (subdirectories with y.raw) in " + data_dir.string());

  std::vector<dkp::BatchItem> items;
  for (const auto& d : dirs) {
    dkp::BatchItem item{d.filename().string(), dkp::io::load_raw(d / "y.raw"), std::nullopt};
    if (fs::exists(d / "hr.raw") && fs::exists(d / "k_true.txt")) {
      item.truth = dkp::GroundTruth{dkp::io::load_raw(d / "hr.raw"), dkp::io::load_kernel_text(d / "k_true.txt")};
    }
    items.push_back(std::move(item));
  }
  const auto rows = dkp::run_batch(items, cfg, cfg.rks.family, threads);
  fs::create_directories(out_dir);
  for (const auto& row : rows) write_outputs(out_dir / row.instance, row.result, cfg);
  dkp::report::write_csv(out_dir / "report.csv", rows);
  std::cout << dkp::report::kCsvHeader << '\n';
  for (const auto& row : rows) std::cout << dkp::report::csv_row(row.instance, row.family, row.result.report) << '\n';
  return 0;
}

int cmd_oracle(const fs::path& y_path, const fs::path& xref_path, const std::optional<fs::path>& kernel_path,
               int scale, int grid, const fs::path& out_dir) {
  const dkp::Image y = load_image(y_path);
  const dkp::Image x_ref = load_image(xref_path);
  const auto best = dkp::grid_search_oracle(y, x_ref, scale, grid);
  fs::create_directories(out_dir);
  dkp::io::save_kernel_text(out_dir / "k_oracle.txt", best.kernel);
  dkp::io::save_kernel_png(out_dir / "k_oracle.png", best.kernel, 8);
  std::cout << "loss " << best.loss << '\n' << "latent " << dkp::report::latent_json(best.latent) << '\n';
  if (kernel_path) {
    std::cout << "kernel_psnr " << dkp::kernel_psnr(best.kernel, dkp::io::load_kernel_text(*kernel_path)) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blind super-resolution kernel estimation with a dynamic kernel prior"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "degrade HR images with random kernels");
  std::string hr_dir, synth_out, family = "gaussian";
  int synth_scale = 2;
  double noise = 0.0;
  std::uint64_t synth_seed = 0;
  synth->add_option("--hr-dir", hr_dir, "directory of HR .png/.raw images")->required();
  synth->add_option("--out-dir", synth_out, "output directory")->required();
  synth->add_option("--family", family, "gaussian|motion")->capture_default_str();
  synth->add_option("--scale", synth_scale, "scale factor")->capture_default_str();
  synth->add_option("--noise", noise, "additive noise std")->capture_default_str();
  synth->add_option("--seed", synth_seed, "RNG seed")->capture_default_str();

  // run
  auto* run = app.add_subcommand("run", "estimate kernel and HR image for one LR image");
  std::string y_path, run_out, name = "instance";
  std::optional<std::string> hr_path, kernel_path;
  CommonRunOptions run_opts;
  run->add_option("--y", y_path, "LR image (.png or .raw)")->required();
  run->add_option("--hr", hr_path, "ground-truth HR image for metrics");
  run->add_option("--kernel", kernel_path, "ground-truth kernel text grid for metrics");
  run->add_option("--out-dir", run_out, "output directory")->required();
  run->add_option("--name", name, "instance name in the CSV row")->capture_default_str();
  run_opts.add_to(run);

  // bench
  auto* bench = app.add_subcommand("bench", "run every instance of a synth directory, emit CSV");
  std::string data_dir, bench_out;
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  CommonRunOptions bench_opts;
  bench->add_option("--data-dir", data_dir, "directory produced by synth")->required();
  bench->add_option("--out-dir", bench_out, "output directory")->required();
  bench->add_option("--threads", threads, "worker threads")->capture_default_str();
  bench_opts.add_to(bench);

  // oracle
  auto* oracle = app.add_subcommand("oracle", "grid-search Gaussian kernel baseline");
  std::string oy, oxref, oout;
  std::optional<std::string> okernel;
  int oscale = 2, ogrid = 16;
  oracle->add_option("--y", oy, "LR image")->required();
  oracle->add_option("--x-ref", oxref, "reference HR image")->required();
  oracle->add_option("--kernel", okernel, "ground-truth kernel for kernel PSNR");
  oracle->add_option("--scale", oscale, "scale factor")->capture_default_str();
  oracle->add_option("--grid", ogrid, "grid points per latent axis")->capture_default_str();
  oracle->add_option("--out-dir", oout, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) return cmd_synth(hr_dir, synth_out, family, synth_scale, noise, synth_seed);
    if (*run) {
      std::optional<fs::path> hp, kp;
      if (hr_path) hp = *hr_path;
      if (kernel_path) kp = *kernel_path;
      return cmd_run(y_path, hp, kp, run_out, name, run_opts);
    }
    if (*bench) return cmd_bench(data_dir, bench_out, threads, bench_opts);
    if (*oracle) {
      std::optional<fs::path> kp;
      if (okernel) kp = *okernel;
      return cmd_oracle(oy, oxref, kp, oscale, ogrid, oout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
