#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dkp/config.hpp"
#include "dkp/error.hpp"
#include "dkp/io.hpp"
#include "dkp/report.hpp"
#include "oracles.hpp"

using namespace dkp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "dkp_unit_io";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Io, RawRoundTripIsLossless) {
  std::mt19937_64 rng(1);
  const Image img = dkp::testing::random_image(5, 7, 3, rng);
  io::save_raw(scratch("a.raw"), img);
  EXPECT_EQ(io::load_raw(scratch("a.raw")), img);
  std::ofstream(scratch("bad.raw")) << "NOTRAW";
  EXPECT_THROW(io::load_raw(scratch("bad.raw")), IoError);
  EXPECT_THROW(io::load_raw(scratch("missing.raw")), IoError);
}

TEST(Io, PngRoundTripQuantizes) {
  Image img(4, 6, 3);
  for (std::size_t i = 0; i < img.size(); ++i) img.values()[i] = static_cast<double>(i % 256) / 255.0;
  io::save_png(scratch("a.png"), img);
  const Image back = io::load_png(scratch("a.png"));
  ASSERT_TRUE(back.same_shape(img));
  for (std::size_t i = 0; i < img.size(); ++i) EXPECT_NEAR(back.values()[i], img.values()[i], 1e-12);
}

TEST(Io, FixturesLoadAsGray) {
  const Image cam = io::load_png(std::string(dkp::testing::fixture_dir()) + "/hr/camera.png");
  EXPECT_EQ(cam.channels(), 1);
  EXPECT_EQ(cam.height(), 128);
  EXPECT_EQ(cam.width(), 128);
}

TEST(Io, KernelTextRoundTripExact) {
  const Kernel k = gaussian_kernel({1.3, 0.4, 2.0}, 9);
  io::save_kernel_text(scratch("k.txt"), k);
  EXPECT_EQ(io::load_kernel_text(scratch("k.txt")), k);
  std::ofstream(scratch("k_bad.txt")) << "3\n0.1 0.2\n";
  EXPECT_THROW(io::load_kernel_text(scratch("k_bad.txt")), IoError);
}

TEST(Io, KernelNetCheckpointRoundTrip) {
  const KernelNetParams p = init_kernel_net(3, {6, 8, 9});
  io::save_kernel_net(scratch("net.bin"), p);
  EXPECT_EQ(io::load_kernel_net(scratch("net.bin")), p);
}

TEST(Config, ParsesCommentsAndOverrides) {
  const KeyValues kv = parse_key_values("# comment\nscale = 3\n\nrks.L=8  # trailing\npke.optimizer = langevin\n");
  RunConfig cfg;
  apply_key_values(cfg, kv);
  EXPECT_EQ(cfg.scale, 3);
  EXPECT_EQ(cfg.rks.num_samples, 8);
  EXPECT_EQ(cfg.pke.optimizer, PkeOptimizer::PlainLangevin);
  apply_overrides(cfg, {"restorer.init=nearest", "rks.family=motion", "net_dims=10,20,49"});
  EXPECT_EQ(cfg.restorer.init, UpsampleMode::Nearest);
  EXPECT_EQ(cfg.rks.family, KernelFamily::Motion);
  EXPECT_EQ(cfg.net_dims, (std::vector<int>{10, 20, 49}));
}

TEST(Config, DumpRoundTrips) {
  RunConfig cfg;
  cfg.iterations = 17;
  cfg.pke.adam_lr = 1.2345678901234e-5;
  cfg.rks.proposal = Proposal::Independent;
  cfg.restorer.halve_on_increase = false;
  RunConfig back;
  apply_key_values(back, parse_key_values(dump_config(cfg)));
  EXPECT_EQ(dump_config(back), dump_config(cfg));
  EXPECT_EQ(back.pke.adam_lr, cfg.pke.adam_lr);
}

TEST(Config, RejectsUnknownAndMalformed) {
  RunConfig cfg;
  EXPECT_THROW(apply_overrides(cfg, {"bogus=1"}), ParameterError);
  EXPECT_THROW(apply_overrides(cfg, {"scale=two"}), ParameterError);
  EXPECT_THROW(apply_overrides(cfg, {"scale"}), ParameterError);
  EXPECT_THROW(apply_overrides(cfg, {"pke.optimizer=sgd"}), ParameterError);
}

TEST(Report, CsvRowFormat) {
  MetricReport m{25.5, 0.75, 31.25, 1.5};
  EXPECT_EQ(report::csv_row("img", "gaussian", m), "img,gaussian,25.500000,0.750000,31.250000,1.500000");
  m.kernel_psnr = std::nan("");
  EXPECT_EQ(report::csv_row("img", "motion", m), "img,motion,25.500000,0.750000,nan,1.500000");
}

TEST(Report, TraceIsJsonLines) {
  IterationRecord rec;
  rec.t = 3;
  rec.data_loss = 0.5;
  rec.candidate_losses = {0.1, 0.2};
  rec.candidate_weights = {1.5, 0.5};
  rec.best_latent = GaussianLatent{1, 2, 0.5};
  rec.kernel_psnr = std::nan("");
  std::ostringstream out;
  report::write_trace_jsonl(out, {rec, rec});
  std::istringstream lines(out.str());
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j.at("t"), 3);
    EXPECT_EQ(j.at("candidate_weights").size(), 2u);
    ++n;
  }
  EXPECT_EQ(n, 2);
}
