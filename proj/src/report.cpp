#include "dkp/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "dkp/error.hpp"

namespace dkp::report {

namespace {

std::string fixed6(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

nlohmann::json to_json(const KernelLatent& latent) {
  if (const auto* g = std::get_if<GaussianLatent>(&latent)) {
    return {{"family", "gaussian"}, {"sigma1", g->sigma1}, {"sigma2", g->sigma2}, {"theta", g->theta}};
  }
  const auto& m = std::get<MotionLatent>(latent);
  return {{"family", "motion"},
          {"seed", m.seed},
          {"length_scale", m.length_scale},
          {"wiggle", m.wiggle},
          {"num_steps", m.num_steps}};
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

}  // namespace

std::string csv_row(const std::string& instance, const std::string& family, const MetricReport& m) {
  return instance + "," + family + "," + fixed6(m.image_psnr) + "," + fixed6(m.ssim) + "," +
         fixed6(m.kernel_psnr) + "," + fixed6(m.runtime_seconds);
}

void write_csv(const std::filesystem::path& path, const std::vector<BatchRow>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << kCsvHeader << '\n';
  for (const auto& row : rows) out << csv_row(row.instance, row.family, row.result.report) << '\n';
}

void write_trace_jsonl(std::ostream& out, const std::vector<IterationRecord>& history) {
  for (const auto& rec : history) {
    nlohmann::json j = {
        {"t", rec.t},
        {"data_loss", number_or_null(rec.data_loss)},
        {"pke_data_loss", number_or_null(rec.pke_data_loss)},
        {"prior_loss", number_or_null(rec.prior_loss)},
        {"data_grad_norm", number_or_null(rec.data_grad_norm)},
        {"prior_grad_norm", number_or_null(rec.prior_grad_norm)},
        {"rolled_back", rec.rolled_back},
    };
    if (!rec.candidate_losses.empty()) {
      j["candidate_losses"] = rec.candidate_losses;
      j["candidate_weights"] = rec.candidate_weights;
    }
    if (rec.best_latent) j["best_latent"] = to_json(*rec.best_latent);
    if (std::isfinite(rec.kernel_psnr)) j["kernel_psnr"] = rec.kernel_psnr;
    if (std::isfinite(rec.image_psnr)) j["image_psnr"] = rec.image_psnr;
    out << j.dump() << '\n';
  }
}

void write_trace_jsonl(const std::filesystem::path& path, const std::vector<IterationRecord>& history) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_trace_jsonl(out, history);
}

std::string latent_json(const KernelLatent& latent) { return to_json(latent).dump(); }

}  // namespace dkp::report
