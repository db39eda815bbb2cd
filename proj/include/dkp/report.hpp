#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "dkp/pipeline.hpp"

namespace dkp::report {

/// Fixed CSV columns, in order.
inline constexpr const char* kCsvHeader = "instance,family,image_psnr,ssim,kernel_psnr,runtime_seconds";

/// One CSV row; metrics use fixed 6-decimal formatting, "nan" when absent.
std::string csv_row(const std::string& instance, const std::string& family, const MetricReport& m);

void write_csv(const std::filesystem::path& path, const std::vector<BatchRow>& rows);

/// One JSON object per iteration (t, losses, grad norms, RKS candidate
/// losses/weights and best latent when traced, PSNRs when ground truth exists).
void write_trace_jsonl(std::ostream& out, const std::vector<IterationRecord>& history);
void write_trace_jsonl(const std::filesystem::path& path, const std::vector<IterationRecord>& history);

std::string latent_json(const KernelLatent& latent);

}  // namespace dkp::report
