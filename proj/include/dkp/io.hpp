#pragma once

#include <filesystem>

#include "dkp/image.hpp"
#include "dkp/kernel.hpp"
#include "dkp/kernelnet.hpp"

namespace dkp::io {

/// 8-bit grayscale or RGB PNG, values mapped to [0, 1]. Other PNG layouts
/// are converted by libpng (alpha dropped).
Image load_png(const std::filesystem::path& path);
/// Values are clamped to [0, 1] and rounded to 8 bits.
void save_png(const std::filesystem::path& path, const Image& img);

/// Lossless planar dump: "DKPIMG01", int32 height, width, channels, then
/// float64 values in Image storage order (little endian).
Image load_raw(const std::filesystem::path& path);
void save_raw(const std::filesystem::path& path, const Image& img);

/// Text grid: first line is the side, then `side` rows of whitespace
/// separated values printed with round-trip precision.
Kernel load_kernel_text(const std::filesystem::path& path);
void save_kernel_text(const std::filesystem::path& path, const Kernel& k);

/// Grayscale PNG of the kernel rescaled by 1 / max, optionally enlarged by
/// nearest-neighbor replication.
void save_kernel_png(const std::filesystem::path& path, const Kernel& k, int zoom = 1);

void save_kernel_net(const std::filesystem::path& path, const KernelNetParams& params);
KernelNetParams load_kernel_net(const std::filesystem::path& path);

}  // namespace dkp::io
