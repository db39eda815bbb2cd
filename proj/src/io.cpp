#include "dkp/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "dkp/error.hpp"

namespace dkp::io {

namespace {

constexpr char kRawMagic[8] = {'D', 'K', 'P', 'I', 'M', 'G', '0', '1'};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

// RAII holder for the simplified libpng API.
struct PngImage {
  png_image img;
  PngImage() {
    std::memset(&img, 0, sizeof(img));
    img.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&img); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

}  // namespace

Image load_png(const std::filesystem::path& path) {
  PngImage png;
  if (!png_image_begin_read_from_file(&png.img, path.string().c_str())) {
    throw IoError("cannot read PNG " + path.string() + ": " + png.img.message);
  }
  const bool color = (png.img.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.img.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int channels = color ? 3 : 1;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(png.img));
  if (!png_image_finish_read(&png.img, nullptr, buf.data(), 0, nullptr)) {
    throw IoError("cannot decode PNG " + path.string() + ": " + png.img.message);
  }
  const int h = static_cast<int>(png.img.height), w = static_cast<int>(png.img.width);
  Image out(h, w, channels);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      for (int ch = 0; ch < channels; ++ch)
        out.at(ch, r, c) = buf[(static_cast<std::size_t>(r) * w + c) * channels + ch] / 255.0;
  return out;
}

void save_png(const std::filesystem::path& path, const Image& img) {
  PngImage png;
  png.img.width = static_cast<png_uint_32>(img.width());
  png.img.height = static_cast<png_uint_32>(img.height());
  png.img.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int ch = img.channels();
  std::vector<std::uint8_t> buf(static_cast<std::size_t>(img.height()) * img.width() * ch);
  for (int r = 0; r < img.height(); ++r)
    for (int c = 0; c < img.width(); ++c)
      for (int k = 0; k < ch; ++k) {
        const double v = std::clamp(img.at(k, r, c), 0.0, 1.0);
        buf[(static_cast<std::size_t>(r) * img.width() + c) * ch + k] =
            static_cast<std::uint8_t>(std::lround(v * 255.0));
      }
  if (!png_image_write_to_file(&png.img, path.string().c_str(), 0, buf.data(), 0, nullptr)) {
    throw IoError("cannot write PNG " + path.string() + ": " + png.img.message);
  }
}

Image load_raw(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  constexpr std::size_t header = sizeof(kRawMagic) + 3 * sizeof(std::int32_t);
  if (bytes.size() < header || std::memcmp(bytes.data(), kRawMagic, sizeof(kRawMagic)) != 0) {
    throw IoError(path.string() + " is not a raw planar image");
  }
  std::int32_t dims[3];
  std::memcpy(dims, bytes.data() + sizeof(kRawMagic), sizeof(dims));
  Image img(dims[0], dims[1], dims[2]);
  if (bytes.size() != header + img.size() * sizeof(double)) {
    throw IoError(path.string() + ": payload size does not match header");
  }
  std::memcpy(img.values().data(), bytes.data() + header, img.size() * sizeof(double));
  return img;
}

void save_raw(const std::filesystem::path& path, const Image& img) {
  std::string bytes(kRawMagic, sizeof(kRawMagic));
  const std::int32_t dims[3] = {img.height(), img.width(), img.channels()};
  bytes.append(reinterpret_cast<const char*>(dims), sizeof(dims));
  bytes.append(reinterpret_cast<const char*>(img.values().data()), img.size() * sizeof(double));
  write_file(path, bytes);
}

Kernel load_kernel_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  int side = 0;
  if (!(in >> side) || side < 1 || side % 2 == 0) throw IoError(path.string() + ": bad kernel side");
  Kernel k(side);
  for (double& v : k.values()) {
    if (!(in >> v)) throw IoError(path.string() + ": kernel grid truncated");
  }
  return k;
}

void save_kernel_text(const std::filesystem::path& path, const Kernel& k) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << k.side() << '\n' << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (int r = 0; r < k.side(); ++r) {
    for (int c = 0; c < k.side(); ++c) out << (c ? " " : "") << k.at(r, c);
    out << '\n';
  }
}

void save_kernel_png(const std::filesystem::path& path, const Kernel& k, int zoom) {
  zoom = std::max(zoom, 1);
  const auto v = k.values();
  const double mx = *std::max_element(v.begin(), v.end());
  Image img(k.side() * zoom, k.side() * zoom, 1);
  for (int r = 0; r < img.height(); ++r)
    for (int c = 0; c < img.width(); ++c)
      img.at(0, r, c) = mx > 0.0 ? k.at(r / zoom, c / zoom) / mx : 0.0;
  save_png(path, img);
}

void save_kernel_net(const std::filesystem::path& path, const KernelNetParams& params) {
  write_file(path, serialize(params));
}

KernelNetParams load_kernel_net(const std::filesystem::path& path) {
  return deserialize_kernel_net(read_file(path));
}

}  // namespace dkp::io
