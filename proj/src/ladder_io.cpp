#include "infraqa/error.hpp"
#include "infraqa/ladder.hpp"

#include <json.hpp>
#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

namespace infraqa {

namespace {

static_assert(sizeof(float) == 4);

template <typename T>
T to_little_endian(T value) {
  if constexpr (std::endian::native == std::endian::little) {
    return value;
  } else {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
}

std::filesystem::path sidecar_path(const std::filesystem::path& p) { return p.string() + ".json"; }
std::filesystem::path layers_path(const std::filesystem::path& p) { return p.string() + ".layers"; }

std::vector<char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("cannot open " + path.string());
  return std::vector<char>(std::istreambuf_iterator<char>(in), {});
}

void write_all(const std::filesystem::path& path, const void* data, std::size_t size) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!out) throw IoError("short write to " + path.string());
}

}  // namespace

PointCloud read_point_cloud(const std::filesystem::path& path) {
  const std::vector<char> raw = read_all(path);
  if (raw.size() % 16 != 0) throw ValidationError(path.string() + ": size is not a multiple of 16 bytes");
  const Eigen::Index n = static_cast<Eigen::Index>(raw.size() / 16);

  PointCloud cloud;
  cloud.points.resize(n, 4);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int c = 0; c < 4; ++c) {
      float v;
      std::memcpy(&v, raw.data() + (i * 4 + c) * 4, 4);
      cloud.points(i, c) = to_little_endian(v);
    }

  const auto side = sidecar_path(path);
  if (!std::filesystem::exists(side)) return cloud;
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_all(side));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(side.string() + ": " + e.what());
  }
  if (meta.value("num_points", n) != n)
    throw ValidationError(side.string() + ": num_points does not match the binary payload");
  if (meta.contains("num_layers") && !meta["num_layers"].is_null()) {
    cloud.num_layers = meta["num_layers"].get<int>();
    const std::vector<char> ids = read_all(layers_path(path));
    if (ids.size() != static_cast<std::size_t>(n) * 2)
      throw ValidationError(layers_path(path).string() + ": wrong length");
    cloud.layer_ids.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      std::uint16_t v;
      std::memcpy(&v, ids.data() + i * 2, 2);
      cloud.layer_ids[i] = to_little_endian(v);
      if (cloud.layer_ids[i] >= cloud.num_layers)
        throw ValidationError(layers_path(path).string() + ": layer id out of range");
    }
  }
  return cloud;
}

void write_point_cloud(const std::filesystem::path& path, const PointCloud& cloud) {
  const Eigen::Index n = cloud.size();
  std::vector<float> buf(static_cast<std::size_t>(n) * 4);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int c = 0; c < 4; ++c) buf[i * 4 + c] = to_little_endian(cloud.points(i, c));
  write_all(path, buf.data(), buf.size() * sizeof(float));

  nlohmann::ordered_json meta;
  meta["format"] = "xyzi_f32le";
  meta["num_points"] = n;
  if (cloud.has_layers()) {
    std::vector<std::uint16_t> ids(cloud.layer_ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i)
      ids[i] = to_little_endian(static_cast<std::uint16_t>(cloud.layer_ids[i]));
    write_all(layers_path(path), ids.data(), ids.size() * 2);
    meta["num_layers"] = cloud.num_layers;
    meta["layer_ids"] = layers_path(path).filename().string();
  } else {
    meta["num_layers"] = nullptr;
  }
  const std::string text = meta.dump(2) + "\n";
  write_all(sidecar_path(path), text.data(), text.size());
}

RasterImage read_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str()))
    throw IoError("cannot read PNG " + path.string() + ": " + image.message);
  image.format = PNG_FORMAT_RGB;
  RasterImage img(static_cast<int>(image.width), static_cast<int>(image.height));
  if (!png_image_finish_read(&image, nullptr, img.pixels.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw IoError("cannot decode PNG " + path.string() + ": " + msg);
  }
  return img;
}

void write_png(const std::filesystem::path& path, const RasterImage& img) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, img.pixels.data(), 0, nullptr))
    throw IoError("cannot write PNG " + path.string() + ": " + image.message);
}

}  // namespace infraqa
