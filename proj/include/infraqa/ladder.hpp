#pragma once

#include "infraqa/core.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace infraqa {

inline constexpr std::array<int, 6> kLidarLadder = {256, 128, 64, 32, 16, 8};
inline constexpr std::array<int, 8> kCameraLadder = {2160, 1080, 720, 540, 360, 270, 180, 135};
inline constexpr int kCameraSourceWidth = 1920;
inline constexpr int kCameraSourceHeight = 1080;
inline constexpr int kLanczosRadius = 3;

/// Lidar sweep: one row per point holding x, y, z (m) and intensity.
struct PointCloud {
  using Points = Eigen::Matrix<float, Eigen::Dynamic, 4, Eigen::RowMajor>;

  Points points = Points(0, 4);
  std::vector<int> layer_ids;  // empty, or one entry per point with 0 = lowest beam
  int num_layers = 0;

  Eigen::Index size() const { return points.rows(); }
  bool has_layers() const { return !layer_ids.empty(); }
};

/// Interleaved 8-bit RGB image.
struct RasterImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, 3 bytes per pixel

  RasterImage() = default;
  RasterImage(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, 0) {}

  std::uint8_t& at(int x, int y, int c) { return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  std::uint8_t at(int x, int y, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
};

struct CalibrationSet {
  Eigen::Matrix3d intrinsics = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();  // lidar -> camera
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();   // meters

  /// Throws ValidationError if the rotation is not orthonormal within 1e-6
  /// or the intrinsics are singular.
  void validate() const;
};

/// Elevation angle atan2(z, hypot(x, y)) per point, in radians.
Eigen::VectorXd elevations(const PointCloud& cloud);

/// Groups points into beams by 1D clustering of elevation. A new layer starts
/// wherever consecutive sorted elevations differ by more than half the
/// vertical resolution; when that yields more layers than the sensor has,
/// only the widest gaps are kept as boundaries.
PointCloud assign_layers(const PointCloud& cloud, const SensorSpec& lidar);

/// Thins a layered cloud to `target` beams: beams above 256 are dropped from
/// the top, then every odd beam is removed per halving, so beam 0 always
/// survives. Output layer ids are re-indexed to [0, target).
PointCloud downsample_layers(const PointCloud& cloud, int source_layers, int target);

/// Resamples a 1920x1080 source to a camera ladder height at 16:9:
/// nearest-neighbour doubling for 2160, Lanczos-3 for smaller targets.
RasterImage resample_image(const RasterImage& img, int target_height);

/// Separable Lanczos resampling to an arbitrary size; output clamped to [0, 255].
RasterImage lanczos_resize(const RasterImage& img, int out_width, int out_height, int radius = kLanczosRadius);

/// Keeps points in front of the camera whose projection lands inside the image.
PointCloud crop_to_camera_fov(const PointCloud& cloud, const CalibrationSet& calib, int image_width,
                              int image_height);

// File formats: little-endian float32 x,y,z,intensity quadruples plus a JSON
// sidecar "<file>.json"; layer ids, when present, in "<file>.layers" as
// little-endian uint16.
PointCloud read_point_cloud(const std::filesystem::path& path);
void write_point_cloud(const std::filesystem::path& path, const PointCloud& cloud);

RasterImage read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const RasterImage& img);

}  // namespace infraqa
