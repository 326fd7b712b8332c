#include "infraqa/ladder.hpp"

#include "infraqa/error.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace infraqa {

void CalibrationSet::validate() const {
  const Eigen::Matrix3d rrt = rotation * rotation.transpose();
  if (!rrt.allFinite() || (rrt - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-6)
    throw ValidationError("calibration rotation is not orthonormal");
  if (!translation.allFinite()) throw ValidationError("calibration translation is not finite");
  if (!intrinsics.allFinite() || std::abs(intrinsics.determinant()) < 1e-12)
    throw ValidationError("calibration intrinsics are singular");
}

Eigen::VectorXd elevations(const PointCloud& cloud) {
  const Eigen::MatrixXd xyz = cloud.points.leftCols<3>().cast<double>();
  const Eigen::ArrayXd ground = xyz.leftCols<2>().rowwise().norm().array();
  return ground.binaryExpr(xyz.col(2).array(), [](double g, double z) { return std::atan2(z, g); });
}

PointCloud assign_layers(const PointCloud& cloud, const SensorSpec& lidar) {
  if (lidar.kind() != SensorKind::lidar) throw ValidationError("assign_layers needs a lidar spec");
  PointCloud out = cloud;
  const Eigen::Index n = cloud.size();
  out.layer_ids.assign(n, 0);
  out.num_layers = 0;
  if (n == 0) {
    out.layer_ids.clear();
    return out;
  }

  const Eigen::VectorXd elev = elevations(cloud);
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return elev(a) < elev(b); });

  const double split_gap = lidar.lidar().vert_ang_res_rad / 2.0;
  std::vector<Eigen::Index> boundaries;  // positions k in `order` where a new layer starts
  for (Eigen::Index k = 1; k < n; ++k)
    if (elev(order[k]) - elev(order[k - 1]) > split_gap) boundaries.push_back(k);

  const std::size_t max_boundaries = static_cast<std::size_t>(std::max(0, lidar.lidar().vertical_layers - 1));
  if (boundaries.size() > max_boundaries) {
    std::stable_sort(boundaries.begin(), boundaries.end(), [&](auto a, auto b) {
      return elev(order[a]) - elev(order[a - 1]) > elev(order[b]) - elev(order[b - 1]);
    });
    boundaries.resize(max_boundaries);
    std::sort(boundaries.begin(), boundaries.end());
  }

  int layer = 0;
  std::size_t next = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (next < boundaries.size() && boundaries[next] == k) {
      ++layer;
      ++next;
    }
    out.layer_ids[order[k]] = layer;
  }
  out.num_layers = layer + 1;
  return out;
}

namespace {

PointCloud keep_points(const PointCloud& cloud, const std::vector<Eigen::Index>& rows,
                       const std::vector<int>& new_ids, int num_layers) {
  PointCloud out;
  out.points.resize(static_cast<Eigen::Index>(rows.size()), 4);
  for (std::size_t i = 0; i < rows.size(); ++i) out.points.row(static_cast<Eigen::Index>(i)) = cloud.points.row(rows[i]);
  out.layer_ids = new_ids;
  out.num_layers = num_layers;
  return out;
}

}  // namespace

PointCloud downsample_layers(const PointCloud& cloud, int source_layers, int target) {
  if (std::find(kLidarLadder.begin(), kLidarLadder.end(), target) == kLidarLadder.end())
    throw ValidationError("lidar target " + std::to_string(target) + " is not a ladder value");
  if (source_layers < target)
    throw ValidationError("source layers must be at least the target");
  const bool on_ladder =
      std::find(kLidarLadder.begin(), kLidarLadder.end(), source_layers) != kLidarLadder.end();
  if (!on_ladder && source_layers < kLidarLadder.front())
    throw ValidationError("source layer count " + std::to_string(source_layers) +
                          " is neither above 256 nor a ladder value");
  if (!cloud.has_layers() && cloud.size() > 0)
    throw ValidationError("downsample_layers needs layer ids (run assign_layers first)");

  // Old layer id -> new layer id (or -1 when dropped).
  std::vector<int> mapping(static_cast<std::size_t>(source_layers));
  std::iota(mapping.begin(), mapping.end(), 0);
  int current = source_layers;
  while (current > target) {
    if (current > kLidarLadder.front()) {
      for (int& m : mapping)
        if (m >= kLidarLadder.front()) m = -1;
      current = kLidarLadder.front();
    } else {
      for (int& m : mapping)
        if (m >= 0) m = (m % 2 == 0) ? m / 2 : -1;
      current /= 2;
    }
  }

  std::vector<Eigen::Index> rows;
  std::vector<int> ids;
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    const int id = cloud.layer_ids[i];
    if (id < 0 || id >= source_layers) throw ValidationError("layer id outside [0, source_layers)");
    if (mapping[id] >= 0) {
      rows.push_back(i);
      ids.push_back(mapping[id]);
    }
  }
  return keep_points(cloud, rows, ids, target);
}

namespace {

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

double lanczos(double x, int a) {
  if (std::abs(x) >= a) return 0.0;
  return sinc(x) * sinc(x / a);
}

struct Taps {
  int first = 0;
  std::vector<double> weights;
};

// Antialiased Lanczos taps: the kernel is stretched by the downscale factor.
std::vector<Taps> make_taps(int in_size, int out_size, int radius) {
  const double scale = static_cast<double>(in_size) / out_size;
  const double filter_scale = std::max(scale, 1.0);
  const double support = radius * filter_scale;
  std::vector<Taps> taps(out_size);
  for (int o = 0; o < out_size; ++o) {
    const double center = (o + 0.5) * scale;
    const int lo = std::max(0, static_cast<int>(std::floor(center - support + 0.5)));
    const int hi = std::min(in_size, static_cast<int>(std::floor(center + support + 0.5)));
    Taps& t = taps[o];
    t.first = lo;
    double total = 0.0;
    for (int i = lo; i < hi; ++i) {
      const double w = lanczos((i + 0.5 - center) / filter_scale, radius);
      t.weights.push_back(w);
      total += w;
    }
    if (total != 0.0)
      for (double& w : t.weights) w /= total;
  }
  return taps;
}

}  // namespace

RasterImage lanczos_resize(const RasterImage& img, int out_width, int out_height, int radius) {
  const auto htaps = make_taps(img.width, out_width, radius);
  const auto vtaps = make_taps(img.height, out_height, radius);

  // Horizontal pass into a floating-point buffer, then vertical pass.
  std::vector<double> mid(static_cast<std::size_t>(out_width) * img.height * 3, 0.0);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < out_width; ++x) {
      const Taps& t = htaps[x];
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < t.weights.size(); ++k)
          acc += t.weights[k] * img.at(t.first + static_cast<int>(k), y, c);
        mid[(static_cast<std::size_t>(y) * out_width + x) * 3 + c] = acc;
      }
    }

  RasterImage out(out_width, out_height);
  for (int y = 0; y < out_height; ++y) {
    const Taps& t = vtaps[y];
    for (int x = 0; x < out_width; ++x)
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < t.weights.size(); ++k)
          acc += t.weights[k] * mid[(static_cast<std::size_t>(t.first + k) * out_width + x) * 3 + c];
        out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(acc), 0L, 255L));
      }
  }
  return out;
}

RasterImage resample_image(const RasterImage& img, int target_height) {
  if (std::find(kCameraLadder.begin(), kCameraLadder.end(), target_height) == kCameraLadder.end())
    throw ValidationError("camera target " + std::to_string(target_height) + " is not a ladder value");
  if (img.width != kCameraSourceWidth || img.height != kCameraSourceHeight)
    throw ValidationError("camera source must be 1920x1080");
  const int target_width = target_height * 16 / 9;

  if (target_height == kCameraSourceHeight) return img;
  if (target_height > kCameraSourceHeight) {
    const int factor = target_height / kCameraSourceHeight;
    RasterImage out(target_width, target_height);
    for (int y = 0; y < target_height; ++y)
      for (int x = 0; x < target_width; ++x)
        for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(x / factor, y / factor, c);
    return out;
  }
  return lanczos_resize(img, target_width, target_height);
}

PointCloud crop_to_camera_fov(const PointCloud& cloud, const CalibrationSet& calib, int image_width,
                              int image_height) {
  calib.validate();
  const Eigen::Matrix3Xd xyz = cloud.points.leftCols<3>().cast<double>().transpose();
  const Eigen::Matrix3Xd cam = (calib.rotation * xyz).colwise() + calib.translation;
  const Eigen::Matrix3Xd proj = calib.intrinsics * cam;

  std::vector<Eigen::Index> rows;
  std::vector<int> ids;
  for (Eigen::Index i = 0; i < cam.cols(); ++i) {
    const double depth = cam(2, i);
    if (!(depth > 0.0)) continue;
    const double u = proj(0, i) / proj(2, i);
    const double v = proj(1, i) / proj(2, i);
    if (u < 0.0 || v < 0.0 || u >= image_width || v >= image_height) continue;
    rows.push_back(i);
    if (cloud.has_layers()) ids.push_back(cloud.layer_ids[i]);
  }
  return keep_points(cloud, rows, ids, cloud.num_layers);
}

}  // namespace infraqa
