#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace infraqa {

template <typename Scalar>
constexpr Scalar deg_to_rad(Scalar deg) {
  return deg * std::numbers::pi_v<Scalar> / Scalar(180);
}

template <typename Scalar>
constexpr Scalar rad_to_deg(Scalar rad) {
  return rad * Scalar(180) / std::numbers::pi_v<Scalar>;
}

/// Wraps an angle into (-pi, pi].
template <typename Scalar>
Scalar normalize_yaw(Scalar yaw) {
  constexpr Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  Scalar r = std::remainder(yaw, two_pi);  // [-pi, pi]
  if (r <= -std::numbers::pi_v<Scalar>) r += two_pi;
  return r;
}

/// Upright oriented box. Center is the volumetric center; +z is up and yaw
/// is measured counter-clockwise from +x.
template <typename Scalar>
struct Box3 {
  using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

  Vector3 center = Vector3::Zero();
  Scalar length = Scalar(1);  // along the heading
  Scalar width = Scalar(1);
  Scalar height = Scalar(1);
  Scalar yaw = Scalar(0);

  Scalar volume() const { return length * width * height; }
  Scalar bottom() const { return center.z() - height / Scalar(2); }
  Scalar top() const { return center.z() + height / Scalar(2); }

  bool operator==(const Box3&) const = default;
};

using Box3D = Box3<double>;

/// Ground-plane footprint of a box, one corner per column, counter-clockwise.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 4> bev_corners(const Box3<Scalar>& box) {
  const Scalar hl = box.length / Scalar(2);
  const Scalar hw = box.width / Scalar(2);
  Eigen::Matrix<Scalar, 2, 4> local;
  local << hl, hl, -hl, -hl,
          -hw, hw, hw, -hw;
  const Scalar c = std::cos(box.yaw);
  const Scalar s = std::sin(box.yaw);
  Eigen::Matrix<Scalar, 2, 2> rot;
  rot << c, -s, s, c;
  return (rot * local).colwise() + box.center.template head<2>();
}

enum class ObjectClass : std::uint8_t { pedestrian, bike, car, truck };

inline constexpr ObjectClass kAllClasses[] = {ObjectClass::pedestrian, ObjectClass::bike,
                                              ObjectClass::car, ObjectClass::truck};

std::string_view to_string(ObjectClass cls);
/// Parses one of the four reduced class names; nullopt otherwise.
std::optional<ObjectClass> parse_object_class(std::string_view name);

struct ObjectRecord {
  ObjectClass cls = ObjectClass::car;
  Box3D box;
  std::optional<double> score;        // predictions only
  std::optional<std::int64_t> track_id;  // tracking results only

  bool operator==(const ObjectRecord&) const = default;
};

struct FrameRecord {
  std::int64_t frame_index = 0;
  std::int64_t timestamp_us = 0;
  std::vector<ObjectRecord> objects;

  bool operator==(const FrameRecord&) const = default;
};

struct SequenceRecord {
  std::string sequence_id;
  std::vector<FrameRecord> gt_frames;
  std::vector<FrameRecord> pred_frames;
};

struct Violation {
  std::string where;  // "gt" or "pred"
  std::int64_t frame_index = 0;
  std::string field;
  std::string message;
};

/// Checks every record invariant. An empty result means the sequence is valid.
std::vector<Violation> validate_sequence(const SequenceRecord& seq);

/// Which producer a frame list came from; decides the score rule.
enum class FrameRole : std::uint8_t {
  ground_truth,  // no scores
  detections,    // scores required
  tracks,        // scores optional
};

/// Single-stream check for one list of frames.
std::vector<Violation> validate_frames(const std::vector<FrameRecord>& frames, FrameRole role);

enum class SensorKind : std::uint8_t { camera, lidar };

struct CameraParams {
  int width_px = 1920;
  int height_px = 1080;
  double hfov_rad = 0.0;
  double vfov_rad = 0.0;
};

struct LidarParams {
  int vertical_layers = 0;
  double hfov_rad = 0.0;
  double vfov_rad = 0.0;
  double hor_ang_res_rad = 0.0;
  double vert_ang_res_rad = 0.0;
  double range_accuracy_m = 0.0;
};

struct Registration {
  double e_trans_m = 0.0;
  double e_rot_rad = 0.0;
};

/// Physical description of one configured sensor. All angles in radians.
struct SensorSpec {
  std::string label;
  double sample_rate_hz = 10.0;
  std::variant<CameraParams, LidarParams> params;
  std::optional<Registration> registration;  // falls back to per-kind defaults
  double readout_ms = 0.0;

  SensorKind kind() const {
    return std::holds_alternative<CameraParams>(params) ? SensorKind::camera : SensorKind::lidar;
  }
  const CameraParams& camera() const { return std::get<CameraParams>(params); }
  const LidarParams& lidar() const { return std::get<LidarParams>(params); }
};

/// Throws ValidationError when a physical field is non-positive or a FOV leaves (0, 360) deg.
void validate_sensor(const SensorSpec& spec);

struct MachineProfile {
  int machine_id = 0;
  std::string gpu_desc;
  std::string cpu_desc;
};

struct TimingRecord {
  std::int64_t frame_index = 0;
  double t_detection_ms = 0.0;
  double t_tracking_ms = 0.0;

  bool operator==(const TimingRecord&) const = default;
};

enum class SetupKind : std::uint8_t { camera_only, lidar_only, combined };

struct SetupId {
  SetupKind kind = SetupKind::camera_only;
  std::optional<std::string> camera_label;
  std::optional<std::string> lidar_label;
  int machine_id = 0;

  /// Sensor part only, e.g. "C540", "L32" or "C540&L32".
  std::string sensor_name() const;
  /// Sensor name plus machine, e.g. "C540@1".
  std::string to_string() const;

  bool operator==(const SetupId&) const = default;
};

/// Parses a sensor-setup name ("C540", "L32", "C540&L32") given the known labels.
SetupId parse_setup_name(std::string_view name, int machine_id,
                         const std::vector<SensorSpec>& sensors);

struct QualityVector {
  double accuracy_norm = 0.0;
  double latency_norm = 0.0;
  double reliability_norm = 0.0;
  double magnitude = 0.0;

  Eigen::Vector3d components() const { return {accuracy_norm, latency_norm, reliability_norm}; }
};

}  // namespace infraqa
