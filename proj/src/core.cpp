#include "infraqa/core.hpp"

#include "infraqa/error.hpp"

#include <algorithm>
#include <numbers>
#include <set>

namespace infraqa {

std::string_view to_string(ObjectClass cls) {
  switch (cls) {
    case ObjectClass::pedestrian: return "pedestrian";
    case ObjectClass::bike: return "bike";
    case ObjectClass::car: return "car";
    case ObjectClass::truck: return "truck";
  }
  return "unknown";
}

std::optional<ObjectClass> parse_object_class(std::string_view name) {
  for (ObjectClass c : kAllClasses) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

namespace {

bool finite_box(const Box3D& b) {
  return b.center.allFinite() && std::isfinite(b.length) && std::isfinite(b.width) &&
         std::isfinite(b.height) && std::isfinite(b.yaw);
}

std::string_view role_name(FrameRole role) {
  switch (role) {
    case FrameRole::ground_truth: return "gt";
    case FrameRole::detections: return "pred";
    case FrameRole::tracks: return "tracks";
  }
  return "?";
}

}  // namespace

std::vector<Violation> validate_frames(const std::vector<FrameRecord>& frames, FrameRole role) {
  const std::string_view where = role_name(role);
  std::vector<Violation> out;
  auto report = [&](std::int64_t frame, std::string field, std::string message) {
    out.push_back({std::string(where), frame, std::move(field), std::move(message)});
  };

  std::optional<std::int64_t> previous;
  for (const FrameRecord& f : frames) {
    if (f.frame_index < 0) report(f.frame_index, "frame_index", "negative frame index");
    if (previous && f.frame_index <= *previous)
      report(f.frame_index, "frame_index", "frame indices not strictly increasing");
    previous = f.frame_index;

    std::set<std::int64_t> ids;
    for (const ObjectRecord& o : f.objects) {
      const Box3D& b = o.box;
      if (!finite_box(b)) report(f.frame_index, "box", "non-finite box field");
      if (!(b.length > 0.0)) report(f.frame_index, "box.length", "length must be positive");
      if (!(b.width > 0.0)) report(f.frame_index, "box.width", "width must be positive");
      if (!(b.height > 0.0)) report(f.frame_index, "box.height", "height must be positive");
      if (!(b.yaw > -std::numbers::pi && b.yaw <= std::numbers::pi))
        report(f.frame_index, "box.yaw", "yaw outside (-pi, pi]");
      if (role == FrameRole::ground_truth) {
        if (o.score) report(f.frame_index, "score", "ground truth carries a score");
      } else if (!o.score) {
        if (role == FrameRole::detections) report(f.frame_index, "score", "prediction without score");
      } else if (!(*o.score >= 0.0 && *o.score <= 1.0)) {
        report(f.frame_index, "score", "score outside [0, 1]");
      }
      if (o.track_id && !ids.insert(*o.track_id).second)
        report(f.frame_index, "track_id", "duplicate track_id " + std::to_string(*o.track_id));
    }
  }
  return out;
}

std::vector<Violation> validate_sequence(const SequenceRecord& seq) {
  std::vector<Violation> out = validate_frames(seq.gt_frames, FrameRole::ground_truth);
  std::vector<Violation> pred = validate_frames(seq.pred_frames, FrameRole::detections);
  out.insert(out.end(), pred.begin(), pred.end());

  std::set<std::int64_t> gt_idx, pred_idx;
  for (const auto& f : seq.gt_frames) gt_idx.insert(f.frame_index);
  for (const auto& f : seq.pred_frames) pred_idx.insert(f.frame_index);
  for (std::int64_t i : gt_idx)
    if (!pred_idx.contains(i)) out.push_back({"pred", i, "frame_index", "frame missing from predictions"});
  for (std::int64_t i : pred_idx)
    if (!gt_idx.contains(i)) out.push_back({"gt", i, "frame_index", "frame missing from ground truth"});
  return out;
}

void validate_sensor(const SensorSpec& spec) {
  auto fail = [&](const std::string& what) {
    throw ValidationError("sensor '" + spec.label + "': " + what);
  };
  auto fov_ok = [](double rad) { return rad > 0.0 && rad < 2.0 * std::numbers::pi; };
  if (spec.label.empty()) fail("empty label");
  if (!(spec.sample_rate_hz > 0.0)) fail("sample_rate_hz must be positive");
  if (!(spec.readout_ms >= 0.0)) fail("readout_ms must be non-negative");
  if (spec.registration) {
    if (!(spec.registration->e_trans_m >= 0.0) || !(spec.registration->e_rot_rad >= 0.0))
      fail("registration errors must be non-negative");
  }
  if (spec.kind() == SensorKind::camera) {
    const CameraParams& c = spec.camera();
    if (c.width_px <= 0 || c.height_px <= 0) fail("image size must be positive");
    if (!fov_ok(c.hfov_rad) || !fov_ok(c.vfov_rad)) fail("FOV must lie in (0, 360) deg");
  } else {
    const LidarParams& l = spec.lidar();
    if (l.vertical_layers <= 0) fail("vertical_layers must be positive");
    if (!fov_ok(l.hfov_rad) || !fov_ok(l.vfov_rad)) fail("FOV must lie in (0, 360) deg");
    if (!(l.hor_ang_res_rad > 0.0) || !(l.vert_ang_res_rad > 0.0))
      fail("angular resolutions must be positive");
    if (!(l.range_accuracy_m > 0.0)) fail("range_accuracy_m must be positive");
  }
}

std::string SetupId::sensor_name() const {
  switch (kind) {
    case SetupKind::camera_only: return camera_label.value_or("?");
    case SetupKind::lidar_only: return lidar_label.value_or("?");
    case SetupKind::combined: return camera_label.value_or("?") + "&" + lidar_label.value_or("?");
  }
  return "?";
}

std::string SetupId::to_string() const {
  return sensor_name() + "@" + std::to_string(machine_id);
}

SetupId parse_setup_name(std::string_view name, int machine_id,
                         const std::vector<SensorSpec>& sensors) {
  auto find = [&](std::string_view label) -> const SensorSpec& {
    auto it = std::find_if(sensors.begin(), sensors.end(),
                           [&](const SensorSpec& s) { return s.label == label; });
    if (it == sensors.end())
      throw ValidationError("unknown sensor label '" + std::string(label) + "'");
    return *it;
  };

  SetupId id;
  id.machine_id = machine_id;
  const auto amp = name.find('&');
  if (amp == std::string_view::npos) {
    const SensorSpec& s = find(name);
    if (s.kind() == SensorKind::camera) {
      id.kind = SetupKind::camera_only;
      id.camera_label = s.label;
    } else {
      id.kind = SetupKind::lidar_only;
      id.lidar_label = s.label;
    }
    return id;
  }
  const SensorSpec& a = find(name.substr(0, amp));
  const SensorSpec& b = find(name.substr(amp + 1));
  if (a.kind() != SensorKind::camera || b.kind() != SensorKind::lidar)
    throw ValidationError("combined setup must be written camera&lidar: '" + std::string(name) + "'");
  id.kind = SetupKind::combined;
  id.camera_label = a.label;
  id.lidar_label = b.label;
  return id;
}

}  // namespace infraqa
