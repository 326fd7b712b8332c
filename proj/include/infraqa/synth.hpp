#pragma once

#include "infraqa/core.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace infraqa {

/// Portable random stream: std::mt19937_64 (its output sequence is fixed by
/// the C++ standard) with explicit conversions, since the standard
/// distributions are implementation-defined.
///   uniform01: (next() >> 11) * 2^-53
///   normal:    Box-Muller, sqrt(-2 ln(1 - u1)) * cos(2 pi u2), one draw pair per value
class SynthRng {
 public:
  explicit SynthRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  double normal(double mean, double sigma);
  /// Integer in [0, n).
  int index(int n) { return static_cast<int>(uniform01() * n); }

 private:
  std::mt19937_64 engine_;
};

struct ScenarioConfig {
  int n_frames = 10;
  std::map<ObjectClass, int> objects_per_class{{ObjectClass::car, 1}};
  double max_speed_m_per_frame = 1.0;
  std::optional<Eigen::Vector2d> fixed_velocity;  // m/frame; overrides random velocities
  Eigen::Vector2d arena_min{-40.0, -40.0};
  Eigen::Vector2d arena_max{40.0, 40.0};
  double position_sigma_m = 0.0;
  double yaw_sigma_rad = 0.0;
  double dropout = 0.0;
  double false_positive_rate = 0.0;  // expected false positives per frame
  double id_switch = 0.0;            // per object and frame
  std::int64_t frame_period_us = 100000;
  std::uint64_t seed = 0;

  /// Throws ValidationError for probabilities outside [0, 1] or negative sigmas.
  void validate() const;
};

/// Nominal box dimensions (length, width, height) per class.
Eigen::Vector3d nominal_dimensions(ObjectClass cls);

/// Ground truth: constant-velocity tracks with ids 1..N, boxes resting on z = 0.
SequenceRecord generate_scenario(const ScenarioConfig& cfg);

struct CorruptionEntry {
  std::int64_t frame_index = 0;
  std::int64_t gt_track_id = 0;
  bool dropped = false;
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();
  double yaw_offset = 0.0;
  std::int64_t pred_track_id = 0;
};

struct FalsePositiveEntry {
  std::int64_t frame_index = 0;
  std::int64_t pred_track_id = 0;
};

struct CorruptionLog {
  std::vector<CorruptionEntry> entries;
  std::vector<FalsePositiveEntry> false_positives;

  std::size_t kept_count() const;
  std::size_t dropped_count() const;
};

struct CorruptedSequence {
  std::vector<FrameRecord> predictions;  // carry both scores and track ids
  CorruptionLog log;
};

/// Applies dropout, Gaussian position and yaw noise, id switches and false
/// positives (placed in the arena with IoU <= 0.1 against every gt box).
/// Uses a stream seeded from cfg.seed distinct from generate_scenario's.
CorruptedSequence corrupt_detections(std::span<const FrameRecord> gt_frames, const ScenarioConfig& cfg);

struct TimingModel {
  double base_detection_ms = 0.0;
  double base_tracking_ms = 0.0;
  double per_object_tracking_ms = 0.0;
};

/// t_tracking = base + per_object * n_objects, t_detection = base; frames
/// numbered from first_frame.
std::vector<TimingRecord> simulate_timing(const TimingModel& model, std::span<const int> objects_per_frame,
                                          std::int64_t first_frame = 0);

std::vector<int> objects_per_frame(std::span<const FrameRecord> frames);

}  // namespace infraqa
