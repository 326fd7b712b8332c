#pragma once

#include "infraqa/core.hpp"
#include "infraqa/sensor_model.hpp"
#include "infraqa/tracking_metrics.hpp"

#include <Eigen/Core>

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace infraqa {

/// Sensor setups (cameras, then lidars, then camera-major combinations), each
/// crossed with machines in ascending machine_id order.
std::vector<SetupId> enumerate_setups(std::span<const std::string> cameras,
                                      std::span<const std::string> lidars, std::vector<int> machine_ids);
std::vector<SetupId> enumerate_setups(std::span<const SensorSpec> sensors,
                                      std::span<const MachineProfile> machines);

/// Number of sensor setups for i cameras and j lidars: i + j + i*j.
constexpr int sensor_combination_count(int cameras, int lidars) { return cameras + lidars + cameras * lidars; }

enum class FusionPolicy { parallel, serial };

struct LatencyBreakdown {
  double t_sensor_readout_ms = 0.0;
  double t_detection_ms = 0.0;
  double t_tracking_ms = 0.0;
  double total_ms = 0.0;
  double latency_norm = 0.0;
};

double latency_norm(double total_ms, const EvalConstants& consts);

/// Mean per-frame readout + detection + tracking for a single-sensor setup.
LatencyBreakdown total_latency(std::span<const TimingRecord> timings, double readout_ms,
                               const EvalConstants& consts);

/// One frame of a combined setup: each sensor's detection time plus the fused
/// tracking time.
struct CombinedFrameTiming {
  double camera_detection_ms = 0.0;
  double lidar_detection_ms = 0.0;
  double fused_tracking_ms = 0.0;
};

/// Parallel policy takes the slower sensor branch (readout + detection),
/// serial adds both; fused tracking is added either way.
LatencyBreakdown combined_latency(std::span<const CombinedFrameTiming> frames, double camera_readout_ms,
                                  double lidar_readout_ms, FusionPolicy policy, const EvalConstants& consts);

struct ReliabilityBreakdown {
  double var_r1 = 0.0;
  double var_r2 = 0.0;
  double var_r3 = 0.0;
  double var_r4 = 0.0;
  double cov_r1_r2 = 0.0;
  double cov_r1_r3 = 0.0;
  double raw = 0.0;
  double reliability_norm = 0.0;
};

/// Population variance.
double variance(const Eigen::Ref<const Eigen::VectorXd>& x);
/// Population covariance.
double covariance(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y);

/// Raw reliability from per-frame series: objects per frame, detection
/// accuracy, tracking time (ms) and detection time (ms).
ReliabilityBreakdown reliability_raw(const Eigen::Ref<const Eigen::VectorXd>& r1,
                                     const Eigen::Ref<const Eigen::VectorXd>& r2,
                                     const Eigen::Ref<const Eigen::VectorXd>& r3,
                                     const Eigen::Ref<const Eigen::VectorXd>& r4);

/// Min-max normalization over a batch: minimum raw maps to 1, maximum to 0.
/// A batch without spread maps entirely to 1.
Eigen::VectorXd reliability_norm_batch(const Eigen::Ref<const Eigen::VectorXd>& raws);

/// Quality vector with magnitude sqrt(sum w_k q_k^2); weights in [0, 1].
QualityVector build_quality_vector(double a_norm, double l_norm, double r_norm,
                                   const Eigen::Vector3d& weights = Eigen::Vector3d::Ones());

struct SetupResult {
  SetupId setup;
  AccuracyBreakdown accuracy;
  LatencyBreakdown latency;
  ReliabilityBreakdown reliability;
  QualityVector q;
};

/// Result files for one recorded sequence of a setup. `tracks` may be empty
/// when `detections` already carry track ids.
struct SequenceInputs {
  std::vector<FrameRecord> gt;
  std::vector<FrameRecord> detections;
  std::vector<FrameRecord> tracks;
  std::vector<TimingRecord> timing;
};

/// How a combined setup obtains its accuracy: from fused result files, or by
/// composing its two single-sensor setups. Fused timing is needed either way.
enum class CombineMode { measured, compose };

struct SetupInputs {
  CombineMode mode = CombineMode::measured;
  std::vector<SequenceInputs> sequences;
};

struct PipelineSettings {
  EvalConstants constants;
  ErrorModels error_models;
  FusionPolicy fusion = FusionPolicy::parallel;
  Eigen::Vector3d weights = Eigen::Vector3d::Ones();
  HotaOptions hota;
  std::size_t threads = 1;
};

/// Supplies the inputs of one setup; throws MissingInputError when absent.
using InputLoader = std::function<SetupInputs(const SetupId&)>;

/// Two-phase evaluation: per-setup accuracy, latency and raw reliability in
/// parallel, then batch reliability normalization. Results follow the
/// enumeration order regardless of thread count.
std::vector<SetupResult> evaluate_setups(std::span<const SensorSpec> sensors,
                                         std::span<const MachineProfile> machines,
                                         const PipelineSettings& settings, const InputLoader& loader);

}  // namespace infraqa
