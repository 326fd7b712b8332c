#pragma once

#include "infraqa/core.hpp"

#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace infraqa {

inline constexpr double kDetectionIouThreshold = 0.5;
inline constexpr int kRecallPoints = 40;

struct FrameMatch {
  std::vector<std::pair<int, int>> matches;  // (pred index, gt index)
  std::vector<int> false_positives;          // pred indices
  std::vector<int> false_negatives;          // gt indices
};

/// Greedy one-to-one matching: predictions in descending score order each take
/// the unmatched same-class ground truth with the highest 3D IoU at or above
/// the threshold. Ties keep input order.
FrameMatch match_frame(std::span<const ObjectRecord> preds, std::span<const ObjectRecord> gts,
                       double iou_threshold = kDetectionIouThreshold);

struct RankedDetection {
  double score = 0.0;
  bool true_positive = false;
};

/// 40-point interpolated AP. Detections are ranked by descending score (stable).
/// Returns nullopt when n_gt is zero.
std::optional<double> average_precision(std::span<const RankedDetection> detections, int n_gt);

/// Within-frame Jaccard ratio TP / (TP + FP + FN), pooled over classes.
/// An empty frame on both sides scores 1.
double per_frame_ad(const FrameRecord& gt, const FrameRecord& pred,
                    double iou_threshold = kDetectionIouThreshold);

struct APResult {
  std::map<ObjectClass, double> per_class_ap;
  double map_value = 0.0;
  std::vector<std::pair<std::int64_t, double>> per_frame_ad;
};

/// Accumulates frames (possibly from several sequences) for a global-ranking mAP.
class DetectionEvaluator {
 public:
  explicit DetectionEvaluator(double iou_threshold = kDetectionIouThreshold)
      : iou_threshold_(iou_threshold) {}

  void add_frame(const FrameRecord& gt, const FrameRecord& pred);
  /// Pairs frames by frame_index; an index present on one side only counts
  /// against an empty frame on the other.
  void add_sequence(std::span<const FrameRecord> gt_frames, std::span<const FrameRecord> pred_frames);

  /// Throws ValidationError("no evaluable classes") if no ground truth was seen.
  APResult result() const;

 private:
  double iou_threshold_;
  std::map<ObjectClass, std::vector<RankedDetection>> ranked_;
  std::map<ObjectClass, int> n_gt_;
  std::vector<std::pair<std::int64_t, double>> per_frame_;
};

APResult map_at_05(std::span<const FrameRecord> gt_frames, std::span<const FrameRecord> pred_frames);

}  // namespace infraqa
