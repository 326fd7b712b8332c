#pragma once

#include "infraqa/core.hpp"

#include <array>
#include <map>
#include <span>
#include <vector>

namespace infraqa {

inline constexpr int kAlphaCount = 19;

/// Localization thresholds 0.05, 0.10, ..., 0.95.
std::array<double, kAlphaCount> hota_alphas();

/// Pairs with similarity >= alpha - kAlphaSlack are admissible at alpha.
inline constexpr double kAlphaSlack = 1e-12;

struct AlphaScore {
  double alpha = 0.0;
  double det_a = 0.0;
  double ass_a = 0.0;
  double hota = 0.0;
};

struct HotaResult {
  double hota = 0.0;
  double det_a = 0.0;
  double ass_a = 0.0;
  std::vector<AlphaScore> per_alpha;
};

/// Raw per-alpha tallies; additive over sequences.
struct HotaCounts {
  std::array<long, kAlphaCount> tp{};
  std::array<long, kAlphaCount> fn{};
  std::array<long, kAlphaCount> fp{};
  std::array<double, kAlphaCount> ass_sum{};  // sum over TPs of the pair's association IoU

  HotaCounts& operator+=(const HotaCounts& other);
  HotaResult finalize() const;
};

struct HotaOptions {
  bool class_aware = true;
};

/// Counts for one sequence (optionally restricted to one class). Requires
/// track ids on every object; throws ValidationError("tracking ids required").
HotaCounts hota_counts(std::span<const FrameRecord> gt_frames, std::span<const FrameRecord> pred_frames,
                       std::optional<ObjectClass> only_class);

/// Multi-sequence HOTA. Class-aware mode averages over classes present in the
/// ground truth; the sqrt(DetA * AssA) identity then holds per class.
class HotaEvaluator {
 public:
  explicit HotaEvaluator(HotaOptions options = {}) : options_(options) {}

  void add_sequence(std::span<const FrameRecord> gt_frames, std::span<const FrameRecord> pred_frames);
  HotaResult result() const;
  const std::map<ObjectClass, HotaResult>& per_class() const { return per_class_cache_; }

 private:
  HotaOptions options_;
  std::map<ObjectClass, HotaCounts> by_class_;
  std::map<ObjectClass, long> gt_seen_;
  HotaCounts pooled_;
  long pooled_gt_ = 0;
  mutable std::map<ObjectClass, HotaResult> per_class_cache_;
};

HotaResult hota_3d(std::span<const FrameRecord> gt_frames, std::span<const FrameRecord> pred_frames,
                   HotaOptions options = {});

}  // namespace infraqa
