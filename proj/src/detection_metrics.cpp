#include "infraqa/detection_metrics.hpp"

#include "infraqa/error.hpp"
#include "infraqa/geometry.hpp"

#include <algorithm>
#include <numeric>

namespace infraqa {

FrameMatch match_frame(std::span<const ObjectRecord> preds, std::span<const ObjectRecord> gts,
                       double iou_threshold) {
  std::vector<int> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return preds[a].score.value_or(0.0) > preds[b].score.value_or(0.0);
  });

  FrameMatch out;
  std::vector<char> gt_taken(gts.size(), 0);
  for (int p : order) {
    int best = -1;
    double best_iou = iou_threshold;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (gt_taken[g] || gts[g].cls != preds[p].cls) continue;
      const double iou = iou_3d(preds[p].box, gts[g].box);
      if (iou >= best_iou && (best < 0 || iou > best_iou)) {
        best = static_cast<int>(g);
        best_iou = iou;
      }
    }
    if (best >= 0) {
      gt_taken[best] = 1;
      out.matches.emplace_back(p, best);
    } else {
      out.false_positives.push_back(p);
    }
  }
  for (std::size_t g = 0; g < gts.size(); ++g)
    if (!gt_taken[g]) out.false_negatives.push_back(static_cast<int>(g));
  return out;
}

std::optional<double> average_precision(std::span<const RankedDetection> detections, int n_gt) {
  if (n_gt <= 0) return std::nullopt;
  std::vector<RankedDetection> ranked(detections.begin(), detections.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedDetection& a, const RankedDetection& b) { return a.score > b.score; });

  // Precision envelope from the tail: best precision at any recall >= current.
  const std::size_t n = ranked.size();
  std::vector<double> recall(n), precision(n);
  int tp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (ranked[k].true_positive) ++tp;
    recall[k] = static_cast<double>(tp) / n_gt;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
  }
  for (std::size_t k = n; k-- > 1;) precision[k - 1] = std::max(precision[k - 1], precision[k]);

  double sum = 0.0;
  std::size_t cursor = 0;
  for (int r = 1; r <= kRecallPoints; ++r) {
    const double threshold = static_cast<double>(r) / kRecallPoints;
    while (cursor < n && recall[cursor] < threshold) ++cursor;
    if (cursor == n) break;
    sum += precision[cursor];
  }
  return sum / kRecallPoints;
}

namespace {

struct PooledCounts {
  int tp = 0;
  int fp = 0;
  int fn = 0;
};

template <typename OnMatch>
PooledCounts match_by_class(const FrameRecord& gt, const FrameRecord& pred, double iou_threshold,
                            OnMatch&& on_class) {
  PooledCounts counts;
  for (ObjectClass cls : kAllClasses) {
    std::vector<ObjectRecord> p, g;
    for (const auto& o : pred.objects)
      if (o.cls == cls) p.push_back(o);
    for (const auto& o : gt.objects)
      if (o.cls == cls) g.push_back(o);
    if (p.empty() && g.empty()) continue;
    const FrameMatch m = match_frame(p, g, iou_threshold);
    counts.tp += static_cast<int>(m.matches.size());
    counts.fp += static_cast<int>(m.false_positives.size());
    counts.fn += static_cast<int>(m.false_negatives.size());
    on_class(cls, p, g, m);
  }
  return counts;
}

double jaccard(const PooledCounts& c) {
  const int denom = c.tp + c.fp + c.fn;
  if (denom == 0) return 1.0;
  return static_cast<double>(c.tp) / denom;
}

}  // namespace

double per_frame_ad(const FrameRecord& gt, const FrameRecord& pred, double iou_threshold) {
  return jaccard(match_by_class(gt, pred, iou_threshold, [](auto&&...) {}));
}

void DetectionEvaluator::add_frame(const FrameRecord& gt, const FrameRecord& pred) {
  const PooledCounts counts = match_by_class(
      gt, pred, iou_threshold_,
      [&](ObjectClass cls, const std::vector<ObjectRecord>& p, const std::vector<ObjectRecord>& g,
          const FrameMatch& m) {
        auto& list = ranked_[cls];
        for (const auto& [pi, gi] : m.matches) list.push_back({p[pi].score.value_or(0.0), true});
        for (int pi : m.false_positives) list.push_back({p[pi].score.value_or(0.0), false});
        n_gt_[cls] += static_cast<int>(g.size());
      });
  per_frame_.emplace_back(gt.frame_index, jaccard(counts));
}

void DetectionEvaluator::add_sequence(std::span<const FrameRecord> gt_frames,
                                      std::span<const FrameRecord> pred_frames) {
  std::map<std::int64_t, const FrameRecord*> gt_by_index, pred_by_index;
  for (const auto& f : gt_frames) gt_by_index[f.frame_index] = &f;
  for (const auto& f : pred_frames) pred_by_index[f.frame_index] = &f;
  std::map<std::int64_t, std::pair<const FrameRecord*, const FrameRecord*>> joined;
  for (const auto& [i, f] : gt_by_index) joined[i].first = f;
  for (const auto& [i, f] : pred_by_index) joined[i].second = f;
  for (const auto& [i, pair] : joined) {
    FrameRecord empty;
    empty.frame_index = i;
    add_frame(pair.first ? *pair.first : empty, pair.second ? *pair.second : empty);
  }
}

APResult DetectionEvaluator::result() const {
  APResult out;
  double sum = 0.0;
  for (const auto& [cls, count] : n_gt_) {
    if (count <= 0) continue;
    auto it = ranked_.find(cls);
    const std::span<const RankedDetection> dets =
        it == ranked_.end() ? std::span<const RankedDetection>{} : std::span<const RankedDetection>(it->second);
    const double ap = *average_precision(dets, count);
    out.per_class_ap[cls] = ap;
    sum += ap;
  }
  if (out.per_class_ap.empty()) throw ValidationError("no evaluable classes");
  out.map_value = sum / static_cast<double>(out.per_class_ap.size());
  out.per_frame_ad = per_frame_;
  return out;
}

APResult map_at_05(std::span<const FrameRecord> gt_frames, std::span<const FrameRecord> pred_frames) {
  DetectionEvaluator eval(kDetectionIouThreshold);
  eval.add_sequence(gt_frames, pred_frames);
  return eval.result();
}

}  // namespace infraqa
