#include "infraqa/tracking_metrics.hpp"

#include "infraqa/assignment.hpp"
#include "infraqa/error.hpp"
#include "infraqa/geometry.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace infraqa {

std::array<double, kAlphaCount> hota_alphas() {
  std::array<double, kAlphaCount> a{};
  for (int k = 0; k < kAlphaCount; ++k) a[k] = static_cast<double>(k + 1) / 20.0;
  return a;
}

HotaCounts& HotaCounts::operator+=(const HotaCounts& other) {
  for (int k = 0; k < kAlphaCount; ++k) {
    tp[k] += other.tp[k];
    fn[k] += other.fn[k];
    fp[k] += other.fp[k];
    ass_sum[k] += other.ass_sum[k];
  }
  return *this;
}

HotaResult HotaCounts::finalize() const {
  const auto alphas = hota_alphas();
  HotaResult r;
  r.per_alpha.reserve(kAlphaCount);
  for (int k = 0; k < kAlphaCount; ++k) {
    AlphaScore s;
    s.alpha = alphas[k];
    s.det_a = static_cast<double>(tp[k]) / static_cast<double>(std::max(1L, tp[k] + fn[k] + fp[k]));
    s.ass_a = ass_sum[k] / static_cast<double>(std::max(1L, tp[k]));
    s.hota = std::sqrt(s.det_a * s.ass_a);
    r.hota += s.hota;
    r.det_a += s.det_a;
    r.ass_a += s.ass_a;
    r.per_alpha.push_back(s);
  }
  r.hota /= kAlphaCount;
  r.det_a /= kAlphaCount;
  r.ass_a /= kAlphaCount;
  return r;
}

namespace {

struct FrameView {
  std::vector<int> gt_ids;    // dense ids
  std::vector<int> pred_ids;  // dense ids
  Eigen::MatrixXd similarity;  // gt x pred
};

/// Maps sparse track ids to dense indices in first-seen order.
class IdTable {
 public:
  int operator()(std::int64_t id) {
    auto [it, inserted] = table_.try_emplace(id, static_cast<int>(table_.size()));
    return it->second;
  }
  int size() const { return static_cast<int>(table_.size()); }

 private:
  std::unordered_map<std::int64_t, int> table_;
};

std::vector<FrameView> build_views(std::span<const FrameRecord> gt_frames,
                                   std::span<const FrameRecord> pred_frames,
                                   std::optional<ObjectClass> only_class, IdTable& gt_table,
                                   IdTable& pred_table) {
  std::map<std::int64_t, std::pair<const FrameRecord*, const FrameRecord*>> joined;
  for (const auto& f : gt_frames) joined[f.frame_index].first = &f;
  for (const auto& f : pred_frames) joined[f.frame_index].second = &f;

  std::vector<FrameView> views;
  views.reserve(joined.size());
  for (const auto& [index, pair] : joined) {
    std::vector<Box3D> gt_boxes, pred_boxes;
    FrameView v;
    auto take = [&](const FrameRecord* f, std::vector<int>& ids, std::vector<Box3D>& boxes,
                    IdTable& table) {
      if (!f) return;
      for (const ObjectRecord& o : f->objects) {
        if (only_class && o.cls != *only_class) continue;
        if (!o.track_id) throw ValidationError("tracking ids required");
        ids.push_back(table(*o.track_id));
        boxes.push_back(o.box);
      }
    };
    take(pair.first, v.gt_ids, gt_boxes, gt_table);
    take(pair.second, v.pred_ids, pred_boxes, pred_table);
    v.similarity = iou_3d_matrix<double>(gt_boxes, pred_boxes);
    views.push_back(std::move(v));
  }
  return views;
}

}  // namespace

HotaCounts hota_counts(std::span<const FrameRecord> gt_frames, std::span<const FrameRecord> pred_frames,
                       std::optional<ObjectClass> only_class) {
  IdTable gt_table, pred_table;
  const std::vector<FrameView> views = build_views(gt_frames, pred_frames, only_class, gt_table, pred_table);
  const int n_gt_ids = gt_table.size();
  const int n_pred_ids = pred_table.size();

  // Pass 1: global alignment between every gt track and every predicted track.
  Eigen::MatrixXd potential = Eigen::MatrixXd::Zero(n_gt_ids, n_pred_ids);
  Eigen::VectorXd gt_count = Eigen::VectorXd::Zero(n_gt_ids);
  Eigen::RowVectorXd pred_count = Eigen::RowVectorXd::Zero(n_pred_ids);
  for (const FrameView& v : views) {
    for (int g : v.gt_ids) gt_count(g) += 1.0;
    for (int p : v.pred_ids) pred_count(p) += 1.0;
    if (v.gt_ids.empty() || v.pred_ids.empty()) continue;
    const Eigen::MatrixXd& s = v.similarity;
    const Eigen::MatrixXd denom =
        (s.rowwise().sum().replicate(1, s.cols()) + s.colwise().sum().replicate(s.rows(), 1)) - s;
    for (Eigen::Index i = 0; i < s.rows(); ++i)
      for (Eigen::Index j = 0; j < s.cols(); ++j)
        if (denom(i, j) > 0.0) potential(v.gt_ids[i], v.pred_ids[j]) += s(i, j) / denom(i, j);
  }
  const Eigen::MatrixXd global_alignment =
      (potential.array() /
       ((gt_count.replicate(1, n_pred_ids) + pred_count.replicate(n_gt_ids, 1)).array() - potential.array()))
          .matrix();

  // Pass 2: per-alpha bijective matching maximizing alignment-weighted similarity.
  const auto alphas = hota_alphas();
  HotaCounts counts;
  std::vector<Eigen::MatrixXd> matches(kAlphaCount, Eigen::MatrixXd::Zero(n_gt_ids, n_pred_ids));
  for (const FrameView& v : views) {
    const long n_g = static_cast<long>(v.gt_ids.size());
    const long n_p = static_cast<long>(v.pred_ids.size());
    if (n_g == 0 || n_p == 0) {
      for (int k = 0; k < kAlphaCount; ++k) {
        counts.fn[k] += n_g;
        counts.fp[k] += n_p;
      }
      continue;
    }
    Eigen::MatrixXd score(n_g, n_p);
    for (long i = 0; i < n_g; ++i)
      for (long j = 0; j < n_p; ++j)
        score(i, j) = global_alignment(v.gt_ids[i], v.pred_ids[j]) * v.similarity(i, j);

    for (int k = 0; k < kAlphaCount; ++k) {
      const Eigen::MatrixXd admissible =
          (v.similarity.array() >= alphas[k] - kAlphaSlack).select(score, 0.0);
      const Assignment a = optimal_assignment(-admissible);
      long tp = 0;
      for (long i = 0; i < n_g; ++i) {
        const int j = a.row_to_col[i];
        if (j < 0 || admissible(i, j) <= 0.0) continue;
        ++tp;
        matches[k](v.gt_ids[i], v.pred_ids[j]) += 1.0;
      }
      counts.tp[k] += tp;
      counts.fn[k] += n_g - tp;
      counts.fp[k] += n_p - tp;
    }
  }

  const Eigen::ArrayXXd id_union =
      (gt_count.replicate(1, n_pred_ids) + pred_count.replicate(n_gt_ids, 1)).array();
  for (int k = 0; k < kAlphaCount; ++k) {
    const Eigen::ArrayXXd m = matches[k].array();
    const Eigen::ArrayXXd ass = (m > 0.0).select(m / (id_union - m), 0.0);
    counts.ass_sum[k] = (m * ass).sum();
  }
  return counts;
}

void HotaEvaluator::add_sequence(std::span<const FrameRecord> gt_frames,
                                 std::span<const FrameRecord> pred_frames) {
  for (const auto& f : gt_frames)
    for (const auto& o : f.objects) {
      ++gt_seen_[o.cls];
      ++pooled_gt_;
    }
  if (!options_.class_aware) {
    pooled_ += hota_counts(gt_frames, pred_frames, std::nullopt);
    return;
  }
  for (ObjectClass cls : kAllClasses) by_class_[cls] += hota_counts(gt_frames, pred_frames, cls);
}

HotaResult HotaEvaluator::result() const {
  if (pooled_gt_ == 0) throw ValidationError("no evaluable classes");
  if (!options_.class_aware) return pooled_.finalize();

  per_class_cache_.clear();
  HotaResult mean;
  mean.per_alpha.resize(kAlphaCount);
  for (const auto& [cls, seen] : gt_seen_) {
    if (seen == 0) continue;
    const HotaResult r = by_class_.at(cls).finalize();
    per_class_cache_[cls] = r;
    mean.hota += r.hota;
    mean.det_a += r.det_a;
    mean.ass_a += r.ass_a;
    for (int k = 0; k < kAlphaCount; ++k) {
      mean.per_alpha[k].alpha = r.per_alpha[k].alpha;
      mean.per_alpha[k].det_a += r.per_alpha[k].det_a;
      mean.per_alpha[k].ass_a += r.per_alpha[k].ass_a;
      mean.per_alpha[k].hota += r.per_alpha[k].hota;
    }
  }
  const double n = static_cast<double>(per_class_cache_.size());
  mean.hota /= n;
  mean.det_a /= n;
  mean.ass_a /= n;
  for (auto& s : mean.per_alpha) {
    s.det_a /= n;
    s.ass_a /= n;
    s.hota /= n;
  }
  return mean;
}

HotaResult hota_3d(std::span<const FrameRecord> gt_frames, std::span<const FrameRecord> pred_frames,
                   HotaOptions options) {
  HotaEvaluator eval(options);
  eval.add_sequence(gt_frames, pred_frames);
  return eval.result();
}

}  // namespace infraqa
