#include "infraqa/synth.hpp"

#include "infraqa/error.hpp"
#include "infraqa/geometry.hpp"

#include <cmath>
#include <numbers>

namespace infraqa {

double SynthRng::uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double SynthRng::normal(double mean, double sigma) {
  const double u1 = uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
  return mean + sigma * r * std::cos(2.0 * std::numbers::pi * u2);
}

void ScenarioConfig::validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (n_frames < 0) throw ValidationError("n_frames must be non-negative");
  if (!prob(dropout) || !prob(id_switch)) throw ValidationError("probabilities must lie in [0, 1]");
  if (!(false_positive_rate >= 0.0)) throw ValidationError("false_positive_rate must be non-negative");
  if (!(position_sigma_m >= 0.0) || !(yaw_sigma_rad >= 0.0)) throw ValidationError("sigmas must be non-negative");
  if (!(max_speed_m_per_frame >= 0.0)) throw ValidationError("max_speed must be non-negative");
  if (!((arena_max.array() > arena_min.array()).all())) throw ValidationError("arena must have positive extent");
  for (const auto& [cls, n] : objects_per_class)
    if (n < 0) throw ValidationError("object counts must be non-negative");
}

Eigen::Vector3d nominal_dimensions(ObjectClass cls) {
  switch (cls) {
    case ObjectClass::pedestrian: return {0.6, 0.6, 1.7};
    case ObjectClass::bike: return {1.8, 0.6, 1.5};
    case ObjectClass::car: return {4.5, 1.8, 1.5};
    case ObjectClass::truck: return {10.0, 2.5, 3.5};
  }
  return {1.0, 1.0, 1.0};
}

namespace {

// Distinct streams for ground truth and corruption, derived from one seed.
constexpr std::uint64_t kCorruptionStream = 0x9E3779B97F4A7C15ULL;

struct Track {
  ObjectClass cls;
  Box3D start;
  Eigen::Vector2d velocity;
};

}  // namespace

SequenceRecord generate_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  SynthRng rng(cfg.seed);
  std::vector<Track> tracks;
  for (ObjectClass cls : kAllClasses) {
    auto it = cfg.objects_per_class.find(cls);
    const int n = it == cfg.objects_per_class.end() ? 0 : it->second;
    for (int k = 0; k < n; ++k) {
      Track t{cls, {}, {}};
      const Eigen::Vector3d dims = nominal_dimensions(cls) * rng.uniform(0.9, 1.1);
      t.start.length = dims.x();
      t.start.width = dims.y();
      t.start.height = dims.z();
      t.start.center << rng.uniform(cfg.arena_min.x(), cfg.arena_max.x()),
          rng.uniform(cfg.arena_min.y(), cfg.arena_max.y()), dims.z() / 2.0;
      if (cfg.fixed_velocity) {
        t.velocity = *cfg.fixed_velocity;
      } else {
        t.velocity << rng.uniform(-cfg.max_speed_m_per_frame, cfg.max_speed_m_per_frame),
            rng.uniform(-cfg.max_speed_m_per_frame, cfg.max_speed_m_per_frame);
      }
      const double heading_draw = rng.uniform(-std::numbers::pi, std::numbers::pi);
      t.start.yaw = t.velocity.squaredNorm() > 0.0 ? std::atan2(t.velocity.y(), t.velocity.x()) : heading_draw;
      t.start.yaw = normalize_yaw(t.start.yaw);
      tracks.push_back(t);
    }
  }

  SequenceRecord seq;
  seq.sequence_id = "synth-" + std::to_string(cfg.seed);
  for (int f = 0; f < cfg.n_frames; ++f) {
    FrameRecord frame;
    frame.frame_index = f;
    frame.timestamp_us = f * cfg.frame_period_us;
    for (std::size_t k = 0; k < tracks.size(); ++k) {
      ObjectRecord o;
      o.cls = tracks[k].cls;
      o.box = tracks[k].start;
      o.box.center.head<2>() += f * tracks[k].velocity;
      o.track_id = static_cast<std::int64_t>(k + 1);
      frame.objects.push_back(o);
    }
    seq.gt_frames.push_back(std::move(frame));
  }
  return seq;
}

std::size_t CorruptionLog::kept_count() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.dropped ? 0 : 1;
  return n;
}

std::size_t CorruptionLog::dropped_count() const { return entries.size() - kept_count(); }

CorruptedSequence corrupt_detections(std::span<const FrameRecord> gt_frames, const ScenarioConfig& cfg) {
  cfg.validate();
  SynthRng rng(cfg.seed ^ kCorruptionStream);
  const bool noiseless = cfg.position_sigma_m == 0.0 && cfg.yaw_sigma_rad == 0.0;
  std::int64_t next_fresh_id = 1'000'000;
  std::map<std::int64_t, std::int64_t> id_map;  // gt track -> current predicted id

  CorruptedSequence out;
  for (const FrameRecord& g : gt_frames) {
    FrameRecord pred;
    pred.frame_index = g.frame_index;
    pred.timestamp_us = g.timestamp_us;
    for (const ObjectRecord& o : g.objects) {
      const std::int64_t gt_id = o.track_id.value_or(0);
      auto [it, inserted] = id_map.try_emplace(gt_id, gt_id);
      if (!inserted && rng.uniform01() < cfg.id_switch) it->second = next_fresh_id++;

      CorruptionEntry e;
      e.frame_index = g.frame_index;
      e.gt_track_id = gt_id;
      e.pred_track_id = it->second;
      e.dropped = rng.uniform01() < cfg.dropout;
      const double dx = rng.normal(0.0, cfg.position_sigma_m);
      const double dy = rng.normal(0.0, cfg.position_sigma_m);
      const double dz = rng.normal(0.0, cfg.position_sigma_m);
      const double dyaw = rng.normal(0.0, cfg.yaw_sigma_rad);
      const double score = noiseless ? 1.0 : rng.uniform(0.5, 1.0);
      if (!e.dropped) {
        e.offset << dx, dy, dz;
        e.yaw_offset = dyaw;
        ObjectRecord p = o;
        p.box.center += e.offset;
        p.box.yaw = normalize_yaw(p.box.yaw + dyaw);
        p.score = score;
        p.track_id = e.pred_track_id;
        pred.objects.push_back(p);
      }
      out.log.entries.push_back(e);
    }

    const double whole = std::floor(cfg.false_positive_rate);
    int n_fp = static_cast<int>(whole) + (rng.uniform01() < cfg.false_positive_rate - whole ? 1 : 0);
    for (int k = 0; k < n_fp; ++k) {
      constexpr int kMaxTries = 1000;
      for (int attempt = 0; attempt < kMaxTries; ++attempt) {
        ObjectRecord fp;
        fp.cls = kAllClasses[rng.index(4)];
        const Eigen::Vector3d dims = nominal_dimensions(fp.cls);
        fp.box.length = dims.x();
        fp.box.width = dims.y();
        fp.box.height = dims.z();
        fp.box.center << rng.uniform(cfg.arena_min.x(), cfg.arena_max.x()),
            rng.uniform(cfg.arena_min.y(), cfg.arena_max.y()), dims.z() / 2.0;
        fp.box.yaw = normalize_yaw(rng.uniform(-std::numbers::pi, std::numbers::pi));
        fp.score = rng.uniform01();
        bool clear = true;
        for (const ObjectRecord& o : g.objects)
          if (iou_3d(fp.box, o.box) > 0.1) clear = false;
        if (!clear) continue;
        fp.track_id = next_fresh_id++;
        out.log.false_positives.push_back({g.frame_index, *fp.track_id});
        pred.objects.push_back(fp);
        break;
      }
    }
    out.predictions.push_back(std::move(pred));
  }
  return out;
}

std::vector<TimingRecord> simulate_timing(const TimingModel& model, std::span<const int> objects_per_frame,
                                          std::int64_t first_frame) {
  if (model.base_detection_ms < 0.0 || model.base_tracking_ms < 0.0 || model.per_object_tracking_ms < 0.0)
    throw ValidationError("timing model parameters must be non-negative");
  std::vector<TimingRecord> out;
  out.reserve(objects_per_frame.size());
  for (std::size_t i = 0; i < objects_per_frame.size(); ++i) {
    out.push_back({first_frame + static_cast<std::int64_t>(i), model.base_detection_ms,
                   model.base_tracking_ms + model.per_object_tracking_ms * objects_per_frame[i]});
  }
  return out;
}

std::vector<int> objects_per_frame(std::span<const FrameRecord> frames) {
  std::vector<int> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(static_cast<int>(f.objects.size()));
  return out;
}

}  // namespace infraqa
