#include "infraqa/pipeline.hpp"

#include "infraqa/detection_metrics.hpp"
#include "infraqa/error.hpp"
#include "infraqa/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <set>
#include <string>

namespace infraqa {

std::size_t worker_count() {
  if (const char* env = std::getenv("INFRAQA_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<SetupId> enumerate_setups(std::span<const std::string> cameras,
                                      std::span<const std::string> lidars, std::vector<int> machine_ids) {
  std::sort(machine_ids.begin(), machine_ids.end());
  std::vector<SetupId> out;
  out.reserve(static_cast<std::size_t>(sensor_combination_count(static_cast<int>(cameras.size()),
                                                                static_cast<int>(lidars.size()))) *
              machine_ids.size());
  auto emit = [&](SetupKind kind, std::optional<std::string> cam, std::optional<std::string> lid) {
    for (int m : machine_ids) out.push_back({kind, cam, lid, m});
  };
  for (const auto& c : cameras) emit(SetupKind::camera_only, c, std::nullopt);
  for (const auto& l : lidars) emit(SetupKind::lidar_only, std::nullopt, l);
  for (const auto& c : cameras)
    for (const auto& l : lidars) emit(SetupKind::combined, c, l);
  return out;
}

std::vector<SetupId> enumerate_setups(std::span<const SensorSpec> sensors,
                                      std::span<const MachineProfile> machines) {
  std::vector<std::string> cameras, lidars;
  for (const SensorSpec& s : sensors) (s.kind() == SensorKind::camera ? cameras : lidars).push_back(s.label);
  std::vector<int> ids;
  for (const MachineProfile& m : machines) ids.push_back(m.machine_id);
  return enumerate_setups(cameras, lidars, std::move(ids));
}

double latency_norm(double total_ms, const EvalConstants& consts) {
  const double clamped = std::clamp(total_ms, consts.t_min_ms, consts.t_max_ms);
  return 1.0 - (clamped - consts.t_min_ms) / (consts.t_max_ms - consts.t_min_ms);
}

LatencyBreakdown total_latency(std::span<const TimingRecord> timings, double readout_ms,
                               const EvalConstants& consts) {
  if (timings.empty()) throw ValidationError("total_latency: no timing records");
  LatencyBreakdown b;
  for (const TimingRecord& t : timings) {
    b.t_detection_ms += t.t_detection_ms;
    b.t_tracking_ms += t.t_tracking_ms;
  }
  const double n = static_cast<double>(timings.size());
  b.t_sensor_readout_ms = readout_ms;
  b.t_detection_ms /= n;
  b.t_tracking_ms /= n;
  b.total_ms = b.t_sensor_readout_ms + b.t_detection_ms + b.t_tracking_ms;
  b.latency_norm = latency_norm(b.total_ms, consts);
  return b;
}

LatencyBreakdown combined_latency(std::span<const CombinedFrameTiming> frames, double camera_readout_ms,
                                  double lidar_readout_ms, FusionPolicy policy, const EvalConstants& consts) {
  if (frames.empty()) throw ValidationError("combined_latency: no timing records");
  LatencyBreakdown b;
  for (const CombinedFrameTiming& f : frames) {
    const double cam = camera_readout_ms + f.camera_detection_ms;
    const double lid = lidar_readout_ms + f.lidar_detection_ms;
    if (policy == FusionPolicy::serial) {
      b.t_sensor_readout_ms += camera_readout_ms + lidar_readout_ms;
      b.t_detection_ms += f.camera_detection_ms + f.lidar_detection_ms;
    } else if (cam >= lid) {
      b.t_sensor_readout_ms += camera_readout_ms;
      b.t_detection_ms += f.camera_detection_ms;
    } else {
      b.t_sensor_readout_ms += lidar_readout_ms;
      b.t_detection_ms += f.lidar_detection_ms;
    }
    b.t_tracking_ms += f.fused_tracking_ms;
  }
  const double n = static_cast<double>(frames.size());
  b.t_sensor_readout_ms /= n;
  b.t_detection_ms /= n;
  b.t_tracking_ms /= n;
  b.total_ms = b.t_sensor_readout_ms + b.t_detection_ms + b.t_tracking_ms;
  b.latency_norm = latency_norm(b.total_ms, consts);
  return b;
}

double variance(const Eigen::Ref<const Eigen::VectorXd>& x) {
  return (x.array() - x.mean()).square().mean();
}

double covariance(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) {
  return ((x.array() - x.mean()) * (y.array() - y.mean())).mean();
}

ReliabilityBreakdown reliability_raw(const Eigen::Ref<const Eigen::VectorXd>& r1,
                                     const Eigen::Ref<const Eigen::VectorXd>& r2,
                                     const Eigen::Ref<const Eigen::VectorXd>& r3,
                                     const Eigen::Ref<const Eigen::VectorXd>& r4) {
  const Eigen::Index n = r1.size();
  if (r2.size() != n || r3.size() != n || r4.size() != n)
    throw ValidationError("reliability series differ in length");
  if (n < 2) throw ValidationError("reliability needs at least two frames");
  ReliabilityBreakdown b;
  b.var_r1 = variance(r1);
  b.var_r2 = variance(r2);
  b.var_r3 = variance(r3);
  b.var_r4 = variance(r4);
  b.cov_r1_r2 = covariance(r1, r2);
  b.cov_r1_r3 = covariance(r1, r3);
  b.raw = b.var_r1 + b.var_r2 + b.var_r3 + b.var_r4 + 2.0 * b.cov_r1_r2 + 2.0 * b.cov_r1_r3;
  return b;
}

Eigen::VectorXd reliability_norm_batch(const Eigen::Ref<const Eigen::VectorXd>& raws) {
  if (raws.size() == 0) return {};
  const double lo = raws.minCoeff();
  const double hi = raws.maxCoeff();
  if (!(hi > lo)) return Eigen::VectorXd::Ones(raws.size());
  return (1.0 - (raws.array() - lo) / (hi - lo)).matrix();
}

QualityVector build_quality_vector(double a_norm, double l_norm, double r_norm, const Eigen::Vector3d& weights) {
  QualityVector q{a_norm, l_norm, r_norm, 0.0};
  q.magnitude = std::sqrt((weights.array() * q.components().array().square()).sum());
  return q;
}

namespace {

struct FrameStat {
  double n_objects = 0.0;
  double ad = 0.0;
  double t_detection_ms = 0.0;
  double t_tracking_ms = 0.0;
};

using FrameStats = std::map<std::int64_t, FrameStat>;

struct SingleEval {
  AccuracyBreakdown accuracy;
  LatencyBreakdown latency;
  ReliabilityBreakdown reliability;
  std::vector<FrameStats> sequences;
};

void require_valid(const std::vector<FrameRecord>& frames, FrameRole role) {
  const auto v = validate_frames(frames, role);
  if (v.empty()) return;
  const Violation& first = v.front();
  throw ValidationError(first.where + " frame " + std::to_string(first.frame_index) + " field " +
                        first.field + ": " + first.message + " (" + std::to_string(v.size()) +
                        " violation(s))");
}

std::map<std::int64_t, const FrameRecord*> index_frames(const std::vector<FrameRecord>& frames) {
  std::map<std::int64_t, const FrameRecord*> out;
  for (const auto& f : frames) out[f.frame_index] = &f;
  return out;
}

std::map<std::int64_t, const TimingRecord*> index_timing(const std::vector<TimingRecord>& timing) {
  std::map<std::int64_t, const TimingRecord*> out;
  for (const auto& t : timing) out[t.frame_index] = &t;
  return out;
}

struct MeasuredMetrics {
  double map_value = 0.0;
  double hota = 0.0;
  std::vector<std::map<std::int64_t, std::pair<double, double>>> per_frame;  // (n_objects, ad)
};

/// mAP over all sequences, HOTA over all sequences, and per-gt-frame stats.
MeasuredMetrics measure(const std::vector<SequenceInputs>& sequences, const HotaOptions& hota_options) {
  MeasuredMetrics out;
  DetectionEvaluator det;
  HotaEvaluator hota(hota_options);
  for (const SequenceInputs& seq : sequences) {
    require_valid(seq.gt, FrameRole::ground_truth);
    require_valid(seq.detections, FrameRole::detections);
    const std::vector<FrameRecord>& tracks = seq.tracks.empty() ? seq.detections : seq.tracks;
    require_valid(tracks, FrameRole::tracks);
    det.add_sequence(seq.gt, seq.detections);
    hota.add_sequence(seq.gt, tracks);

    const auto preds = index_frames(seq.detections);
    auto& stats = out.per_frame.emplace_back();
    for (const FrameRecord& g : seq.gt) {
      FrameRecord empty;
      empty.frame_index = g.frame_index;
      auto it = preds.find(g.frame_index);
      const double ad = per_frame_ad(g, it == preds.end() ? empty : *it->second);
      stats[g.frame_index] = {static_cast<double>(g.objects.size()), ad};
    }
  }
  out.map_value = det.result().map_value;
  out.hota = hota.result().hota;
  return out;
}

struct Series {
  std::vector<double> r1, r2, r3, r4;

  void push(const FrameStat& s) {
    r1.push_back(s.n_objects);
    r2.push_back(s.ad);
    r3.push_back(s.t_tracking_ms);
    r4.push_back(s.t_detection_ms);
  }
  ReliabilityBreakdown reliability() const {
    using V = Eigen::Map<const Eigen::VectorXd>;
    const auto n = static_cast<Eigen::Index>(r1.size());
    return reliability_raw(V(r1.data(), n), V(r2.data(), n), V(r3.data(), n), V(r4.data(), n));
  }
};

const SensorSpec& find_sensor(std::span<const SensorSpec> sensors, const std::string& label) {
  for (const SensorSpec& s : sensors)
    if (s.label == label) return s;
  throw ValidationError("unknown sensor label '" + label + "'");
}

SingleEval evaluate_single(const SensorSpec& sensor, const SetupInputs& inputs, const PipelineSettings& settings) {
  if (inputs.sequences.empty()) throw MissingInputError("no sequences supplied");
  const MeasuredMetrics m = measure(inputs.sequences, settings.hota);

  SingleEval out;
  out.accuracy =
      single_sensor_accuracy(sensor, m.map_value, m.hota, settings.constants, settings.error_models);

  std::vector<TimingRecord> joined;
  Series series;
  for (std::size_t k = 0; k < inputs.sequences.size(); ++k) {
    const auto timing = index_timing(inputs.sequences[k].timing);
    FrameStats& stats = out.sequences.emplace_back();
    for (const auto& [frame, counts] : m.per_frame[k]) {
      auto it = timing.find(frame);
      if (it == timing.end())
        throw ValidationError("timing log has no entry for frame " + std::to_string(frame) + " of sequence " +
                              std::to_string(k));
      const FrameStat s{counts.first, counts.second, it->second->t_detection_ms, it->second->t_tracking_ms};
      stats[frame] = s;
      series.push(s);
      joined.push_back(*it->second);
    }
  }
  out.latency = total_latency(joined, sensor.readout_ms, settings.constants);
  out.reliability = series.reliability();
  return out;
}

SingleEval evaluate_combined(const SensorSpec& camera, const SensorSpec& lidar, const SingleEval& cam,
                             const SingleEval& lid, const SetupInputs& inputs, const PipelineSettings& settings) {
  if (inputs.sequences.empty()) throw MissingInputError("no sequences supplied");
  if (inputs.sequences.size() != cam.sequences.size() || inputs.sequences.size() != lid.sequences.size())
    throw ValidationError("combined setup must supply as many sequences as its single-sensor setups");

  SingleEval out;
  AccuracyBreakdown& acc = out.accuracy;
  acc.a_s = combine_composite(cam.accuracy.a_s, lid.accuracy.a_s);
  acc.a_l = combine_composite(cam.accuracy.a_l, lid.accuracy.a_l);
  std::optional<MeasuredMetrics> measured;
  if (inputs.mode == CombineMode::measured) {
    measured = measure(inputs.sequences, settings.hota);
    acc.a_d = measured->map_value;
    acc.a_sld = composite_accuracy(acc.a_s, acc.a_l, acc.a_d);
    acc.a_t = measured->hota;
  } else {
    acc.a_sld = combine_composite(cam.accuracy.a_sld, lid.accuracy.a_sld);
    const double sl = acc.a_s * acc.a_l;
    acc.a_d = sl > 0.0 ? acc.a_sld / sl : 0.0;
    acc.a_t = combine_tracking(cam.accuracy.a_t, lid.accuracy.a_t);
  }
  acc.accuracy_norm = accuracy_norm(acc.a_sld, acc.a_t);

  std::vector<CombinedFrameTiming> timings;
  Series series;
  for (std::size_t k = 0; k < inputs.sequences.size(); ++k) {
    std::vector<TimingRecord> fused = inputs.sequences[k].timing;
    std::sort(fused.begin(), fused.end(), [](const auto& a, const auto& b) { return a.frame_index < b.frame_index; });
    if (fused.empty()) throw MissingInputError("fused timing log of sequence " + std::to_string(k) + " is empty");
    FrameStats& stats = out.sequences.emplace_back();
    for (const TimingRecord& t : fused) {
      auto c = cam.sequences[k].find(t.frame_index);
      auto l = lid.sequences[k].find(t.frame_index);
      if (c == cam.sequences[k].end() || l == lid.sequences[k].end())
        throw ValidationError("fused frame " + std::to_string(t.frame_index) +
                              " is missing from a single-sensor setup");
      CombinedFrameTiming ft{c->second.t_detection_ms, l->second.t_detection_ms, t.t_tracking_ms};
      timings.push_back(ft);

      FrameStat s;
      if (measured) {
        auto it = measured->per_frame[k].find(t.frame_index);
        if (it == measured->per_frame[k].end())
          throw ValidationError("fused ground truth lacks frame " + std::to_string(t.frame_index));
        s.n_objects = it->second.first;
        s.ad = it->second.second;
      } else {
        s.n_objects = c->second.n_objects;
        s.ad = combine_composite(c->second.ad, l->second.ad);
      }
      s.t_tracking_ms = t.t_tracking_ms;
      s.t_detection_ms = settings.fusion == FusionPolicy::serial
                             ? ft.camera_detection_ms + ft.lidar_detection_ms
                             : std::max(ft.camera_detection_ms, ft.lidar_detection_ms);
      stats[t.frame_index] = s;
      series.push(s);
    }
  }
  out.latency = combined_latency(timings, camera.readout_ms, lidar.readout_ms, settings.fusion, settings.constants);
  out.reliability = series.reliability();
  return out;
}

template <typename Fn>
auto with_context(const SetupId& id, Fn&& fn) {
  try {
    return fn();
  } catch (const MissingInputError& e) {
    throw MissingInputError(id.to_string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(id.to_string() + ": " + e.what());
  } catch (const IoError& e) {
    throw IoError(id.to_string() + ": " + e.what());
  }
}

}  // namespace

std::vector<SetupResult> evaluate_setups(std::span<const SensorSpec> sensors,
                                         std::span<const MachineProfile> machines,
                                         const PipelineSettings& settings, const InputLoader& loader) {
  settings.constants.validate();
  std::set<std::string> labels;
  for (const SensorSpec& s : sensors) {
    validate_sensor(s);
    if (!labels.insert(s.label).second) throw ValidationError("duplicate sensor label '" + s.label + "'");
  }
  std::set<int> machine_ids;
  for (const MachineProfile& m : machines)
    if (!machine_ids.insert(m.machine_id).second)
      throw ValidationError("duplicate machine_id " + std::to_string(m.machine_id));
  if (((settings.weights.array() < 0.0) || (settings.weights.array() > 1.0)).any())
    throw ValidationError("quality weights must lie in [0, 1]");

  const std::vector<SetupId> setups = enumerate_setups(sensors, machines);
  std::vector<SingleEval> evals(setups.size());
  std::vector<std::size_t> singles, combined;
  std::map<std::pair<std::string, int>, std::size_t> single_index;
  for (std::size_t i = 0; i < setups.size(); ++i) {
    if (setups[i].kind == SetupKind::combined) {
      combined.push_back(i);
    } else {
      singles.push_back(i);
      single_index[{setups[i].sensor_name(), setups[i].machine_id}] = i;
    }
  }

  // Phase 1a: single-sensor setups.
  parallel_for(singles.size(), settings.threads, [&](std::size_t k) {
    const SetupId& id = setups[singles[k]];
    evals[singles[k]] = with_context(id, [&] {
      const SetupInputs inputs = loader(id);
      return evaluate_single(find_sensor(sensors, id.sensor_name()), inputs, settings);
    });
  });

  // Phase 1b: combined setups, which read their single-sensor counterparts.
  parallel_for(combined.size(), settings.threads, [&](std::size_t k) {
    const SetupId& id = setups[combined[k]];
    evals[combined[k]] = with_context(id, [&] {
      const SetupInputs inputs = loader(id);
      const SingleEval& cam = evals[single_index.at({*id.camera_label, id.machine_id})];
      const SingleEval& lid = evals[single_index.at({*id.lidar_label, id.machine_id})];
      return evaluate_combined(find_sensor(sensors, *id.camera_label), find_sensor(sensors, *id.lidar_label),
                               cam, lid, inputs, settings);
    });
  });

  // Phase 2: batch reliability normalization.
  Eigen::VectorXd raws(static_cast<Eigen::Index>(setups.size()));
  for (std::size_t i = 0; i < setups.size(); ++i) raws(static_cast<Eigen::Index>(i)) = evals[i].reliability.raw;
  const Eigen::VectorXd norms = reliability_norm_batch(raws);

  std::vector<SetupResult> results;
  results.reserve(setups.size());
  for (std::size_t i = 0; i < setups.size(); ++i) {
    SetupResult r{setups[i], evals[i].accuracy, evals[i].latency, evals[i].reliability, {}};
    r.reliability.reliability_norm = norms(static_cast<Eigen::Index>(i));
    r.q = build_quality_vector(r.accuracy.accuracy_norm, r.latency.latency_norm, r.reliability.reliability_norm,
                               settings.weights);
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace infraqa
