#include "oracles.hpp"

#include "infraqa/config.hpp"
#include "infraqa/detection_metrics.hpp"
#include "infraqa/error.hpp"
#include "infraqa/pipeline.hpp"
#include "infraqa/synth.hpp"

#include <doctest.h>

#include <map>
#include <random>

using namespace infraqa;

namespace {

std::vector<std::string> labels(const char* prefix, int n) {
  std::vector<std::string> out;
  for (int k = 0; k < n; ++k) out.push_back(prefix + std::to_string(k));
  return out;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

double oracle_raw(const Eigen::VectorXd& r1, const Eigen::VectorXd& r2, const Eigen::VectorXd& r3,
                  const Eigen::VectorXd& r4) {
  const auto a = to_std(r1), b = to_std(r2), c = to_std(r3), d = to_std(r4);
  return oracle::pop_cov(a, a) + oracle::pop_cov(b, b) + oracle::pop_cov(c, c) + oracle::pop_cov(d, d) +
         2 * oracle::pop_cov(a, b) + 2 * oracle::pop_cov(a, c);
}

ScenarioConfig scenario(std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.seed = seed;
  cfg.n_frames = 8;
  cfg.objects_per_class = {{ObjectClass::car, 2}, {ObjectClass::pedestrian, 1}};
  cfg.arena_min = Eigen::Vector2d(-8, -8);
  cfg.arena_max = Eigen::Vector2d(8, 8);
  cfg.max_speed_m_per_frame = 0.6;
  cfg.position_sigma_m = 0.2;
  cfg.yaw_sigma_rad = 0.05;
  cfg.dropout = 0.15;
  cfg.false_positive_rate = 0.3;
  cfg.id_switch = 0.1;
  return cfg;
}

SequenceInputs synth_inputs(std::uint64_t seed, double base_detection_ms) {
  const ScenarioConfig cfg = scenario(seed);
  SequenceInputs in;
  in.gt = generate_scenario(cfg).gt_frames;
  in.detections = corrupt_detections(in.gt, cfg).predictions;
  const auto counts = objects_per_frame(in.gt);
  in.timing = simulate_timing({base_detection_ms, 4.0, 1.5}, counts);
  // Per-frame jitter so detection times carry variance.
  for (std::size_t k = 0; k < in.timing.size(); ++k) in.timing[k].t_detection_ms += static_cast<double>(k % 3);
  return in;
}

struct Fixture {
  std::vector<SensorSpec> sensors;
  std::vector<MachineProfile> machines{{1, "gpu", "cpu"}};
  std::map<std::string, SequenceInputs> inputs;

  Fixture() {
    for (const SensorSpec& s : dair_ladder_sensors())
      if (s.label == "C540" || s.label == "L32") sensors.push_back(s);
    sensors[0].readout_ms = 12.0;
    sensors[1].readout_ms = 30.0;
    inputs["C540@1"] = synth_inputs(11, 40.0);
    inputs["L32@1"] = synth_inputs(11, 55.0);
    inputs["L32@1"].detections = corrupt_detections(inputs["L32@1"].gt, scenario(12)).predictions;
    inputs["C540&L32@1"] = synth_inputs(11, 0.0);
    inputs["C540&L32@1"].detections = corrupt_detections(inputs["C540&L32@1"].gt, scenario(13)).predictions;
  }

  InputLoader loader() const {
    return [this](const SetupId& id) {
      auto it = inputs.find(id.to_string());
      if (it == inputs.end()) throw MissingInputError("nothing recorded");
      return SetupInputs{CombineMode::measured, {it->second}};
    };
  }
};

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("enumeration counts") {
    const auto cams = labels("C", 8), lids = labels("L", 6);
    CHECK(enumerate_setups(cams, lids, {1, 2, 3, 4}).size() == 248);
    CHECK(sensor_combination_count(8, 6) == 62);
    CHECK(enumerate_setups(labels("C", 1), labels("L", 1), {1}).size() == 3);
    const auto lidar_only = enumerate_setups({}, labels("L", 3), {2, 1});
    CHECK(sensor_combination_count(0, 3) == 3);
    CHECK(lidar_only.size() == 6);
    CHECK(enumerate_setups({}, {}, {1}).empty());
  }

  TEST_CASE("enumeration order") {
    const auto s = enumerate_setups(labels("C", 2), labels("L", 2), {2, 1});
    std::vector<std::string> names;
    for (const SetupId& id : s) names.push_back(id.to_string());
    const std::vector<std::string> expected = {
        "C0@1",    "C0@2",    "C1@1",    "C1@2",    "L0@1",    "L0@2",    "L1@1",    "L1@2",
        "C0&L0@1", "C0&L0@2", "C0&L1@1", "C0&L1@2", "C1&L0@1", "C1&L0@2", "C1&L1@1", "C1&L1@2"};
    CHECK(names == expected);
    CHECK(s[8].kind == SetupKind::combined);
  }

  TEST_CASE("latency examples") {
    const EvalConstants k;
    const std::vector<TimingRecord> one = {{0, 50.0, 40.0}};
    const LatencyBreakdown a = total_latency(one, 10.0, k);
    CHECK(a.total_ms == doctest::Approx(100.0).epsilon(1e-15));
    CHECK(a.latency_norm == doctest::Approx(0.9).epsilon(1e-15));

    const std::vector<TimingRecord> two = {{0, 50.0, 40.0}, {1, 150.0, 40.0}};
    CHECK(total_latency(two, 10.0, k).total_ms == doctest::Approx(150.0).epsilon(1e-15));

    const std::vector<CombinedFrameTiming> f = {{40.0, 55.0, 30.0}};
    CHECK(combined_latency(f, 20.0, 10.0, FusionPolicy::parallel, k).total_ms == doctest::Approx(95.0));
    CHECK(combined_latency(f, 20.0, 10.0, FusionPolicy::serial, k).total_ms == doctest::Approx(155.0));
    CHECK_THROWS_AS(total_latency({}, 10.0, k), Error);
  }

  TEST_CASE("latency normalization") {
    const EvalConstants k;
    CHECK(latency_norm(0.0, k) == 1.0);
    CHECK(latency_norm(500.0, k) == 0.5);
    CHECK(latency_norm(1000.0, k) == 0.0);
    CHECK(latency_norm(1500.0, k) == 0.0);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1200.0);
    for (int i = 0; i < 200; ++i) {
      const double a = u(rng), b = u(rng);
      if (a < b) CHECK(latency_norm(a, k) >= latency_norm(b, k));
    }
  }

  TEST_CASE("reliability fixture") {
    const ReliabilityBreakdown r = reliability_raw(vec({1, 3}), vec({0.5, 0.7}), vec({10, 12}), vec({5, 5}));
    CHECK(r.raw == doctest::Approx(4.21).epsilon(1e-12));
    CHECK(r.var_r4 == 0.0);
    CHECK(r.cov_r1_r2 == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(r.cov_r1_r3 == doctest::Approx(1.0).epsilon(1e-12));

    const Eigen::VectorXd c = Eigen::VectorXd::Constant(5, 3.0);
    CHECK(reliability_raw(c, c, c, c).raw == 0.0);
  }

  TEST_CASE("reliability properties") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::Index len = 2 + trial % 20;
      Eigen::VectorXd r1(len), r2(len), r3(len), r4(len);
      for (Eigen::Index i = 0; i < len; ++i) {
        r1(i) = 5 + 2 * n(rng);
        r2(i) = 0.5 + 0.1 * n(rng);
        r3(i) = 20 + 3 * n(rng);
        r4(i) = 40 + 4 * n(rng);
      }
      const double raw = reliability_raw(r1, r2, r3, r4).raw;
      CHECK(std::abs(raw - oracle_raw(r1, r2, r3, r4)) < 1e-9);

      const Eigen::VectorXd shift = Eigen::VectorXd::Constant(len, 1000.0);
      CHECK(std::abs(reliability_raw(r1 + shift, r2 + shift, r3 + shift, r4 + shift).raw - raw) < 1e-9);

      // Doubling r4 changes the raw value by exactly 3 Var(r4).
      const double doubled = reliability_raw(r1, r2, r3, 2 * r4).raw;
      CHECK(std::abs(doubled - raw - 3 * variance(r4)) < 1e-9);
    }
    CHECK_THROWS_AS(reliability_raw(vec({1, 2}), vec({1, 2, 3}), vec({1, 2}), vec({1, 2})), ValidationError);
    CHECK_THROWS_AS(reliability_raw(vec({1}), vec({1}), vec({1}), vec({1})), ValidationError);
  }

  TEST_CASE("reliability batch normalization") {
    const Eigen::VectorXd n = reliability_norm_batch(vec({2, 4, 6}));
    CHECK(n(0) == 1.0);
    CHECK(n(1) == 0.5);
    CHECK(n(2) == 0.0);
    CHECK(reliability_norm_batch(vec({3, 3, 3})) == Eigen::VectorXd::Ones(3));
    CHECK(reliability_norm_batch(vec({7})) == Eigen::VectorXd::Ones(1));

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    Eigen::VectorXd raws(40);
    for (Eigen::Index i = 0; i < 40; ++i) raws(i) = u(rng);
    const Eigen::VectorXd norm = reliability_norm_batch(raws);
    for (Eigen::Index i = 0; i < 40; ++i) {
      CHECK(norm(i) >= 0.0);
      CHECK(norm(i) <= 1.0);
      for (Eigen::Index j = 0; j < 40; ++j)
        if (raws(i) < raws(j)) CHECK(norm(i) >= norm(j));
    }
  }

  TEST_CASE("quality vector magnitude") {
    CHECK(std::abs(build_quality_vector(0.7759, 0.9528, 0.7184).magnitude - 1.4233) < 5e-4);
    CHECK(std::abs(build_quality_vector(0.0713, 0.0308, 0.3985).magnitude - 0.4060) < 5e-4);
    CHECK(build_quality_vector(0, 0, 0).magnitude == 0.0);
    CHECK(build_quality_vector(1, 1, 1).magnitude == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
    const QualityVector w = build_quality_vector(0.5, 0.5, 0.5, Eigen::Vector3d(1, 0, 0));
    CHECK(w.magnitude == doctest::Approx(0.5).epsilon(1e-15));
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) CHECK(build_quality_vector(u(rng), u(rng), u(rng)).magnitude <= std::sqrt(3.0));
  }

  TEST_CASE("evaluation agrees with an independent recomputation") {
    const Fixture fx;
    PipelineSettings settings;
    const auto results = evaluate_setups(fx.sensors, fx.machines, settings, fx.loader());
    REQUIRE(results.size() == 3);
    const EvalConstants k;

    struct Expected {
      double a_s, a_l, a_d, a_t, total;
      Eigen::VectorXd r1, r2, r3, r4;
    };
    std::vector<Expected> expected;
    for (int s = 0; s < 2; ++s) {
      const SensorSpec& sensor = fx.sensors[s];
      const SequenceInputs& in = fx.inputs.at(sensor.label + "@1");
      Expected e;
      const double err = s == 0 ? camera_gsd(sensor, 150.0) : lidar_range_error(sensor, 150.0);
      e.a_s = 1.0 - err / 150.0;
      const Registration& reg = s == 0 ? k.camera_registration : k.lidar_registration;
      e.a_l = 1.0 - std::hypot(reg.e_trans_m, 150.0 * reg.e_rot_rad) / 150.0;
      e.a_d = oracle::mean_ap(in.gt, in.detections);
      e.a_t = oracle::hota(in.gt, in.detections);
      const auto n = static_cast<Eigen::Index>(in.gt.size());
      e.r1.resize(n);
      e.r2.resize(n);
      e.r3.resize(n);
      e.r4.resize(n);
      double sum = 0.0;
      for (Eigen::Index f = 0; f < n; ++f) {
        e.r1(f) = static_cast<double>(in.gt[f].objects.size());
        e.r2(f) = per_frame_ad(in.gt[f], in.detections[f]);
        e.r3(f) = in.timing[f].t_tracking_ms;
        e.r4(f) = in.timing[f].t_detection_ms;
        sum += in.timing[f].t_detection_ms + in.timing[f].t_tracking_ms;
      }
      e.total = sensor.readout_ms + sum / static_cast<double>(n);
      expected.push_back(e);
    }
    {
      const SequenceInputs& in = fx.inputs.at("C540&L32@1");
      const Expected &c = expected[0], &l = expected[1];
      auto comb = [](double a, double b) { return (a * a + b * b) / (a + b); };
      Expected e;
      e.a_s = comb(c.a_s, l.a_s);
      e.a_l = comb(c.a_l, l.a_l);
      e.a_d = oracle::mean_ap(in.gt, in.detections);
      e.a_t = oracle::hota(in.gt, in.detections);
      const auto n = static_cast<Eigen::Index>(in.gt.size());
      e.r1 = c.r1;
      e.r2.resize(n);
      e.r3.resize(n);
      e.r4.resize(n);
      double sum = 0.0;
      for (Eigen::Index f = 0; f < n; ++f) {
        e.r2(f) = per_frame_ad(in.gt[f], in.detections[f]);
        e.r3(f) = in.timing[f].t_tracking_ms;
        e.r4(f) = std::max(c.r4(f), l.r4(f));
        sum += std::max(12.0 + c.r4(f), 30.0 + l.r4(f)) + e.r3(f);
      }
      e.total = sum / static_cast<double>(n);
      expected.push_back(e);
    }

    Eigen::VectorXd raws(3);
    for (int i = 0; i < 3; ++i) raws(i) = oracle_raw(expected[i].r1, expected[i].r2, expected[i].r3, expected[i].r4);
    const double lo = raws.minCoeff(), hi = raws.maxCoeff();

    for (int i = 0; i < 3; ++i) {
      const SetupResult& r = results[i];
      const Expected& e = expected[i];
      INFO(r.setup.to_string());
      CHECK(std::abs(r.accuracy.a_s - e.a_s) < 1e-12);
      CHECK(std::abs(r.accuracy.a_l - e.a_l) < 1e-12);
      CHECK(std::abs(r.accuracy.a_d - e.a_d) < 1e-12);
      CHECK(std::abs(r.accuracy.a_t - e.a_t) < 1e-12);
      const double a_sld = e.a_s * e.a_l * e.a_d;
      CHECK(std::abs(r.accuracy.a_sld - a_sld) < 1e-12);
      CHECK(std::abs(r.accuracy.accuracy_norm - std::pow(a_sld * e.a_t, 0.25)) < 1e-12);
      CHECK(std::abs(r.latency.total_ms - e.total) < 1e-9);
      CHECK(std::abs(r.latency.latency_norm - (1.0 - e.total / 1000.0)) < 1e-12);
      CHECK(std::abs(r.reliability.raw - raws(i)) < 1e-9);
      const double rn = (hi - raws(i)) / (hi - lo);
      CHECK(std::abs(r.reliability.reliability_norm - rn) < 1e-9);
      const Eigen::Vector3d q(r.q.accuracy_norm, r.q.latency_norm, r.q.reliability_norm);
      CHECK(std::abs(r.q.magnitude - q.norm()) < 1e-12);
    }
  }

  TEST_CASE("compose mode derives accuracy from the single-sensor setups") {
    Fixture fx;
    const InputLoader base = fx.loader();
    const InputLoader compose = [&](const SetupId& id) {
      SetupInputs in = base(id);
      if (id.kind == SetupKind::combined) in.mode = CombineMode::compose;
      return in;
    };
    const auto r = evaluate_setups(fx.sensors, fx.machines, PipelineSettings{}, compose);
    const AccuracyBreakdown &c = r[0].accuracy, &l = r[1].accuracy, &f = r[2].accuracy;
    CHECK(std::abs(f.a_sld - combine_composite(c.a_sld, l.a_sld)) < 1e-15);
    CHECK(std::abs(f.a_t - (c.a_t + l.a_t) / 2) < 1e-15);
    CHECK(std::abs(f.a_s * f.a_l * f.a_d - f.a_sld) < 1e-12);
  }

  TEST_CASE("results do not depend on the worker count") {
    const Fixture fx;
    PipelineSettings one, four;
    one.threads = 1;
    four.threads = 4;
    const auto a = evaluate_setups(fx.sensors, fx.machines, one, fx.loader());
    const auto b = evaluate_setups(fx.sensors, fx.machines, four, fx.loader());
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].setup == b[i].setup);
      CHECK(a[i].accuracy.accuracy_norm == b[i].accuracy.accuracy_norm);
      CHECK(a[i].latency.total_ms == b[i].latency.total_ms);
      CHECK(a[i].reliability.raw == b[i].reliability.raw);
      CHECK(a[i].q.magnitude == b[i].q.magnitude);
    }
  }

  TEST_CASE("missing input names the setup") {
    Fixture fx;
    fx.inputs.erase("L32@1");
    CHECK_THROWS_WITH_AS(evaluate_setups(fx.sensors, fx.machines, PipelineSettings{}, fx.loader()),
                         doctest::Contains("L32@1"), MissingInputError);
  }
}
