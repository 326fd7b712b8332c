#include "helpers.hpp"

#include "infraqa/config.hpp"
#include "infraqa/error.hpp"
#include "infraqa/io.hpp"
#include "infraqa/report.hpp"

#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace infraqa;
using testing::box;
using testing::frame;
using testing::object;

namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("infraqa_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<FrameRecord> parse(const std::string& text) {
  std::istringstream in(text);
  return load_frames_jsonl(in, "test.jsonl");
}

std::vector<TimingRecord> parse_timing(const std::string& text) {
  std::istringstream in(text);
  return load_timing_csv(in, "timing.csv");
}

SetupResult fake_result(const SetupId& id, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SetupResult r;
  r.setup = id;
  r.accuracy = {u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
  r.accuracy.accuracy_norm = u(rng);
  r.latency = {10.0 * u(rng), 50.0 * u(rng), 20.0 * u(rng), 80.0 * u(rng), u(rng)};
  r.reliability.raw = 30.0 * u(rng);
  r.reliability.var_r1 = u(rng);
  r.reliability.cov_r1_r3 = -u(rng);
  r.reliability.reliability_norm = u(rng);
  r.q = build_quality_vector(r.accuracy.accuracy_norm, r.latency.latency_norm, r.reliability.reliability_norm);
  return r;
}

std::vector<SetupResult> ladder_results() {
  const auto sensors = dair_ladder_sensors();
  const std::vector<MachineProfile> machines = {{1, "", ""}, {2, "", ""}, {3, "", ""}, {4, "", ""}};
  std::mt19937_64 rng(1);
  std::vector<SetupResult> out;
  for (const SetupId& id : enumerate_setups(sensors, machines)) out.push_back(fake_result(id, rng));
  return out;
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("frames jsonl basics") {
    CHECK(parse("").empty());
    CHECK(parse("\n\n").empty());
    const auto f = parse(
        R"({"frame":3,"ts_us":300000,"objects":[{"cls":"car","x":1,"y":2,"z":0.75,"l":4,"w":2,"h":1.5,"yaw":0.1,"score":0.9,"track_id":7}]})"
        "\n");
    REQUIRE(f.size() == 1);
    CHECK(f[0].frame_index == 3);
    CHECK(f[0].timestamp_us == 300000);
    REQUIRE(f[0].objects.size() == 1);
    CHECK(f[0].objects[0].cls == ObjectClass::car);
    CHECK(f[0].objects[0].score == 0.9);
    CHECK(f[0].objects[0].track_id == 7);
    CHECK(f[0].objects[0].box.center == Eigen::Vector3d(1, 2, 0.75));
  }

  TEST_CASE("frames jsonl errors name the line") {
    const std::string bad =
        "{\"frame\":0,\"objects\":[]}\n"
        R"({"frame":1,"objects":[{"cls":"tricycle","x":0,"y":0,"z":0,"l":1,"w":1,"h":1,"yaw":0}]})"
        "\n";
    CHECK_THROWS_WITH_AS(parse(bad), doctest::Contains("test.jsonl:2"), ValidationError);
    CHECK_THROWS_WITH_AS(parse(bad), doctest::Contains("tricycle"), ValidationError);
    CHECK_THROWS_AS(parse("{not json\n"), ValidationError);
    CHECK_THROWS_AS(parse("{\"frame\":0,\"objects\":[{\"cls\":\"car\"}]}\n"), ValidationError);
  }

  TEST_CASE("scores are clamped and yaw wrapped") {
    const auto f = parse(
        R"({"frame":0,"objects":[{"cls":"bike","x":0,"y":0,"z":0,"l":1,"w":1,"h":1,"yaw":7,"score":1.5}]})"
        "\n");
    CHECK(f[0].objects[0].score == 1.0);
    CHECK(f[0].objects[0].box.yaw == doctest::Approx(7 - 2 * std::numbers::pi));
  }

  TEST_CASE("frames jsonl round-trips byte for byte") {
    std::mt19937_64 rng(12);
    std::vector<FrameRecord> frames;
    for (int f = 0; f < 20; ++f) {
      FrameRecord fr = frame(f);
      for (int k = 0; k < f % 4; ++k) {
        ObjectRecord o = object(static_cast<ObjectClass>(k % 4), testing::random_box(rng, 30.0));
        if (k % 2) o.score = std::uniform_real_distribution<double>(0, 1)(rng);
        if (k != 2) o.track_id = f * 10 + k;
        fr.objects.push_back(o);
      }
      frames.push_back(fr);
    }
    std::ostringstream first;
    write_frames_jsonl(first, frames);
    const auto back = parse(first.str());
    std::ostringstream second;
    write_frames_jsonl(second, back);
    CHECK(first.str() == second.str());
    REQUIRE(back.size() == frames.size());
    for (std::size_t f = 0; f < frames.size(); ++f)
      for (std::size_t k = 0; k < frames[f].objects.size(); ++k) {
        const Box3D &a = frames[f].objects[k].box, &b = back[f].objects[k].box;
        CHECK(std::abs(a.center.x() - b.center.x()) <= 1e-8 * std::max(1.0, std::abs(a.center.x())));
        CHECK(back[f].objects[k].track_id == frames[f].objects[k].track_id);
        CHECK(back[f].objects[k].score.has_value() == frames[f].objects[k].score.has_value());
      }
  }

  TEST_CASE("timing csv") {
    const auto t = parse_timing("frame,t_detection_ms,t_tracking_ms\n0,50.5,10\n1,60,12.25\n");
    REQUIRE(t.size() == 2);
    CHECK(t[1] == TimingRecord{1, 60.0, 12.25});
    CHECK(parse_timing("frame,t_detection_ms,t_tracking_ms\n").empty());
    const auto sorted = parse_timing("frame,t_detection_ms,t_tracking_ms\n2,1,1\n0,2,2\n1,3,3\n");
    CHECK(sorted[0].frame_index == 0);
    CHECK(sorted[1].frame_index == 1);
    CHECK(sorted[2].frame_index == 2);
    CHECK_THROWS_WITH_AS(parse_timing("frame,t_detection_ms,t_tracking_ms\n0,1,1\n1,-2,1\n"),
                         doctest::Contains("row 2: negative duration"), ValidationError);
    CHECK_THROWS_AS(parse_timing("frame,detect,track\n"), ValidationError);

    const auto dir = temp_dir("timing");
    write_timing_csv(dir / "t.csv", t);
    CHECK(load_timing_csv(dir / "t.csv") == t);
  }

  TEST_CASE("dair class reduction") {
    CHECK(reduce_dair_class("Car") == ObjectClass::car);
    CHECK(reduce_dair_class("van") == ObjectClass::car);
    CHECK(reduce_dair_class("Bus") == ObjectClass::truck);
    CHECK(reduce_dair_class("Cyclist") == ObjectClass::bike);
    CHECK(reduce_dair_class("Pedestrian") == ObjectClass::pedestrian);
    CHECK_FALSE(reduce_dair_class("Trafficcone").has_value());
  }

  TEST_CASE("dair label fixtures") {
    const auto dir = temp_dir("dair");
    fs::create_directories(dir / "label");
    fs::create_directories(dir / "calib");
    write_text(dir / "label" / "000010.json",
               R"([{"type":"Car","3d_location":{"x":"1","y":2,"z":0.8},"3d_dimensions":{"l":4,"w":2,"h":1.6},"rotation":0.5,"track_id":"12"},
                   {"type":"Van","3d_location":{"x":5,"y":0,"z":1},"3d_dimensions":{"l":5,"w":2,"h":2},"rotation":0},
                   {"type":"Bicycle","3d_location":{"x":0,"y":5,"z":0.5},"3d_dimensions":{"l":1.7,"w":0.6,"h":1},"rotation":0},
                   {"type":"Scooter","3d_location":{"x":0,"y":9,"z":0.5},"3d_dimensions":{"l":1.5,"w":0.6,"h":1},"rotation":0}])");
    write_text(dir / "calib" / "000010.json",
               R"({"rotation":[[0,-1,0],[1,0,0],[0,0,1]],"translation":[[10],[0],[0]]})");
    const auto frames = load_labels_dair(dir / "label", dir / "calib");
    REQUIRE(frames.size() == 1);
    CHECK(frames[0].frame_index == 10);
    const auto& o = frames[0].objects;
    REQUIRE(o.size() == 4);
    CHECK(o[0].cls == ObjectClass::car);
    CHECK(o[1].cls == ObjectClass::car);
    CHECK(o[2].cls == ObjectClass::bike);
    CHECK(o[3].cls == ObjectClass::bike);
    CHECK(o[0].track_id == 12);
    CHECK(o[0].box.center.isApprox(Eigen::Vector3d(8, 1, 0.8)));
    CHECK(o[0].box.yaw == doctest::Approx(0.5 + std::numbers::pi / 2));

    fs::create_directories(dir / "empty");
    CHECK_THROWS_WITH_AS(load_labels_dair(dir / "empty", dir / "calib"), doctest::Contains("no frames found"),
                         MissingInputError);
    write_text(dir / "label" / "000011.json", "[]");
    CHECK_THROWS_WITH_AS(load_labels_dair(dir / "label", dir / "calib"), doctest::Contains("missing calibration"),
                         MissingInputError);
  }

  TEST_CASE("report csv values") {
    SetupResult r;
    r.setup.kind = SetupKind::lidar_only;
    r.setup.lidar_label = "L256";
    r.setup.machine_id = 1;
    r.accuracy.a_d = 0.6243;
    r.accuracy.a_sld = 0.6237;
    r.accuracy.a_t = 0.4270;
    r.q = build_quality_vector(0.7184, 0.9528, 0.7759);
    const std::string csv = report_csv({r});
    CHECK(csv.rfind("setup,machine,mAP,A_sld,HOTA,A_norm,L_norm,R_norm,Q_mag\n", 0) == 0);
    CHECK(csv.find("\nL256,1,0.6243,0.6237,0.427,0.7184,0.9528,0.7759,") != std::string::npos);
  }

  TEST_CASE("report files for the full ladder") {
    const auto results = ladder_results();
    REQUIRE(results.size() == 248);
    const auto dir = temp_dir("report") / "nested" / "out";
    write_report(results, dir);
    const std::string q = read_text(dir / "qspace.csv");
    CHECK(std::count(q.begin(), q.end(), '\n') == 249);
    CHECK(q.rfind("setup,machine,A_norm,L_norm,R_norm\n", 0) == 0);
    const std::string csv = read_text(dir / "report.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 249);

    const auto back = read_report_json(dir / "report.json");
    REQUIRE(back.size() == results.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
      CHECK(back[i].setup == results[i].setup);
      CHECK(back[i].q.magnitude == round_to_written(results[i].q.magnitude));
      CHECK(back[i].reliability.raw == round_to_written(results[i].reliability.raw));
      CHECK(back[i].latency.total_ms == round_to_written(results[i].latency.total_ms));
      CHECK(std::abs(back[i].accuracy.a_sld - results[i].accuracy.a_sld) <= 1e-9);
    }
    CHECK(report_json(back) == read_text(dir / "report.json"));
    CHECK(report_csv(back) == csv);
  }

  TEST_CASE("single-result report and failures") {
    std::mt19937_64 rng(2);
    SetupId id;
    id.camera_label = "C540";
    id.machine_id = 3;
    const auto dir = temp_dir("single");
    write_report({fake_result(id, rng)}, dir);
    const std::string csv = read_text(dir / "report.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
    CHECK_FALSE(fs::exists(dir / "report.csv.tmp"));
    CHECK_THROWS_AS(write_report({}, dir), ValidationError);

    write_text(dir / "blocker", "x");
    CHECK_THROWS_AS(write_report({fake_result(id, rng)}, dir / "blocker" / "out"), IoError);
    CHECK_THROWS_AS(parse_report_json("{\"results\": 5}"), ValidationError);
  }

  TEST_CASE("format_float") {
    CHECK(format_float(0.4270) == "0.427");
    CHECK(format_float(1.0) == "1");
    CHECK(format_float(0.1 + 0.2) == "0.3");
    CHECK(round_to_written(0.1 + 0.2) == 0.3);
  }

  TEST_CASE("run config parsing") {
    const auto dir = temp_dir("config");
    const std::string text = R"({
      "sensor_preset": "dair_ladder",
      "readout_ms": {"C540": 12.5},
      "fusion_policy": "serial",
      "weights": [1, 0.5, 1],
      "constants": {"t_max_ms": 500, "lidar_registration": {"e_trans_m": 0.1, "e_rot_deg": 0.5}},
      "error_models": {"lidar": {"name": "fixed", "params": {"e_s_m": 0.05}}},
      "machines": [{"id": 1, "gpu": "A", "cpu": "B"}, {"id": 2}],
      "inputs": [
        {"setup": "C540", "sequences": [{"gt": "gt.jsonl", "detections": "m{machine}/det.jsonl", "timing": "t.csv"}]},
        {"setup": "C540&L32", "machine": 2, "mode": "compose", "sequences": [{"timing": "f.csv"}]}
      ],
      "output_dir": "results"
    })";
    const RunConfig cfg = parse_run_config(text, dir);
    CHECK(cfg.sensors.size() == 14);
    CHECK(cfg.machines.size() == 2);
    CHECK(cfg.settings.fusion == FusionPolicy::serial);
    CHECK(cfg.settings.weights == Eigen::Vector3d(1, 0.5, 1));
    CHECK(cfg.settings.constants.t_max_ms == 500.0);
    CHECK(cfg.settings.constants.lidar_registration.e_rot_rad == doctest::Approx(deg_to_rad(0.5)));
    CHECK(cfg.output_dir == dir / "results");
    CHECK(cfg.inputs.size() == 3);
    const SetupId c540_2 = parse_setup_name("C540", 2, cfg.sensors);
    REQUIRE(cfg.find_input(c540_2) != nullptr);
    CHECK(cfg.find_input(c540_2)->sequences[0].detections == dir / "m2" / "det.jsonl");
    const SetupId fused = parse_setup_name("C540&L32", 2, cfg.sensors);
    CHECK(cfg.find_input(fused)->mode == CombineMode::compose);
    CHECK(cfg.find_input(parse_setup_name("C540&L32", 1, cfg.sensors)) == nullptr);

    CHECK_THROWS_WITH_AS(load_setup_inputs(cfg, c540_2), doctest::Contains("C540@2"), MissingInputError);
    CHECK_THROWS_WITH_AS(evaluate_all(cfg), doctest::Contains("no input binding"), MissingInputError);

    CHECK_THROWS_AS(parse_run_config("{\"sensor_preset\":\"dair_ladder\"}", dir), ValidationError);
    CHECK_THROWS_AS(parse_run_config("{\"machines\":[{\"id\":1}]}", dir), ValidationError);
    CHECK_THROWS_AS(parse_run_config("[1,2]", dir), ValidationError);
  }

  TEST_CASE("scenario parsing") {
    const ScenarioFile s = parse_scenario(R"({
      "n_frames": 12, "objects": {"car": 2, "pedestrian": 1}, "seed": 9, "dropout": 0.25,
      "yaw_sigma_deg": 5.0, "velocity": [1, 0],
      "timing": {"base_detection_ms": 30, "base_tracking_ms": 5, "per_object_tracking_ms": 0.5}
    })");
    CHECK(s.scenario.n_frames == 12);
    CHECK(s.scenario.objects_per_class.at(ObjectClass::car) == 2);
    CHECK(s.scenario.seed == 9);
    CHECK(s.scenario.yaw_sigma_rad == doctest::Approx(deg_to_rad(5.0)));
    CHECK(s.scenario.fixed_velocity == Eigen::Vector2d(1, 0));
    CHECK(s.timing.per_object_tracking_ms == 0.5);
    CHECK_THROWS_AS(parse_scenario(R"({"objects": {"tricycle": 1}})"), ValidationError);
    CHECK_THROWS_AS(parse_scenario(R"({"dropout": 2})"), ValidationError);
  }
}
