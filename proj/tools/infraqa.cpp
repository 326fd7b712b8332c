#include "infraqa/config.hpp"
#include "infraqa/error.hpp"
#include "infraqa/io.hpp"
#include "infraqa/ladder.hpp"
#include "infraqa/report.hpp"
#include "infraqa/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>

namespace {

using namespace infraqa;

constexpr int kExitValidation = 2;
constexpr int kExitMissing = 3;
constexpr int kExitIo = 4;

int cmd_evaluate(const std::filesystem::path& config_path, const std::string& out_override) {
  const RunConfig cfg = load_run_config(config_path);
  const std::vector<SetupResult> results = evaluate_all(cfg);
  const std::filesystem::path out = out_override.empty() ? cfg.output_dir : std::filesystem::path(out_override);
  write_report(results, out);
  std::cout << results.size() << " results written to " << out.string() << '\n';
  return 0;
}

int cmd_enumerate(const std::filesystem::path& config_path) {
  const RunConfig cfg = load_run_config(config_path);
  const auto setups = enumerate_setups(cfg.sensors, cfg.machines);
  for (const SetupId& id : setups) std::cout << id.to_string() << '\n';
  const std::size_t n_setups = cfg.machines.empty() ? 0 : setups.size() / cfg.machines.size();
  std::cout << "sensor setups: " << n_setups << ", total combinations: " << setups.size() << '\n';
  return 0;
}

struct LidarArgs {
  std::string input, output, calib, image_size = "1920x1080";
  int target = 0;
  int source_layers = 0;
  int vertical_layers = 300;
  double vert_res_deg = 0.13;
  double vfov_deg = 40.0;
};

int cmd_ladder_lidar(const LidarArgs& a) {
  PointCloud cloud = read_point_cloud(a.input);
  if (!cloud.has_layers()) {
    SensorSpec spec;
    spec.label = "source";
    LidarParams l;
    l.vertical_layers = a.vertical_layers;
    l.hfov_rad = deg_to_rad(100.0);
    l.vfov_rad = deg_to_rad(a.vfov_deg);
    l.hor_ang_res_rad = deg_to_rad(0.09);
    l.vert_ang_res_rad = deg_to_rad(a.vert_res_deg);
    l.range_accuracy_m = 0.03;
    spec.params = l;
    cloud = assign_layers(cloud, spec);
  }
  const int source = a.source_layers > 0 ? a.source_layers : cloud.num_layers;
  PointCloud out = a.target > 0 ? downsample_layers(cloud, source, a.target) : cloud;
  if (!a.calib.empty()) {
    int w = 0, h = 0;
    if (std::sscanf(a.image_size.c_str(), "%dx%d", &w, &h) != 2 || w <= 0 || h <= 0)
      throw ValidationError("--image-size must look like 1920x1080");
    out = crop_to_camera_fov(out, read_calibration(a.calib), w, h);
  }
  write_point_cloud(a.output, out);
  std::cout << out.size() << " points, " << out.num_layers << " layers\n";
  return 0;
}

int cmd_ladder_camera(const std::string& input, const std::string& output, int target) {
  const RasterImage img = read_png(input);
  const RasterImage out = resample_image(img, target);
  write_png(output, out);
  std::cout << out.width << 'x' << out.height << '\n';
  return 0;
}

int cmd_synth(const std::filesystem::path& scenario_path, const std::filesystem::path& out_dir) {
  const ScenarioFile sf = load_scenario(scenario_path);
  const SequenceRecord gt = generate_scenario(sf.scenario);
  const CorruptedSequence pred = corrupt_detections(gt.gt_frames, sf.scenario);
  const std::vector<int> counts = objects_per_frame(gt.gt_frames);
  const auto timing = simulate_timing(sf.timing, counts, gt.gt_frames.empty() ? 0 : gt.gt_frames.front().frame_index);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string());
  write_frames_jsonl(out_dir / "gt.jsonl", gt.gt_frames);
  write_frames_jsonl(out_dir / "pred.jsonl", pred.predictions);
  write_timing_csv(out_dir / "timing.csv", timing);

  nlohmann::ordered_json log;
  log["seed"] = sf.scenario.seed;
  log["kept"] = pred.log.kept_count();
  log["dropped"] = pred.log.dropped_count();
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  for (const CorruptionEntry& e : pred.log.entries) {
    entries.push_back({{"frame", e.frame_index},
                       {"gt_track_id", e.gt_track_id},
                       {"pred_track_id", e.pred_track_id},
                       {"dropped", e.dropped},
                       {"offset", {round_to_written(e.offset.x()), round_to_written(e.offset.y()),
                                   round_to_written(e.offset.z())}},
                       {"yaw_offset", round_to_written(e.yaw_offset)}});
  }
  log["entries"] = std::move(entries);
  nlohmann::ordered_json fps = nlohmann::ordered_json::array();
  for (const FalsePositiveEntry& f : pred.log.false_positives)
    fps.push_back({{"frame", f.frame_index}, {"pred_track_id", f.pred_track_id}});
  log["false_positives"] = std::move(fps);
  write_file_atomic(out_dir / "corruption_log.json", log.dump(2) + "\n");
  std::cout << gt.gt_frames.size() << " frames written to " << out_dir.string() << '\n';
  return 0;
}

int cmd_report(const std::filesystem::path& from, const std::string& out_override) {
  const auto results = read_report_json(from);
  const std::filesystem::path out = out_override.empty() ? from.parent_path() : std::filesystem::path(out_override);
  write_report(results, out);
  std::cout << results.size() << " results written to " << out.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quality assessment of roadside sensor setups"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate every configured setup and write reports");
  evaluate->add_option("--config", config_path, "Run configuration (JSON)")->required();
  evaluate->add_option("--out", out_dir, "Override the configured output directory");

  auto* enumerate = app.add_subcommand("enumerate", "List the setups a configuration defines");
  enumerate->add_option("--config", config_path, "Run configuration (JSON)")->required();

  auto* ladder = app.add_subcommand("ladder", "Simulate lower sensor resolutions");
  ladder->require_subcommand(1);
  LidarArgs lidar_args;
  auto* lidar = ladder->add_subcommand("lidar", "Assign beams, thin layers and optionally crop to a camera FOV");
  lidar->add_option("--input", lidar_args.input, "Point cloud (float32 xyzi)")->required();
  lidar->add_option("--output", lidar_args.output, "Output point cloud")->required();
  lidar->add_option("--target", lidar_args.target, "Target layer count (omit to keep)");
  lidar->add_option("--source-layers", lidar_args.source_layers, "Layer count of the input");
  lidar->add_option("--vertical-layers", lidar_args.vertical_layers, "Beams of the source sensor");
  lidar->add_option("--vert-res-deg", lidar_args.vert_res_deg, "Vertical angular resolution");
  lidar->add_option("--vfov-deg", lidar_args.vfov_deg, "Vertical FOV");
  lidar->add_option("--calib", lidar_args.calib, "Calibration JSON for FOV cropping");
  lidar->add_option("--image-size", lidar_args.image_size, "Camera image size WxH");

  std::string cam_in, cam_out;
  int cam_target = 0;
  auto* camera = ladder->add_subcommand("camera", "Resample a 1920x1080 image to a ladder height");
  camera->add_option("--input", cam_in, "Source PNG")->required();
  camera->add_option("--output", cam_out, "Output PNG")->required();
  camera->add_option("--target", cam_target, "Target height in pixels")->required();

  std::string scenario_path, synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic scenario with corrupted detections");
  synth->add_option("--scenario", scenario_path, "Scenario configuration (JSON)")->required();
  synth->add_option("--out", synth_out, "Output directory")->required();

  std::string report_from;
  auto* report = app.add_subcommand("report", "Regenerate report files from report.json");
  report->add_option("--from", report_from, "report.json")->required();
  report->add_option("--out", out_dir, "Output directory (defaults to the input's)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*evaluate) return cmd_evaluate(config_path, out_dir);
    if (*enumerate) return cmd_enumerate(config_path);
    if (*lidar) return cmd_ladder_lidar(lidar_args);
    if (*camera) return cmd_ladder_camera(cam_in, cam_out, cam_target);
    if (*synth) return cmd_synth(scenario_path, synth_out);
    if (*report) return cmd_report(report_from, out_dir);
  } catch (const MissingInputError& e) {
    std::cerr << "missing input: " << e.what() << '\n';
    return kExitMissing;
  } catch (const ValidationError& e) {
    std::cerr << "validation failed: " << e.what() << '\n';
    return kExitValidation;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return 0;
}
