#pragma once

#include "infraqa/pipeline.hpp"
#include "infraqa/synth.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace infraqa {

/// Result files of one sequence, relative paths already resolved.
struct SequencePaths {
  std::filesystem::path gt;
  std::filesystem::path detections;
  std::filesystem::path tracks;  // optional
  std::filesystem::path timing;
};

struct InputBinding {
  SetupId setup;
  CombineMode mode = CombineMode::measured;
  std::vector<SequencePaths> sequences;
};

struct RunConfig {
  std::vector<SensorSpec> sensors;
  std::vector<MachineProfile> machines;
  PipelineSettings settings;
  std::vector<InputBinding> inputs;
  std::filesystem::path output_dir;

  /// Binding for `id`, or nullptr.
  const InputBinding* find_input(const SetupId& id) const;
};

/// Eight cameras (2160..135 rows, 16:9) and six lidars (256..8 layers)
/// derived from the DAIR-V2X infrastructure sensors.
std::vector<SensorSpec> dair_ladder_sensors();

/// Parses a JSON run configuration. Angles are given in degrees. Relative
/// paths resolve against the file's directory. Every field except "sensors"
/// (or "sensor_preset": "dair_ladder"), "machines" and "inputs" has a default.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

/// Reads every bound input file for one setup; MissingInputError names the setup.
SetupInputs load_setup_inputs(const RunConfig& cfg, const SetupId& id);

/// Checks that every enumerated setup has a binding, then evaluates.
std::vector<SetupResult> evaluate_all(const RunConfig& cfg);

/// Scenario JSON: {"n_frames", "objects": {"car": 2, ...}, "max_speed_m_per_frame",
/// "velocity": [vx, vy], "arena": {"min": [x, y], "max": [x, y]},
/// "position_sigma_m", "yaw_sigma_deg", "dropout", "false_positive_rate",
/// "id_switch", "frame_period_us", "seed", "timing": {...}}.
struct ScenarioFile {
  ScenarioConfig scenario;
  TimingModel timing;
};

ScenarioFile parse_scenario(const std::string& text);
ScenarioFile load_scenario(const std::filesystem::path& path);

}  // namespace infraqa
