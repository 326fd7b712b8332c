#include "infraqa/config.hpp"

#include "infraqa/error.hpp"
#include "infraqa/io.hpp"
#include "infraqa/ladder.hpp"
#include "infraqa/parallel.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace infraqa {

using nlohmann::json;

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("field '") + key + "' has the wrong type");
  }
}

template <typename T>
T require(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) throw ValidationError(where + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ValidationError(where + ": field '" + key + "' has the wrong type");
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json parse_json(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

Registration parse_registration(const json& j, Registration fallback) {
  if (!j.is_object()) throw ValidationError("registration must be an object");
  fallback.e_trans_m = get_or(j, "e_trans_m", fallback.e_trans_m);
  if (j.contains("e_rot_deg")) fallback.e_rot_rad = deg_to_rad(get_or(j, "e_rot_deg", 0.0));
  return fallback;
}

SensorSpec parse_sensor(const json& j) {
  SensorSpec s;
  s.label = require<std::string>(j, "label", "sensor");
  const std::string where = "sensor '" + s.label + "'";
  const std::string kind = require<std::string>(j, "kind", where);
  s.sample_rate_hz = get_or(j, "sample_rate_hz", 10.0);
  s.readout_ms = get_or(j, "readout_ms", 0.0);
  if (kind == "camera") {
    CameraParams c;
    c.width_px = require<int>(j, "width_px", where);
    c.height_px = require<int>(j, "height_px", where);
    c.hfov_rad = deg_to_rad(require<double>(j, "hfov_deg", where));
    c.vfov_rad = deg_to_rad(require<double>(j, "vfov_deg", where));
    s.params = c;
  } else if (kind == "lidar") {
    LidarParams l;
    l.vertical_layers = require<int>(j, "vertical_layers", where);
    l.hfov_rad = deg_to_rad(require<double>(j, "hfov_deg", where));
    l.vfov_rad = deg_to_rad(require<double>(j, "vfov_deg", where));
    l.hor_ang_res_rad = deg_to_rad(require<double>(j, "hor_ang_res_deg", where));
    l.vert_ang_res_rad = deg_to_rad(require<double>(j, "vert_ang_res_deg", where));
    l.range_accuracy_m = require<double>(j, "range_accuracy_m", where);
    s.params = l;
  } else {
    throw ValidationError(where + ": kind must be 'camera' or 'lidar'");
  }
  if (auto r = j.find("registration"); r != j.end() && !r->is_null()) s.registration = parse_registration(*r, {});
  validate_sensor(s);
  return s;
}

ErrorModel parse_error_model(const json& j) {
  if (j.is_string()) return make_error_model(j.get<std::string>());
  std::map<std::string, double> params;
  if (auto p = j.find("params"); p != j.end())
    for (const auto& [k, v] : p->items()) params[k] = v.get<double>();
  return make_error_model(require<std::string>(j, "name", "error model"), params);
}

std::string substitute_machine(std::string s, int machine_id) {
  const std::string key = "{machine}";
  for (auto pos = s.find(key); pos != std::string::npos; pos = s.find(key, pos))
    s.replace(pos, key.size(), std::to_string(machine_id));
  return s;
}

std::filesystem::path resolve(const std::filesystem::path& base, const json& j, const char* key, int machine_id) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  std::filesystem::path p = substitute_machine(it->get<std::string>(), machine_id);
  return p.is_absolute() ? p : base / p;
}

}  // namespace

const InputBinding* RunConfig::find_input(const SetupId& id) const {
  for (const InputBinding& b : inputs)
    if (b.setup == id) return &b;
  return nullptr;
}

std::vector<SensorSpec> dair_ladder_sensors() {
  std::vector<SensorSpec> out;
  for (int rows : kCameraLadder) {
    CameraParams c;
    c.height_px = rows;
    c.width_px = rows * 16 / 9;
    c.hfov_rad = deg_to_rad(48.1);
    c.vfov_rad = deg_to_rad(27.7);
    SensorSpec s;
    s.label = "C" + std::to_string(rows);
    s.sample_rate_hz = 25.0;
    s.params = c;
    out.push_back(s);
  }
  for (int layers : kLidarLadder) {
    // Each halving doubles the vertical spacing of the retained beams.
    const double vert_res_deg = 0.13 * (256.0 / layers);
    LidarParams l;
    l.vertical_layers = layers;
    l.hfov_rad = deg_to_rad(100.0);
    l.vfov_rad = deg_to_rad(std::min(40.0, vert_res_deg * layers));
    l.hor_ang_res_rad = deg_to_rad(0.09);
    l.vert_ang_res_rad = deg_to_rad(vert_res_deg);
    l.range_accuracy_m = 0.03;
    SensorSpec s;
    s.label = "L" + std::to_string(layers);
    s.sample_rate_hz = 10.0;
    s.params = l;
    out.push_back(s);
  }
  return out;
}

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir) {
  const json root = parse_json(text, "run config");
  if (!root.is_object()) throw ValidationError("run config must be a JSON object");
  RunConfig cfg;
  PipelineSettings& st = cfg.settings;

  try {
    if (auto c = root.find("constants"); c != root.end()) {
      st.constants.x_detection_m = get_or(*c, "x_detection_m", st.constants.x_detection_m);
      st.constants.t_min_ms = get_or(*c, "t_min_ms", st.constants.t_min_ms);
      st.constants.t_max_ms = get_or(*c, "t_max_ms", st.constants.t_max_ms);
      if (auto r = c->find("camera_registration"); r != c->end())
        st.constants.camera_registration = parse_registration(*r, st.constants.camera_registration);
      if (auto r = c->find("lidar_registration"); r != c->end())
        st.constants.lidar_registration = parse_registration(*r, st.constants.lidar_registration);
    }
    st.constants.validate();

    if (auto m = root.find("error_models"); m != root.end()) {
      if (auto c = m->find("camera"); c != m->end()) st.error_models.camera = parse_error_model(*c);
      if (auto l = m->find("lidar"); l != m->end()) st.error_models.lidar = parse_error_model(*l);
    }

    const std::string policy = get_or<std::string>(root, "fusion_policy", "parallel");
    if (policy == "parallel") {
      st.fusion = FusionPolicy::parallel;
    } else if (policy == "serial") {
      st.fusion = FusionPolicy::serial;
    } else {
      throw ValidationError("fusion_policy must be 'parallel' or 'serial'");
    }

    if (auto w = root.find("weights"); w != root.end()) {
      if (!w->is_array() || w->size() != 3) throw ValidationError("weights must be a triple");
      for (int k = 0; k < 3; ++k) st.weights(k) = (*w)[k].get<double>();
      if (((st.weights.array() < 0.0) || (st.weights.array() > 1.0)).any())
        throw ValidationError("weights must lie in [0, 1]");
    }
    st.hota.class_aware = get_or(root, "class_aware_hota", true);
    st.threads = worker_count();

    const std::string preset = get_or<std::string>(root, "sensor_preset", "");
    if (preset == "dair_ladder") {
      cfg.sensors = dair_ladder_sensors();
    } else if (!preset.empty()) {
      throw ValidationError("unknown sensor_preset '" + preset + "'");
    }
    if (auto s = root.find("sensors"); s != root.end())
      for (const json& j : *s) cfg.sensors.push_back(parse_sensor(j));
    if (auto r = root.find("readout_ms"); r != root.end()) {
      for (const auto& [label, value] : r->items()) {
        auto it = std::find_if(cfg.sensors.begin(), cfg.sensors.end(),
                               [&](const SensorSpec& s) { return s.label == label; });
        if (it == cfg.sensors.end()) throw ValidationError("readout_ms names unknown sensor '" + label + "'");
        it->readout_ms = value.get<double>();
        validate_sensor(*it);
      }
    }
    if (cfg.sensors.empty()) throw ValidationError("run config defines no sensors");

    for (const json& j : require<json>(root, "machines", "run config")) {
      MachineProfile m;
      m.machine_id = require<int>(j, "id", "machine");
      m.gpu_desc = get_or<std::string>(j, "gpu", "");
      m.cpu_desc = get_or<std::string>(j, "cpu", "");
      cfg.machines.push_back(m);
    }

    for (const json& j : get_or<json>(root, "inputs", json::array())) {
      const std::string name = require<std::string>(j, "setup", "input");
      std::vector<int> machine_ids;
      if (auto m = j.find("machine"); m != j.end()) {
        if (m->is_array()) {
          machine_ids = m->get<std::vector<int>>();
        } else {
          machine_ids.push_back(m->get<int>());
        }
      } else {
        for (const MachineProfile& mp : cfg.machines) machine_ids.push_back(mp.machine_id);
      }
      const std::string mode = get_or<std::string>(j, "mode", "measured");
      if (mode != "measured" && mode != "compose")
        throw ValidationError("input '" + name + "': mode must be 'measured' or 'compose'");
      for (int machine_id : machine_ids) {
        InputBinding b;
        b.setup = parse_setup_name(name, machine_id, cfg.sensors);
        b.mode = mode == "compose" ? CombineMode::compose : CombineMode::measured;
        if (b.mode == CombineMode::compose && b.setup.kind != SetupKind::combined)
          throw ValidationError("input '" + name + "': compose mode applies to combined setups only");
        if (cfg.find_input(b.setup)) throw ValidationError("duplicate input binding for " + b.setup.to_string());
        for (const json& seq : require<json>(j, "sequences", "input '" + name + "'")) {
          SequencePaths p;
          p.gt = resolve(base_dir, seq, "gt", machine_id);
          p.detections = resolve(base_dir, seq, "detections", machine_id);
          p.tracks = resolve(base_dir, seq, "tracks", machine_id);
          p.timing = resolve(base_dir, seq, "timing", machine_id);
          b.sequences.push_back(p);
        }
        cfg.inputs.push_back(std::move(b));
      }
    }

    cfg.output_dir = get_or<std::string>(root, "output_dir", "out");
    if (cfg.output_dir.is_relative()) cfg.output_dir = base_dir / cfg.output_dir;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("run config: ") + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_text(path), path.parent_path());
}

SetupInputs load_setup_inputs(const RunConfig& cfg, const SetupId& id) {
  const InputBinding* b = cfg.find_input(id);
  if (!b) throw MissingInputError("no input binding for setup " + id.to_string());
  SetupInputs in;
  in.mode = b->mode;
  auto need = [&](const std::filesystem::path& p, const char* what) {
    if (p.empty()) throw MissingInputError(std::string("no ") + what + " file bound for setup " + id.to_string());
    if (!std::filesystem::exists(p))
      throw MissingInputError(std::string(what) + " file " + p.string() + " of setup " + id.to_string() +
                              " does not exist");
  };
  for (const SequencePaths& p : b->sequences) {
    SequenceInputs s;
    need(p.timing, "timing");
    s.timing = load_timing_csv(p.timing);
    if (b->mode == CombineMode::measured) {
      need(p.gt, "ground-truth");
      need(p.detections, "detections");
      s.gt = load_frames_jsonl(p.gt);
      s.detections = load_frames_jsonl(p.detections);
      if (!p.tracks.empty()) {
        need(p.tracks, "tracks");
        s.tracks = load_frames_jsonl(p.tracks);
      }
    }
    in.sequences.push_back(std::move(s));
  }
  return in;
}

std::vector<SetupResult> evaluate_all(const RunConfig& cfg) {
  for (const SetupId& id : enumerate_setups(cfg.sensors, cfg.machines))
    if (!cfg.find_input(id)) throw MissingInputError("no input binding for setup " + id.to_string());
  return evaluate_setups(cfg.sensors, cfg.machines, cfg.settings,
                         [&cfg](const SetupId& id) { return load_setup_inputs(cfg, id); });
}

ScenarioFile parse_scenario(const std::string& text) {
  const json j = parse_json(text, "scenario");
  if (!j.is_object()) throw ValidationError("scenario must be a JSON object");
  ScenarioFile out;
  ScenarioConfig& c = out.scenario;
  try {
    c.n_frames = get_or(j, "n_frames", c.n_frames);
    if (auto o = j.find("objects"); o != j.end()) {
      c.objects_per_class.clear();
      for (const auto& [name, count] : o->items()) {
        const auto cls = parse_object_class(name);
        if (!cls) throw ValidationError("scenario: unknown class '" + name + "'");
        c.objects_per_class[*cls] = count.get<int>();
      }
    }
    c.max_speed_m_per_frame = get_or(j, "max_speed_m_per_frame", c.max_speed_m_per_frame);
    if (auto v = j.find("velocity"); v != j.end() && !v->is_null())
      c.fixed_velocity = Eigen::Vector2d(v->at(0).get<double>(), v->at(1).get<double>());
    if (auto a = j.find("arena"); a != j.end()) {
      c.arena_min = Eigen::Vector2d(a->at("min").at(0).get<double>(), a->at("min").at(1).get<double>());
      c.arena_max = Eigen::Vector2d(a->at("max").at(0).get<double>(), a->at("max").at(1).get<double>());
    }
    c.position_sigma_m = get_or(j, "position_sigma_m", c.position_sigma_m);
    c.yaw_sigma_rad = deg_to_rad(get_or(j, "yaw_sigma_deg", rad_to_deg(c.yaw_sigma_rad)));
    c.dropout = get_or(j, "dropout", c.dropout);
    c.false_positive_rate = get_or(j, "false_positive_rate", c.false_positive_rate);
    c.id_switch = get_or(j, "id_switch", c.id_switch);
    c.frame_period_us = get_or(j, "frame_period_us", c.frame_period_us);
    c.seed = get_or(j, "seed", c.seed);
    if (auto t = j.find("timing"); t != j.end()) {
      out.timing.base_detection_ms = get_or(*t, "base_detection_ms", 0.0);
      out.timing.base_tracking_ms = get_or(*t, "base_tracking_ms", 0.0);
      out.timing.per_object_tracking_ms = get_or(*t, "per_object_tracking_ms", 0.0);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("scenario: ") + e.what());
  }
  c.validate();
  return out;
}

ScenarioFile load_scenario(const std::filesystem::path& path) { return parse_scenario(read_text(path)); }

}  // namespace infraqa
