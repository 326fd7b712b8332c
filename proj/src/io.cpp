#include "infraqa/io.hpp"

#include "infraqa/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace infraqa {

using nlohmann::json;

std::string format_float(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

double round_to_written(double value) { return std::strtod(format_float(value).c_str(), nullptr); }

void warn(const std::string& message) { std::cerr << "warning: " << message << '\n'; }

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("cannot open " + path.string());
  return in;
}

double number(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) throw ValidationError(where + ": missing numeric field '" + key + "'");
  return it->get<double>();
}

ObjectRecord parse_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": object entry is not a JSON object");
  ObjectRecord o;
  auto cls = j.find("cls");
  if (cls == j.end() || !cls->is_string()) throw ValidationError(where + ": missing class");
  const auto parsed = parse_object_class(cls->get<std::string>());
  if (!parsed) throw ValidationError(where + ": unknown class '" + cls->get<std::string>() + "'");
  o.cls = *parsed;
  o.box.center << number(j, "x", where), number(j, "y", where), number(j, "z", where);
  o.box.length = number(j, "l", where);
  o.box.width = number(j, "w", where);
  o.box.height = number(j, "h", where);
  o.box.yaw = normalize_yaw(number(j, "yaw", where));
  if (auto s = j.find("score"); s != j.end() && !s->is_null()) {
    if (!s->is_number()) throw ValidationError(where + ": score is not a number");
    double score = s->get<double>();
    if (score < 0.0 || score > 1.0) {
      warn(where + ": score " + format_float(score) + " clamped to [0, 1]");
      score = std::clamp(score, 0.0, 1.0);
    }
    o.score = score;
  }
  if (auto t = j.find("track_id"); t != j.end() && !t->is_null()) {
    if (!t->is_number_integer()) throw ValidationError(where + ": track_id is not an integer");
    o.track_id = t->get<std::int64_t>();
  }
  return o;
}

}  // namespace

std::vector<FrameRecord> load_frames_jsonl(std::istream& in, const std::string& source) {
  std::vector<FrameRecord> frames;
  std::string line;
  for (long line_no = 1; std::getline(in, line); ++line_no) {
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ValidationError(where + ": malformed JSON (" + e.what() + ")");
    }
    if (!j.is_object()) throw ValidationError(where + ": line is not a JSON object");
    FrameRecord f;
    auto frame = j.find("frame");
    if (frame == j.end() || !frame->is_number_integer()) throw ValidationError(where + ": missing integer 'frame'");
    f.frame_index = frame->get<std::int64_t>();
    if (auto ts = j.find("ts_us"); ts != j.end()) {
      if (!ts->is_number_integer()) throw ValidationError(where + ": ts_us is not an integer");
      f.timestamp_us = ts->get<std::int64_t>();
    }
    auto objects = j.find("objects");
    if (objects == j.end() || !objects->is_array()) throw ValidationError(where + ": missing 'objects' array");
    for (const json& o : *objects) f.objects.push_back(parse_object(o, where));
    frames.push_back(std::move(f));
  }
  return frames;
}

std::vector<FrameRecord> load_frames_jsonl(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return load_frames_jsonl(in, path.string());
}

void write_frames_jsonl(std::ostream& out, const std::vector<FrameRecord>& frames) {
  for (const FrameRecord& f : frames) {
    out << "{\"frame\":" << f.frame_index << ",\"ts_us\":" << f.timestamp_us << ",\"objects\":[";
    for (std::size_t i = 0; i < f.objects.size(); ++i) {
      const ObjectRecord& o = f.objects[i];
      const Box3D& b = o.box;
      if (i) out << ',';
      out << "{\"cls\":\"" << to_string(o.cls) << "\",\"x\":" << format_float(b.center.x())
          << ",\"y\":" << format_float(b.center.y()) << ",\"z\":" << format_float(b.center.z())
          << ",\"l\":" << format_float(b.length) << ",\"w\":" << format_float(b.width)
          << ",\"h\":" << format_float(b.height) << ",\"yaw\":" << format_float(b.yaw);
      if (o.score) out << ",\"score\":" << format_float(*o.score);
      if (o.track_id) out << ",\"track_id\":" << *o.track_id;
      out << '}';
    }
    out << "]}\n";
  }
}

void write_frames_jsonl(const std::filesystem::path& path, const std::vector<FrameRecord>& frames) {
  std::ostringstream s;
  write_frames_jsonl(s, frames);
  write_file_atomic(path, s.str());
}

SequenceRecord load_sequence(const std::filesystem::path& gt_path, const std::filesystem::path& pred_path) {
  SequenceRecord seq;
  seq.sequence_id = gt_path.stem().string();
  seq.gt_frames = load_frames_jsonl(gt_path);
  seq.pred_frames = load_frames_jsonl(pred_path);
  const auto violations = validate_sequence(seq);
  if (!violations.empty()) {
    const Violation& v = violations.front();
    throw ValidationError(v.where + " frame " + std::to_string(v.frame_index) + " field " + v.field + ": " +
                          v.message);
  }
  return seq;
}

std::vector<TimingRecord> load_timing_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) return {};
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "frame,t_detection_ms,t_tracking_ms")
    throw ValidationError(source + ": expected header 'frame,t_detection_ms,t_tracking_ms'");

  std::vector<TimingRecord> out;
  for (long row = 1; std::getline(in, line); ++row) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = source + " row " + std::to_string(row);
    std::istringstream fields(line);
    std::string a, b, c, extra;
    if (!std::getline(fields, a, ',') || !std::getline(fields, b, ',') || !std::getline(fields, c, ',') ||
        std::getline(fields, extra, ','))
      throw ValidationError(where + ": expected three columns");
    TimingRecord t;
    char* end = nullptr;
    t.frame_index = std::strtoll(a.c_str(), &end, 10);
    if (a.empty() || *end) throw ValidationError(where + ": bad frame index");
    t.t_detection_ms = std::strtod(b.c_str(), &end);
    if (b.empty() || *end) throw ValidationError(where + ": bad t_detection_ms");
    t.t_tracking_ms = std::strtod(c.c_str(), &end);
    if (c.empty() || *end) throw ValidationError(where + ": bad t_tracking_ms");
    if (!(t.t_detection_ms >= 0.0) || !(t.t_tracking_ms >= 0.0))
      throw ValidationError(where + ": negative duration");
    out.push_back(t);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const TimingRecord& x, const TimingRecord& y) { return x.frame_index < y.frame_index; });
  return out;
}

std::vector<TimingRecord> load_timing_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return load_timing_csv(in, path.string());
}

void write_timing_csv(const std::filesystem::path& path, const std::vector<TimingRecord>& timing) {
  std::ostringstream s;
  s << "frame,t_detection_ms,t_tracking_ms\n";
  for (const TimingRecord& t : timing)
    s << t.frame_index << ',' << format_float(t.t_detection_ms) << ',' << format_float(t.t_tracking_ms) << '\n';
  write_file_atomic(path, s.str());
}

std::optional<ObjectClass> reduce_dair_class(std::string_view source) {
  std::string s(source);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  static const std::map<std::string, ObjectClass> table = {
      {"pedestrian", ObjectClass::pedestrian},
      {"bicycle", ObjectClass::bike},  {"cyclist", ObjectClass::bike},
      {"scooter", ObjectClass::bike},  {"motorcyclist", ObjectClass::bike},
      {"car", ObjectClass::car},       {"van", ObjectClass::car},
      {"truck", ObjectClass::truck},   {"bus", ObjectClass::truck},
  };
  auto it = table.find(s);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

namespace {

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

Eigen::Matrix3d matrix3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw ValidationError(where + ": expected a 3x3 array");
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r) {
    if (!j[r].is_array() || j[r].size() != 3) throw ValidationError(where + ": expected a 3x3 array");
    for (int c = 0; c < 3; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

Eigen::Vector3d vector3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw ValidationError(where + ": expected 3 values");
  Eigen::Vector3d v;
  for (int i = 0; i < 3; ++i) v(i) = j[i].is_array() ? j[i].at(0).get<double>() : j[i].get<double>();
  return v;
}

}  // namespace

std::vector<FrameRecord> load_labels_dair(const std::filesystem::path& label_dir,
                                          const std::filesystem::path& calib_dir) {
  if (!std::filesystem::is_directory(label_dir)) throw MissingInputError("no frames found in " + label_dir.string());
  std::vector<std::pair<std::int64_t, std::filesystem::path>> files;
  for (const auto& entry : std::filesystem::directory_iterator(label_dir)) {
    if (entry.path().extension() != ".json") continue;
    const std::string stem = entry.path().stem().string();
    if (stem.empty() || !std::all_of(stem.begin(), stem.end(), [](unsigned char c) { return std::isdigit(c); }))
      throw ValidationError(entry.path().string() + ": label file stem is not a frame number");
    files.emplace_back(std::stoll(stem), entry.path());
  }
  if (files.empty()) throw MissingInputError("no frames found in " + label_dir.string());
  std::sort(files.begin(), files.end());

  std::vector<FrameRecord> frames;
  for (const auto& [index, path] : files) {
    const auto calib_path = calib_dir / path.filename();
    if (!std::filesystem::exists(calib_path)) throw MissingInputError("missing calibration " + calib_path.string());
    const json calib = read_json_file(calib_path);
    const Eigen::Matrix3d rot = matrix3(calib.at("rotation"), calib_path.string());
    const Eigen::Vector3d trans = vector3(calib.at("translation"), calib_path.string());
    const double yaw_offset = std::atan2(rot(1, 0), rot(0, 0));

    const json labels = read_json_file(path);
    if (!labels.is_array()) throw ValidationError(path.string() + ": expected a JSON array of objects");
    FrameRecord f;
    f.frame_index = index;
    f.timestamp_us = index * 100000;
    for (const json& obj : labels) {
      const std::string type = obj.at("type").get<std::string>();
      const auto cls = reduce_dair_class(type);
      if (!cls) throw ValidationError(path.string() + ": unknown source class '" + type + "'");
      const json& loc = obj.at("3d_location");
      const json& dim = obj.at("3d_dimensions");
      auto num = [](const json& v) { return v.is_string() ? std::stod(v.get<std::string>()) : v.get<double>(); };
      ObjectRecord o;
      o.cls = *cls;
      o.box.center = rot * Eigen::Vector3d(num(loc.at("x")), num(loc.at("y")), num(loc.at("z"))) + trans;
      o.box.length = num(dim.at("l"));
      o.box.width = num(dim.at("w"));
      o.box.height = num(dim.at("h"));
      o.box.yaw = normalize_yaw(num(obj.at("rotation")) + yaw_offset);
      if (auto t = obj.find("track_id"); t != obj.end() && !t->is_null())
        o.track_id = t->is_string() ? std::stoll(t->get<std::string>()) : t->get<std::int64_t>();
      f.objects.push_back(o);
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

CalibrationSet read_calibration(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  CalibrationSet c;
  c.intrinsics = matrix3(j.at("intrinsics"), path.string());
  c.rotation = matrix3(j.at("rotation"), path.string());
  c.translation = vector3(j.at("translation"), path.string());
  c.validate();
  return c;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << contents;
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

}  // namespace infraqa
