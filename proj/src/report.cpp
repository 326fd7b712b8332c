#include "infraqa/report.hpp"

#include "infraqa/error.hpp"
#include "infraqa/io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace infraqa {

using nlohmann::ordered_json;

namespace {

std::string_view kind_name(SetupKind k) {
  switch (k) {
    case SetupKind::camera_only: return "camera_only";
    case SetupKind::lidar_only: return "lidar_only";
    case SetupKind::combined: return "combined";
  }
  return "?";
}

SetupKind parse_kind(const std::string& s) {
  if (s == "camera_only") return SetupKind::camera_only;
  if (s == "lidar_only") return SetupKind::lidar_only;
  if (s == "combined") return SetupKind::combined;
  throw ValidationError("report: unknown setup kind '" + s + "'");
}

double r9(double v) { return round_to_written(v); }

}  // namespace

std::string report_csv(const std::vector<SetupResult>& results) {
  std::ostringstream s;
  s << "setup,machine,mAP,A_sld,HOTA,A_norm,L_norm,R_norm,Q_mag\n";
  for (const SetupResult& r : results) {
    s << r.setup.sensor_name() << ',' << r.setup.machine_id << ',' << format_float(r.accuracy.a_d) << ','
      << format_float(r.accuracy.a_sld) << ',' << format_float(r.accuracy.a_t) << ','
      << format_float(r.q.accuracy_norm) << ',' << format_float(r.q.latency_norm) << ','
      << format_float(r.q.reliability_norm) << ',' << format_float(r.q.magnitude) << '\n';
  }
  return s.str();
}

std::string qspace_csv(const std::vector<SetupResult>& results) {
  std::ostringstream s;
  s << "setup,machine,A_norm,L_norm,R_norm\n";
  for (const SetupResult& r : results) {
    s << r.setup.sensor_name() << ',' << r.setup.machine_id << ',' << format_float(r.q.accuracy_norm) << ','
      << format_float(r.q.latency_norm) << ',' << format_float(r.q.reliability_norm) << '\n';
  }
  return s.str();
}

std::string report_json(const std::vector<SetupResult>& results) {
  ordered_json arr = ordered_json::array();
  for (const SetupResult& r : results) {
    ordered_json j;
    j["setup"] = r.setup.sensor_name();
    j["machine"] = r.setup.machine_id;
    j["kind"] = kind_name(r.setup.kind);
    j["camera"] = r.setup.camera_label ? ordered_json(*r.setup.camera_label) : ordered_json(nullptr);
    j["lidar"] = r.setup.lidar_label ? ordered_json(*r.setup.lidar_label) : ordered_json(nullptr);
    const AccuracyBreakdown& a = r.accuracy;
    j["accuracy"] = {{"a_s", r9(a.a_s)},   {"a_l", r9(a.a_l)}, {"a_d", r9(a.a_d)},
                     {"a_sld", r9(a.a_sld)}, {"a_t", r9(a.a_t)}, {"accuracy_norm", r9(a.accuracy_norm)}};
    const LatencyBreakdown& l = r.latency;
    j["latency"] = {{"t_sensor_readout_ms", r9(l.t_sensor_readout_ms)},
                    {"t_detection_ms", r9(l.t_detection_ms)},
                    {"t_tracking_ms", r9(l.t_tracking_ms)},
                    {"total_ms", r9(l.total_ms)},
                    {"latency_norm", r9(l.latency_norm)}};
    const ReliabilityBreakdown& b = r.reliability;
    j["reliability"] = {{"var_r1", r9(b.var_r1)},       {"var_r2", r9(b.var_r2)},
                        {"var_r3", r9(b.var_r3)},       {"var_r4", r9(b.var_r4)},
                        {"cov_r1_r2", r9(b.cov_r1_r2)}, {"cov_r1_r3", r9(b.cov_r1_r3)},
                        {"raw", r9(b.raw)},             {"reliability_norm", r9(b.reliability_norm)}};
    j["q"] = {{"accuracy_norm", r9(r.q.accuracy_norm)},
              {"latency_norm", r9(r.q.latency_norm)},
              {"reliability_norm", r9(r.q.reliability_norm)},
              {"magnitude", r9(r.q.magnitude)}};
    arr.push_back(std::move(j));
  }
  ordered_json root;
  root["results"] = std::move(arr);
  return root.dump(2) + "\n";
}

void write_report(const std::vector<SetupResult>& results, const std::filesystem::path& out_dir) {
  if (results.empty()) throw ValidationError("no results to report");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir))
    throw IoError("cannot create output directory " + out_dir.string());
  write_file_atomic(out_dir / "report.csv", report_csv(results));
  write_file_atomic(out_dir / "report.json", report_json(results));
  write_file_atomic(out_dir / "qspace.csv", qspace_csv(results));
}

std::vector<SetupResult> parse_report_json(const std::string& text) {
  std::vector<SetupResult> out;
  try {
    const ordered_json root = ordered_json::parse(text);
    for (const ordered_json& j : root.at("results")) {
      SetupResult r;
      r.setup.kind = parse_kind(j.at("kind").get<std::string>());
      if (!j.at("camera").is_null()) r.setup.camera_label = j.at("camera").get<std::string>();
      if (!j.at("lidar").is_null()) r.setup.lidar_label = j.at("lidar").get<std::string>();
      r.setup.machine_id = j.at("machine").get<int>();
      const auto& a = j.at("accuracy");
      r.accuracy = {a.at("a_s").get<double>(),   a.at("a_l").get<double>(), a.at("a_d").get<double>(),
                    a.at("a_sld").get<double>(), a.at("a_t").get<double>(), a.at("accuracy_norm").get<double>()};
      const auto& l = j.at("latency");
      r.latency = {l.at("t_sensor_readout_ms").get<double>(), l.at("t_detection_ms").get<double>(),
                   l.at("t_tracking_ms").get<double>(), l.at("total_ms").get<double>(),
                   l.at("latency_norm").get<double>()};
      const auto& b = j.at("reliability");
      r.reliability = {b.at("var_r1").get<double>(),    b.at("var_r2").get<double>(),
                       b.at("var_r3").get<double>(),    b.at("var_r4").get<double>(),
                       b.at("cov_r1_r2").get<double>(), b.at("cov_r1_r3").get<double>(),
                       b.at("raw").get<double>(),       b.at("reliability_norm").get<double>()};
      const auto& q = j.at("q");
      r.q = {q.at("accuracy_norm").get<double>(), q.at("latency_norm").get<double>(),
             q.at("reliability_norm").get<double>(), q.at("magnitude").get<double>()};
      out.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("report: ") + e.what());
  }
  return out;
}

std::vector<SetupResult> read_report_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return parse_report_json(s.str());
}

}  // namespace infraqa
