#include "infraqa/sensor_model.hpp"

#include "infraqa/error.hpp"

#include <algorithm>
#include <cmath>

namespace infraqa {

void EvalConstants::validate() const {
  if (!(x_detection_m > 0.0)) throw ValidationError("x_detection_m must be positive");
  if (!(t_max_ms > t_min_ms)) throw ValidationError("t_max_ms must exceed t_min_ms");
  if (!(t_min_ms >= 0.0)) throw ValidationError("t_min_ms must be non-negative");
}

const Registration& EvalConstants::registration_for(const SensorSpec& spec) const {
  if (spec.registration) return *spec.registration;
  return spec.kind() == SensorKind::camera ? camera_registration : lidar_registration;
}

double camera_gsd(const SensorSpec& spec, double distance_m) {
  if (spec.kind() != SensorKind::camera)
    throw ValidationError("camera_gsd: sensor '" + spec.label + "' is not a camera");
  const CameraParams& c = spec.camera();
  const double gsd_w = 2.0 * distance_m * std::tan(c.hfov_rad / 2.0) / c.width_px;
  const double gsd_h = 2.0 * distance_m * std::tan(c.vfov_rad / 2.0) / c.height_px;
  return std::max(gsd_w, gsd_h);
}

double lidar_range_error(const SensorSpec& spec, double distance_m) {
  if (spec.kind() != SensorKind::lidar)
    throw ValidationError("lidar_range_error: sensor '" + spec.label + "' is not a lidar");
  const LidarParams& l = spec.lidar();
  return std::hypot(distance_m * l.hor_ang_res_rad, distance_m * l.vert_ang_res_rad, l.range_accuracy_m);
}

ErrorModel make_error_model(const std::string& name, const std::map<std::string, double>& params) {
  ErrorModel m{name, params, {}};
  if (name == "gsd") {
    m.evaluate = [](const SensorSpec& s, double d) { return camera_gsd(s, d); };
  } else if (name == "beam") {
    m.evaluate = [](const SensorSpec& s, double d) { return lidar_range_error(s, d); };
  } else if (name == "fixed") {
    auto it = params.find("e_s_m");
    if (it == params.end() || !(it->second >= 0.0))
      throw ValidationError("error model 'fixed' needs a non-negative e_s_m");
    const double e = it->second;
    m.evaluate = [e](const SensorSpec&, double) { return e; };
  } else {
    throw ValidationError("unknown error model '" + name + "'");
  }
  return m;
}

double sensor_accuracy(double e_s_m, const EvalConstants& consts) {
  return std::max(0.0, 1.0 - e_s_m / consts.x_detection_m);
}

double localization_error(const Registration& reg, const EvalConstants& consts) {
  return std::hypot(reg.e_trans_m, consts.x_detection_m * reg.e_rot_rad);
}

double localization_accuracy(const Registration& reg, const EvalConstants& consts) {
  return std::max(0.0, 1.0 - localization_error(reg, consts) / consts.x_detection_m);
}

double composite_accuracy(double a_s, double a_l, double a_d) { return a_s * a_l * a_d; }

double combine_composite(double a_i, double a_j) {
  const double sum = a_i + a_j;
  if (sum <= 0.0) return 0.0;
  return (a_i * a_i + a_j * a_j) / sum;
}

double combine_tracking(double t_i, double t_j) { return (t_i + t_j) / 2.0; }

double accuracy_norm(double a_sld, double a_t) { return std::sqrt(std::sqrt(a_sld * a_t)); }

AccuracyBreakdown single_sensor_accuracy(const SensorSpec& spec, double map_value, double hota,
                                         const EvalConstants& consts, const ErrorModels& models) {
  AccuracyBreakdown b;
  b.a_s = sensor_accuracy(models.for_sensor(spec).evaluate(spec, consts.x_detection_m), consts);
  b.a_l = localization_accuracy(consts.registration_for(spec), consts);
  b.a_d = map_value;
  b.a_sld = composite_accuracy(b.a_s, b.a_l, b.a_d);
  b.a_t = hota;
  b.accuracy_norm = accuracy_norm(b.a_sld, b.a_t);
  return b;
}

}  // namespace infraqa
