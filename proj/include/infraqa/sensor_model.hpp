#pragma once

#include "infraqa/core.hpp"

#include <functional>
#include <map>
#include <string>

namespace infraqa {

struct EvalConstants {
  double x_detection_m = 150.0;
  double t_min_ms = 0.0;
  double t_max_ms = 1000.0;
  Registration camera_registration{0.00519, deg_to_rad(0.09)};
  Registration lidar_registration{0.04, deg_to_rad(0.03)};

  /// Throws ValidationError unless x_detection > 0 and t_max > t_min.
  void validate() const;
  const Registration& registration_for(const SensorSpec& spec) const;
};

/// Ground sampling distance of a camera at `distance_m`: the larger of the
/// horizontal and vertical per-pixel footprints.
double camera_gsd(const SensorSpec& spec, double distance_m);

/// Beam uncertainty of a lidar at `distance_m`: lateral spread from both
/// angular resolutions combined with the range accuracy.
double lidar_range_error(const SensorSpec& spec, double distance_m);

/// Named sensor-error model: maps (sensor, distance) to an error in meters.
struct ErrorModel {
  std::string name;
  std::map<std::string, double> params;
  std::function<double(const SensorSpec&, double)> evaluate;
};

/// Builtin models: "gsd" (camera), "beam" (lidar), and "fixed" for either
/// kind, which returns params["e_s_m"] regardless of distance.
ErrorModel make_error_model(const std::string& name, const std::map<std::string, double>& params = {});

struct ErrorModels {
  ErrorModel camera = make_error_model("gsd");
  ErrorModel lidar = make_error_model("beam");

  const ErrorModel& for_sensor(const SensorSpec& spec) const {
    return spec.kind() == SensorKind::camera ? camera : lidar;
  }
};

/// 1 - e_s / x_detection, floored at 0.
double sensor_accuracy(double e_s_m, const EvalConstants& consts);

/// Registration error sqrt(e_trans^2 + (x_detection * e_rot)^2), e_rot in radians.
double localization_error(const Registration& reg, const EvalConstants& consts);
double localization_accuracy(const Registration& reg, const EvalConstants& consts);

double composite_accuracy(double a_s, double a_l, double a_d);

/// Self-weighted mean (a_i^2 + a_j^2) / (a_i + a_j); 0 when both are 0.
double combine_composite(double a_i, double a_j);

double combine_tracking(double t_i, double t_j);

/// Fourth root of a_sld * a_t.
double accuracy_norm(double a_sld, double a_t);

struct AccuracyBreakdown {
  double a_s = 0.0;
  double a_l = 0.0;
  double a_d = 0.0;
  double a_sld = 0.0;
  double a_t = 0.0;
  double accuracy_norm = 0.0;
};

/// Single-sensor breakdown from the detection mAP and tracking HOTA.
AccuracyBreakdown single_sensor_accuracy(const SensorSpec& spec, double map_value, double hota,
                                         const EvalConstants& consts, const ErrorModels& models);

}  // namespace infraqa
