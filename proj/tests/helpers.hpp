#pragma once

#include "infraqa/core.hpp"

#include <random>

namespace testing {

inline infraqa::Box3D box(double x, double y, double z, double l, double w, double h, double yaw = 0.0) {
  infraqa::Box3D b;
  b.center << x, y, z;
  b.length = l;
  b.width = w;
  b.height = h;
  b.yaw = yaw;
  return b;
}

inline infraqa::ObjectRecord object(infraqa::ObjectClass cls, const infraqa::Box3D& b,
                                    std::optional<double> score = std::nullopt,
                                    std::optional<std::int64_t> track_id = std::nullopt) {
  infraqa::ObjectRecord o;
  o.cls = cls;
  o.box = b;
  o.score = score;
  o.track_id = track_id;
  return o;
}

inline infraqa::FrameRecord frame(std::int64_t index, std::vector<infraqa::ObjectRecord> objects = {}) {
  infraqa::FrameRecord f;
  f.frame_index = index;
  f.timestamp_us = index * 100000;
  f.objects = std::move(objects);
  return f;
}

/// Random upright box near the origin.
inline infraqa::Box3D random_box(std::mt19937_64& rng, double spread = 2.0) {
  std::uniform_real_distribution<double> pos(-spread, spread), dim(0.3, 4.0), yaw(-M_PI, M_PI);
  return box(pos(rng), pos(rng), pos(rng) * 0.25, dim(rng), dim(rng), dim(rng), yaw(rng));
}

}  // namespace testing
