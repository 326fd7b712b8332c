#pragma once

#include "infraqa/core.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace infraqa {

/// Convex polygon with counter-clockwise vertices; empty means no area.
template <typename Scalar>
struct ConvexPolygon2 {
  using Point = Eigen::Matrix<Scalar, 2, 1>;
  std::vector<Point> vertices;

  static ConvexPolygon2 from_corners(const Eigen::Matrix<Scalar, 2, 4>& corners) {
    ConvexPolygon2 p;
    p.vertices.reserve(4);
    for (int i = 0; i < 4; ++i) p.vertices.push_back(corners.col(i));
    return p;
  }

  static ConvexPolygon2 footprint(const Box3<Scalar>& box) { return from_corners(bev_corners(box)); }
};

using ConvexPolygon2D = ConvexPolygon2<double>;

namespace detail {

template <typename Scalar>
Scalar cross2(const Eigen::Matrix<Scalar, 2, 1>& a, const Eigen::Matrix<Scalar, 2, 1>& b) {
  return a.x() * b.y() - a.y() * b.x();
}

}  // namespace detail

/// Signed shoelace area; positive for counter-clockwise polygons.
template <typename Scalar>
Scalar signed_area(std::span<const Eigen::Matrix<Scalar, 2, 1>> pts) {
  const std::size_t n = pts.size();
  if (n < 3) return Scalar(0);
  Scalar acc(0);
  for (std::size_t i = 0; i < n; ++i) acc += detail::cross2(pts[i], pts[(i + 1) % n]);
  return acc / Scalar(2);
}

template <typename Scalar>
Scalar signed_area(const ConvexPolygon2<Scalar>& poly) {
  return signed_area<Scalar>(std::span<const Eigen::Matrix<Scalar, 2, 1>>(poly.vertices));
}

/// Distance below which boundary contact counts as no overlap.
inline constexpr double kContactTolerance = 1e-9;

/// Clips `subject` against every edge of the convex polygon `clip`
/// (Sutherland-Hodgman). Both must be counter-clockwise.
template <typename Scalar>
ConvexPolygon2<Scalar> clip_convex(const ConvexPolygon2<Scalar>& subject,
                                   const ConvexPolygon2<Scalar>& clip) {
  using Point = typename ConvexPolygon2<Scalar>::Point;
  std::vector<Point> output = subject.vertices;
  const std::size_t m = clip.vertices.size();
  for (std::size_t e = 0; e < m && !output.empty(); ++e) {
    const Point& a = clip.vertices[e];
    const Point& b = clip.vertices[(e + 1) % m];
    const Point edge = b - a;
    const Scalar len = edge.norm();
    if (len <= Scalar(0)) continue;
    // Signed distance to the edge line, positive on the inner (left) side.
    auto side = [&](const Point& p) { return detail::cross2<Scalar>(edge, p - a) / len; };

    std::vector<Point> input;
    input.swap(output);
    const std::size_t n = input.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point& cur = input[i];
      const Point& prev = input[(i + n - 1) % n];
      const Scalar dc = side(cur);
      const Scalar dp = side(prev);
      const bool cur_in = dc >= Scalar(0);
      const bool prev_in = dp >= Scalar(0);
      if (cur_in != prev_in) {
        const Scalar t = dp / (dp - dc);
        output.push_back(prev + t * (cur - prev));
      }
      if (cur_in) output.push_back(cur);
    }
  }
  ConvexPolygon2<Scalar> result;
  if (output.size() >= 3) result.vertices = std::move(output);
  return result;
}

/// Area of the intersection of two convex polygons. Slivers thinner than
/// kContactTolerance (touching edges or corners) report zero.
template <typename Scalar>
Scalar convex_intersection_area(const ConvexPolygon2<Scalar>& a, const ConvexPolygon2<Scalar>& b) {
  if (a.vertices.size() < 3 || b.vertices.size() < 3) return Scalar(0);
  const ConvexPolygon2<Scalar> inter = clip_convex(a, b);
  if (inter.vertices.empty()) return Scalar(0);
  const Scalar area = signed_area(inter);
  Scalar perimeter(0);
  const std::size_t n = inter.vertices.size();
  for (std::size_t i = 0; i < n; ++i)
    perimeter += (inter.vertices[(i + 1) % n] - inter.vertices[i]).norm();
  if (area <= Scalar(kContactTolerance) * perimeter / Scalar(2)) return Scalar(0);
  return area;
}

template <typename Scalar>
Scalar bev_intersection_area(const Box3<Scalar>& a, const Box3<Scalar>& b) {
  return convex_intersection_area(ConvexPolygon2<Scalar>::footprint(a),
                                  ConvexPolygon2<Scalar>::footprint(b));
}

/// Footprint IoU on the ground plane.
template <typename Scalar>
Scalar iou_bev(const Box3<Scalar>& a, const Box3<Scalar>& b) {
  const Scalar inter = bev_intersection_area(a, b);
  if (inter <= Scalar(0)) return Scalar(0);
  const Scalar uni = a.length * a.width + b.length * b.width - inter;
  return std::clamp(inter / uni, Scalar(0), Scalar(1));
}

/// Volumetric IoU of two upright boxes.
template <typename Scalar>
Scalar iou_3d(const Box3<Scalar>& a, const Box3<Scalar>& b) {
  const Scalar dz = std::min(a.top(), b.top()) - std::max(a.bottom(), b.bottom());
  if (dz <= Scalar(kContactTolerance)) return Scalar(0);
  const Scalar area = bev_intersection_area(a, b);
  if (area <= Scalar(0)) return Scalar(0);
  const Scalar inter = area * dz;
  const Scalar uni = a.volume() + b.volume() - inter;
  return std::clamp(inter / uni, Scalar(0), Scalar(1));
}

/// Pairwise 3D IoU, rows indexed by `rows`, columns by `cols`.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> iou_3d_matrix(
    std::span<const Box3<Scalar>> rows, std::span<const Box3<Scalar>> cols) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) m(i, j) = iou_3d(rows[i], cols[j]);
  return m;
}

}  // namespace infraqa
