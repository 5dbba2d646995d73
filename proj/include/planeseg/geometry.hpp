/* Copyright 2026 The PlaneSeg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef PLANESEG_GEOMETRY_HPP_
#define PLANESEG_GEOMETRY_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "planeseg/errors.hpp"

namespace planeseg {

using Vec3 = Eigen::Vector3d;

// Pinhole camera. fx/fy/cx/cy in pixels, no distortion model.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  // Throws ConfigError when the stated invariants do not hold.
  void validate() const;
};

// Single-channel depth image. Values are millimeters, 0 marks an
// invalid measurement.
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> values;  // row-major, width*height

  std::uint16_t at(int row, int col) const {
    return values[static_cast<std::size_t>(row) * width + col];
  }
  std::uint16_t& at(int row, int col) {
    return values[static_cast<std::size_t>(row) * width + col];
  }
};

// Source pixel of an unprojected point.
struct PixelRef {
  int row = 0;
  int col = 0;
};

// Points in meters plus, for every point, the pixel it came from.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<PixelRef> provenance;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

// Plane n.x = d with unit normal and canonical orientation d >= 0.
// Ties (d == 0) keep the lexicographically larger of {n, -n}.
struct Plane {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;

  // Re-normalizes and applies the canonical orientation.
  static Plane canonical(const Vec3& normal, double offset);

  double signed_distance(const Vec3& p) const { return normal.dot(p) - offset; }
};

// Continuous-coordinate box; area = (x_max-x_min)*(y_max-y_min).
struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double area() const { return (x_max - x_min) * (y_max - y_min); }
};

// Per-pixel instance mask.
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;  // row-major, 0 or 1

  static BinaryMask zeros(int width, int height) {
    return BinaryMask{width, height,
                      std::vector<std::uint8_t>(
                          static_cast<std::size_t>(width) * height, 0)};
  }
  std::uint8_t at(int row, int col) const {
    return values[static_cast<std::size_t>(row) * width + col];
  }
  std::uint8_t& at(int row, int col) {
    return values[static_cast<std::size_t>(row) * width + col];
  }
  std::uint64_t popcount() const;
};

// Per-pixel instance-id image; 0 is background / non-planar.
struct SegLabelMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint32_t> ids;  // row-major

  static SegLabelMap zeros(int width, int height) {
    return SegLabelMap{width, height,
                       std::vector<std::uint32_t>(
                           static_cast<std::size_t>(width) * height, 0)};
  }
  std::uint32_t at(int row, int col) const {
    return ids[static_cast<std::size_t>(row) * width + col];
  }
  std::uint32_t& at(int row, int col) {
    return ids[static_cast<std::size_t>(row) * width + col];
  }
};

// Back-projects valid depth pixels through the pinhole model. Depth is
// converted to meters; pixels with depth 0 are skipped.
PointCloud unproject(const DepthImage& depth, const CameraIntrinsics& intr);

// |n.p - d|, non-negative.
double point_plane_distance(const Plane& plane, const Vec3& p);

// Intersection over union of two boxes; 0 when the union has zero area.
double box_iou(const BoundingBox& a, const BoundingBox& b);

// Total-least-squares plane through >= 3 non-collinear points: normal is
// the eigenvector of the smallest eigenvalue of the centered covariance,
// offset from the centroid. Throws DegenerateInputError otherwise.
Plane fit_plane_lsq(const std::vector<Vec3>& points);

}  // namespace planeseg

#endif  // PLANESEG_GEOMETRY_HPP_
